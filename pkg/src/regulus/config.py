"""Engine configuration: built-in defaults, overridden by a JSON file, overridden by flags."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace

ENV_VAR = "REGULUS_CONFIG"


@dataclass(frozen=True)
class Config:
    out: str = "regulus-out"
    threads: int = 1
    ring: str | None = None
    depth_ceiling: int = 20_000_000
    oracle_ceiling: int = 400_000
    identity_depth: int = 2000
    congruence_depth: int = 1000
    lemma_depth: int = 300
    search_depth: int = 2000
    primes: str = "5..100"
    n_max: int = 2000

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        for name in ("depth_ceiling", "oracle_ceiling", "identity_depth", "congruence_depth",
                     "lemma_depth", "search_depth", "n_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        parse_range(self.primes)

    def merged(self, **overrides) -> "Config":
        """Copy with every non-``None`` override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)


def parse_range(text: str) -> tuple[int, int]:
    """Parse ``"LO..HI"`` (inclusive)."""
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise ValueError(f"bad range {text!r}; expected LO..HI") from None
    if lo < 0 or hi < lo - 1:
        raise ValueError(f"bad range {text!r}")
    return lo, hi


def load_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(Config)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return data


def load_config(environ: dict | None = None) -> Config:
    """Defaults, then the file named by ``REGULUS_CONFIG`` if set."""
    env = os.environ if environ is None else environ
    path = env.get(ENV_VAR)
    if not path:
        return Config()
    return Config(**load_file(path))
