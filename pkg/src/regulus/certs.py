"""Certificate files: canonical JSON records that can be re-executed and compared."""
from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

from . import __version__
from .search import (DEFAULT_DEPTH_CEILING, DEFAULT_ORACLE_CEILING, AnnihilationHit,
                     CensusResult, ProgressionCongruence, census, direct_verify, hecke_report,
                     progression_from_L, serre_probe_form)
from .series import MOD, Ring
from .theorems import (StatementId, VerificationReport, meta_f_km, meta_f_kmj,
                       random_sparse_series, verify_identity_3_1,
                       verify_lemma_3_2, verify_prop_fkmj, verify_prop_j0, verify_uv_commutation)

SCHEMA_VERSION = "regulus-cert/1"
CENSUS_KIND = "CENSUS"
KINDS = tuple(s.value for s in StatementId) + (CENSUS_KIND,)


class Method(str, enum.Enum):
    EXACT_IDENTITY = "EXACT_IDENTITY"
    COEFFICIENT_SCAN = "COEFFICIENT_SCAN"
    STURM_PROOF_GRADE = "STURM_PROOF_GRADE"
    DIRECT_ORACLE = "DIRECT_ORACLE"


class CertificateError(ValueError):
    """A certificate file is malformed or internally inconsistent."""


WINDOW_ONLY = "holds on the stated coefficient window; nothing is claimed beyond it"
SPACE = ("{name} is a holomorphic modular form of weight {w} on Gamma0({N}) with character "
         "{chi} and integral coefficients")
HECKE_SPACE = "T({l}) preserves that space, so the image is again such a form"
OTHER_SIDE = ("F_{{{k},{m}}} is congruent mod {M} to a form in the same space, so the bound "
              "applies to the difference of the two sides")


def _s(v: int) -> str:
    return str(int(v))


@dataclass(frozen=True)
class Certificate:
    kind: str
    params: dict[str, str]
    statement: str
    method: str
    depth: int
    passed: bool
    digest: str
    engine: dict[str, str]
    sturm_bound: int | None = None
    first_failure: dict[str, str] | None = None
    assumptions: list[str] = field(default_factory=list)
    result: dict[str, Any] | None = None
    provenance: dict[str, Any] | None = None
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        validate(self)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("result", "provenance"):
            if d[key] is None:
                del d[key]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        if not isinstance(data, dict):
            raise CertificateError("certificate must be a JSON object")
        if data.get("schema_version") != SCHEMA_VERSION:
            raise CertificateError(f"unsupported schema_version {data.get('schema_version')!r}")
        names = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - names)
        if unknown:
            raise CertificateError(f"unknown certificate fields: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise CertificateError(str(exc)) from None

    def int_param(self, name: str) -> int:
        try:
            return int(self.params[name])
        except (KeyError, ValueError):
            raise CertificateError(f"missing or non-integer parameter {name!r}") from None

    @property
    def filename(self) -> str:
        tag = "-".join(f"{k}{v}" for k, v in sorted(self.params.items()))
        return f"{self.kind.lower()}-{tag}-d{self.depth}.json"


def validate(c: Certificate) -> None:
    if c.schema_version != SCHEMA_VERSION:
        raise CertificateError(f"unsupported schema_version {c.schema_version!r}")
    if c.kind not in KINDS:
        raise CertificateError(f"unknown kind {c.kind!r}")
    if c.method not in Method.__members__:
        raise CertificateError(f"unknown method {c.method!r}")
    if not isinstance(c.params, dict) or not all(
            isinstance(v, str) and v.lstrip("-").isdigit() for v in c.params.values()):
        raise CertificateError("params must map names to decimal integer strings")
    if not isinstance(c.depth, int) or c.depth < 0:
        raise CertificateError("depth must be a nonnegative integer")
    if c.method == Method.STURM_PROOF_GRADE:
        if c.sturm_bound is None or c.depth < c.sturm_bound:
            raise CertificateError("proof-grade method needs depth >= sturm_bound")
        if not c.passed:
            raise CertificateError("a failed check cannot be proof-grade")
    if c.passed == (c.first_failure is not None):
        raise CertificateError("first_failure must be present exactly when passed is false")
    if not str(c.digest).startswith("sha256:"):
        raise CertificateError("digest must be a sha256 value")
    if set(c.engine) != {"version", "truncation", "ring"}:
        raise CertificateError("engine must record version, truncation and ring")


# -- building certificates -----------------------------------------------------

def _statement(kind: str, p: dict[str, int]) -> str:
    if kind == StatementId.IDENTITY_3_1:
        return (f"(eta(24*{p['k']}z) eta^{p['m']}(24*{p['m']}z) / eta(24z)) | U({p['m']}) "
                f"= F_{{{p['k']},{p['m']}}}(z) eta^{p['m']}(24z)")
    if kind == StatementId.PROP_FKMJ_CONG:
        return f"f_{{{p['k']},{p['m']},{p['j']}}} == F_{{{p['k']},{p['m']}}} (mod {p['M']})"
    if kind == StatementId.PROP_J0_CONG:
        return f"f_{{{p['k']},{p['m']}}} == F_{{{p['k']},{p['m']}}} (mod {p['M']})"
    if kind == StatementId.LEMMA_3_2:
        n1, n2, i = p["n1"], p["n2"], p["i"]
        return f"eta^{n2 ** i}({n1}z) / eta^{n2 ** (i - 1)}({n1 * n2}z) == 1 (mod {p['M']})"
    if kind == StatementId.UV_COMMUTE:
        return f"(f | U({p['d1']})) | V({p['d2']}) = (f | V({p['d2']})) | U({p['d1']})"
    if kind == StatementId.HECKE_ANNIHILATION:
        name = f"f_{{{p['k']},{p['m']}}}" if p["j"] == 0 else f"f_{{{p['k']},{p['m']},{p['j']}}}"
        return f"{name} | T({p['l']}) == 0 (mod {p['M']})"
    if kind == StatementId.SERRE_PROBE:
        return f"a(n*{p['l']}^{p['r']}) == {p['r'] + 1}*a(n) (mod {p['M']}) for n coprime to {p['l']}"
    if kind == StatementId.PROGRESSION:
        return f"b_{p['k']}({p['A']}n + {p['B']}) == 0 (mod {p['M']})"
    if kind == CENSUS_KIND:
        return f"#{{n < {p['N']} : b_{p['k']}(n) == r (mod {p['modulus']})}} for every r"
    raise CertificateError(f"unknown kind {kind!r}")


def _engine(depth_text: str, ring: str) -> dict[str, str]:
    return {"version": __version__, "truncation": depth_text, "ring": ring}


def _failure(report: VerificationReport) -> dict[str, str] | None:
    if report.first_failure is None:
        return None
    q, expected, got = report.first_failure
    return {"exponent": str(Fraction(q)), "expected": _s(expected), "got": _s(got)}


def _report_method(report: VerificationReport) -> Method:
    if report.proof_grade:
        return Method.STURM_PROOF_GRADE
    if report.statement_id == StatementId.IDENTITY_3_1 and report.ring == "exact":
        return Method.EXACT_IDENTITY
    return Method.COEFFICIENT_SCAN


def _report_assumptions(report: VerificationReport, method: Method) -> list[str]:
    if method != Method.STURM_PROOF_GRADE:
        return [WINDOW_ONLY]
    p = report.params
    k, m, j = p["k"], p["m"], p.get("j", 0)
    meta = meta_f_km(k, m) if j == 0 else meta_f_kmj(k, m, j)
    name = f"f_{{{k},{m}}}" if j == 0 else f"f_{{{k},{m},{j}}}"
    out = [SPACE.format(name=name, w=meta.weight, N=meta.level, chi=meta.character)]
    if report.statement_id == StatementId.HECKE_ANNIHILATION:
        out.append(HECKE_SPACE.format(l=p["l"]))
    else:
        out.append(OTHER_SIDE.format(k=k, m=m, M=p["M"]))
    return out


def from_report(report: VerificationReport, *, extra_params: dict[str, int] | None = None,
                result: dict | None = None) -> Certificate:
    params = dict(report.params, **(extra_params or {}))
    kind = report.statement_id.value
    method = _report_method(report)
    return Certificate(
        kind=kind, params={k: _s(v) for k, v in params.items()},
        statement=_statement(report.statement_id, params), method=method.value,
        depth=report.depth_checked, passed=report.passed, digest=report.digest,
        engine=_engine(f"q^0..q^{report.depth_checked}", report.ring),
        sturm_bound=report.sturm_bound, first_failure=_failure(report),
        assumptions=_report_assumptions(report, method), result=result)


def from_hit(hit: AnnihilationHit) -> Certificate:
    report = VerificationReport(
        StatementId.HECKE_ANNIHILATION,
        {"k": hit.k, "m": hit.m, "j": hit.j, "l": hit.l, "M": hit.modulus}, hit.depth_checked,
        True, sturm_bound=hit.sturm_bound, proof_grade=hit.proof_grade, digest=hit.digest,
        ring=str(MOD(hit.modulus)))
    return from_report(report, result={"residue_ok": hit.residue_ok})


def _hecke_result(p: dict[str, int]) -> dict:
    res_mod = 576 * p["k"] * p["M"]
    return {"residue_ok": p["l"] % res_mod == res_mod - 1}


def _progression_provenance(pc: ProgressionCongruence) -> dict:
    out = {}
    for key, v in sorted(pc.provenance.items()):
        if isinstance(v, bool) or isinstance(v, str):
            out[key] = v
        elif isinstance(v, int):
            out[key] = _s(v)
        else:
            out[key] = [_s(x) for x in v]
    return out


def from_progression(pc: ProgressionCongruence) -> Certificate:
    params = {"k": pc.k, "M": pc.M, "A": pc.A, "B": pc.B, "n_max": pc.n_max}
    failure = None
    if pc.first_failure is not None:
        n, value = pc.first_failure
        failure = {"n": _s(n), "argument": _s(pc.A * n + pc.B), "value": _s(value)}
    return Certificate(
        kind=StatementId.PROGRESSION.value, params={k: _s(v) for k, v in params.items()},
        statement=_statement(StatementId.PROGRESSION, params), method=Method.DIRECT_ORACLE.value,
        depth=pc.A * params["n_max"] + pc.B, passed=pc.passed, digest=pc.digest,
        engine=_engine(f"b_{pc.k}(0..{pc.A * params['n_max'] + pc.B})", str(MOD(pc.M))),
        first_failure=failure,
        assumptions=[f"checked for 0 <= n <= {params['n_max']} only",
                     "sampled values recomputed by partition-counting dynamic programming"],
        result={"oracle_points": _s(pc.oracle_points), "verified_to": _s(pc.verified_to)},
        provenance=_progression_provenance(pc))


def from_census(c: CensusResult) -> Certificate:
    params = {"k": c.k, "modulus": c.modulus, "N": c.N}
    result: dict[str, Any] = {"counts": {_s(r): _s(v) for r, v in sorted(c.counts.items())}}
    if c.witness is not None:
        result["witness"] = {k: (None if v is None else _s(v)) for k, v in c.witness.items()}
    return Certificate(
        kind=CENSUS_KIND, params={k: _s(v) for k, v in params.items()},
        statement=_statement(CENSUS_KIND, params), method=Method.COEFFICIENT_SCAN.value,
        depth=c.N - 1, passed=True, digest=c.digest,
        engine=_engine(f"b_{c.k}(0..{c.N - 1})", str(MOD(c.modulus))),
        assumptions=[WINDOW_ONLY], result=result)


# -- persistence ---------------------------------------------------------------

def write(cert: Certificate, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, cert.filename)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cert.to_json())
    os.replace(tmp, path)
    return path


def summary(cert: Certificate, path: str | None = None) -> str:
    params = " ".join(f"{k}={v}" for k, v in sorted(cert.params.items()))
    line = (f"{'PASS' if cert.passed else 'FAIL'} {cert.kind} {params} depth={cert.depth} "
            f"method={cert.method}")
    return f"{line} -> {path}" if path else line


def emit(cert: Certificate, out_dir: str) -> str:
    """Write ``cert`` under ``out_dir`` and print a one-line summary."""
    path = write(cert, out_dir)
    print(summary(cert, path))
    return path


def load(path: str) -> Certificate:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CertificateError(f"{path}: not valid JSON ({exc})") from None
    return Certificate.from_dict(data)


# -- re-execution --------------------------------------------------------------

@dataclass(frozen=True)
class CheckOutcome:
    ok: bool
    problems: tuple[str, ...]
    fresh: Certificate | None = None
    malformed: bool = False


def rerun(cert: Certificate, *, ceiling: int = DEFAULT_DEPTH_CEILING,
          oracle_ceiling: int = DEFAULT_ORACLE_CEILING) -> Certificate:
    """Recompute the certificate named by ``cert.kind`` and its recorded parameters."""
    kind, d, p = cert.kind, cert.depth, cert.int_param
    sturm = cert.sturm_bound is not None
    if kind == StatementId.IDENTITY_3_1:
        return from_report(verify_identity_3_1(p("k"), p("m"), d, Ring.parse(cert.engine["ring"])))
    if kind == StatementId.PROP_FKMJ_CONG:
        return from_report(verify_prop_fkmj(p("k"), p("m"), p("j"), d, sturm=sturm))
    if kind == StatementId.PROP_J0_CONG:
        return from_report(verify_prop_j0(p("k"), p("m"), d, sturm=sturm))
    if kind == StatementId.LEMMA_3_2:
        return from_report(verify_lemma_3_2(p("n1"), p("n2"), p("i"), d))
    if kind == StatementId.UV_COMMUTE:
        f = random_sparse_series(p("seed"), p("size"), p("terms"), p("bound"))
        extra = {k: p(k) for k in ("seed", "size", "terms", "bound")}
        return from_report(verify_uv_commutation(f, p("d1"), p("d2"), extra))
    if kind == StatementId.HECKE_ANNIHILATION:
        rep = hecke_report(p("k"), p("m"), p("j"), p("l"), d, ceiling=ceiling)
        return from_report(rep, result=_hecke_result(rep.params))
    if kind == StatementId.SERRE_PROBE:
        return from_report(serre_probe_form(p("k"), p("m"), p("j"), p("l"), p("r"), p("M"), d))
    if kind == StatementId.PROGRESSION:
        prov = _check_provenance(cert)
        pc = direct_verify(p("k"), p("A"), p("B"), p("M"), p("n_max"), provenance=prov,
                           ceiling=ceiling, oracle_ceiling=oracle_ceiling)
        return from_progression(pc)
    if kind == CENSUS_KIND:
        return from_census(census(p("k"), p("modulus"), p("N")))
    raise CertificateError(f"unknown kind {kind!r}")


def _check_provenance(cert: Certificate) -> dict:
    """Re-derive the progression from its recorded construction trace."""
    prov = dict(cert.provenance or {})
    if prov.get("source") == "direct-scan" or not prov:
        return prov or {"source": "direct-scan"}
    if prov.get("source") != "hecke":
        raise CertificateError(f"unknown provenance source {prov.get('source')!r}")
    try:
        L, P = int(prov["L"]), int(prov["P_M"])
        primes = [int(x) for x in prov["primes"]]
    except (KeyError, TypeError, ValueError):
        raise CertificateError("hecke provenance needs L, P_M and primes") from None
    if math.prod(primes) != L or len(set(primes)) != len(primes):
        raise CertificateError("provenance primes do not multiply to L")
    A, B, _ = progression_from_L(cert.int_param("k"), P, L)
    if (A, B) != (cert.int_param("A"), cert.int_param("B")):
        raise CertificateError("provenance does not produce the recorded progression")
    out: dict[str, Any] = {"source": "hecke", "L": L, "P_M": P, "primes": primes}
    if "residue_ok" in prov:
        out["residue_ok"] = prov["residue_ok"]
    return out


def check(path: str, **ceilings) -> CheckOutcome:
    """Re-execute the certificate at ``path`` and compare every recorded field."""
    try:
        cert = load(path)
    except (CertificateError, OSError) as exc:
        return CheckOutcome(False, (str(exc),), malformed=True)
    try:
        fresh = rerun(cert, **ceilings)
    except CertificateError as exc:
        return CheckOutcome(False, (str(exc),), malformed=True)
    except ValueError as exc:
        return CheckOutcome(False, (f"re-run failed: {exc}",))
    recorded, now = cert.to_dict(), fresh.to_dict()
    problems = []
    for key in sorted(set(recorded) | set(now)):
        if key == "engine":
            continue
        if recorded.get(key) != now.get(key):
            problems.append(f"{key}: recorded {recorded.get(key)!r}, re-run gives {now.get(key)!r}")
    for key in ("truncation", "ring"):
        if cert.engine.get(key) != fresh.engine.get(key):
            problems.append(f"engine.{key}: recorded {cert.engine.get(key)!r}, "
                            f"re-run gives {fresh.engine.get(key)!r}")
    return CheckOutcome(not problems, tuple(problems), fresh)
