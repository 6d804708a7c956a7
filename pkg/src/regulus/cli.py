"""Command-line entry point.

Exit status: 0 when every check passed, 1 when a verification failed,
2 on usage or engine errors.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import certs, plotting
from .config import Config, load_config, parse_range
from .eta import EtaQuotient, bk_oracle_table, bk_series, expand_to
from .search import (DepthInfeasible, annihilation_search, census, find_progressions,
                     key_step_check)
from .series import DENOM, EXACT, PrecisionError, Ring
from .theorems import (check_km, meta_f_km, meta_f_kmj, sturm_bound, verify_identity_3_1,
                       verify_lemma_3_2, verify_prop_fkmj, verify_prop_j0)

log = logging.getLogger("regulus")

OK, FAILED, ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


def _global_flags(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--out", default=default, help="output directory")
    p.add_argument("--threads", type=int, default=default, help="worker threads")
    p.add_argument("--ring", default=default, help="exact or mod:M")
    p.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regulus", description=__doc__.splitlines()[0])
    _global_flags(parser, None)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bk", parents=[common], help="table of b_k(n), checked against the oracle")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max", type=int, required=True, dest="n")

    p = sub.add_parser("eta", parents=[common], help="expand an eta quotient")
    p.add_argument("--quotient", required=True, help='e.g. "48:1,24:-1"')
    p.add_argument("--depth", type=int, required=True)

    p = sub.add_parser("verify", parents=[common], help="verify one statement, emit a certificate")
    p.add_argument("which", choices=["identity31", "prop-fkmj", "prop-j0", "lemma32"])
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--sturm", action="store_true",
                   help="compare against the Sturm bound (use with --depth >= bound for proof grade)")

    p = sub.add_parser("search", parents=[common], help="Hecke annihilation and progressions")
    ss = p.add_subparsers(dest="search_kind", required=True)
    a = ss.add_parser("annihilate", parents=[common])
    a.add_argument("--k", type=int, required=True)
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--j", type=int, default=0)
    a.add_argument("--primes", default=None, help="LO..HI")
    a.add_argument("--depth", type=int)
    a.add_argument("--residue", action="store_true", help="only primes l == -1 (mod 576 k m^(j+1))")
    a.add_argument("--sturm", action="store_true", help="search at the Sturm bound (proof grade)")
    a.add_argument("--nmax", type=int, help="range of the key-step oracle check")
    g = ss.add_parser("progressions", parents=[common])
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--M", type=int, required=True)
    g.add_argument("--depth", type=int)
    g.add_argument("--primes", default=None, help="LO..HI")
    g.add_argument("--nmax", type=int)
    g.add_argument("--residue", action="store_true")

    p = sub.add_parser("census", parents=[common], help="residue counts of b_k(n)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mod", type=int, required=True)
    p.add_argument("--max", type=int, required=True, dest="N")

    p = sub.add_parser("cert", parents=[common], help="certificate tools")
    cs = p.add_subparsers(dest="cert_kind", required=True)
    c = cs.add_parser("check", parents=[common])
    c.add_argument("files", nargs="+")
    return parser


def _ring(cfg: Config) -> Ring | None:
    return Ring.parse(cfg.ring) if cfg.ring else None


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.which} needs {', '.join(missing)}")


def _no_ring(cfg: Config, what: str) -> None:
    if cfg.ring:
        raise UsageError(f"--ring does not apply to {what}")


# -- commands -------------------------------------------------------------------

def cmd_bk(args, cfg: Config) -> int:
    if args.n < 0:
        raise UsageError("--max must be nonnegative")
    ring = _ring(cfg) or EXACT
    values = bk_series(args.k, args.n, ring).q_array(args.n)
    status = "unchecked"
    code = OK
    if args.n <= cfg.oracle_ceiling:
        oracle = bk_oracle_table(args.k, args.n, ring.modulus)
        bad = np.flatnonzero(values != oracle)
        if len(bad):
            status = f"MISMATCH at n={int(bad[0])}"
            code = FAILED
        else:
            status = "oracle-checked"
    base = os.path.join(cfg.out, f"bk-k{args.k}-n{args.n}-{str(ring).replace(':', '')}")
    plotting.write_csv(base + ".csv", ["n", f"b_{args.k}(n)"],
                       ((n, int(v)) for n, v in enumerate(values)))
    plotting.bk_growth(values, args.k, base + ".png")
    tail = ", ".join(str(int(v)) for v in values[:12])
    print(f"{'PASS' if code == OK else 'FAIL'} bk k={args.k} n=0..{args.n} ring={ring} "
          f"{status}: {tail}{', ...' if args.n >= 12 else ''} -> {base}.csv")
    return code


def cmd_eta(args, cfg: Config) -> int:
    E = EtaQuotient.parse(args.quotient)
    ring = _ring(cfg) or EXACT
    s = expand_to(E, args.depth, ring)
    terms = sorted(s.nonzero_terms().items())
    path = os.path.join(cfg.out, f"eta-{str(E).replace(':', '_').replace(',', '+')}"
                                 f"-d{args.depth}-{str(ring).replace(':', '')}.csv")

    def exp_text(e):
        return str(e // DENOM) if e % DENOM == 0 else f"{e}/{DENOM}"

    plotting.write_csv(path, ["exponent", "coefficient"],
                       ((exp_text(e), int(c)) for e, c in terms))
    shown = " ".join(f"{'+' if c > 0 else '-'}{abs(c)}q^{exp_text(e)}" for e, c in terms[:8])
    print(f"eta {E} through q^{args.depth} ({len(terms)} terms, ring={ring}): {shown}"
          f"{' ...' if len(terms) > 8 else ''} -> {path}")
    return OK


def cmd_verify(args, cfg: Config) -> int:
    which = args.which
    ring = _ring(cfg)
    required = {"identity31": ("k", "m"), "prop-fkmj": ("k", "m", "j"), "prop-j0": ("k", "m"),
                "lemma32": ("n1", "n2", "i")}[which]
    _need(args, *required)
    default = {"identity31": cfg.identity_depth, "lemma32": cfg.lemma_depth}.get(
        which, cfg.congruence_depth)
    depth = args.depth if args.depth is not None else default
    if depth < 0:
        raise UsageError("--depth must be nonnegative")
    if depth > cfg.depth_ceiling:
        raise DepthInfeasible(f"depth {depth} exceeds the ceiling {cfg.depth_ceiling}")
    if which == "identity31":
        report = verify_identity_3_1(args.k, args.m, depth, ring or EXACT)
    elif which == "prop-fkmj":
        report = verify_prop_fkmj(args.k, args.m, args.j, depth, ring, sturm=args.sturm)
    elif which == "prop-j0":
        report = verify_prop_j0(args.k, args.m, depth, ring, sturm=args.sturm)
    else:
        _no_ring(cfg, "lemma32 (it always works mod n2^i)")
        report = verify_lemma_3_2(args.n1, args.n2, args.i, depth)
    certs.emit(certs.from_report(report), cfg.out)
    return OK if report.passed else FAILED


def cmd_annihilate(args, cfg: Config) -> int:
    _no_ring(cfg, "search")
    check_km(args.k, args.m)
    lo, hi = parse_range(args.primes or cfg.primes)
    meta = meta_f_km(args.k, args.m) if args.j == 0 else meta_f_kmj(args.k, args.m, args.j)
    depth = args.depth if args.depth is not None else cfg.search_depth
    if args.sturm:
        depth = max(depth, sturm_bound(meta))
    n_max = args.nmax if args.nmax is not None else cfg.n_max
    hits = annihilation_search(args.k, args.m, args.j, (lo, hi), depth, args.residue,
                               threads=cfg.threads, ceiling=cfg.depth_ceiling)
    code = OK
    rows = []
    for h in hits:
        ok, points, bad = key_step_check(h, n_max)
        rows.append((h.l, h.modulus, int(h.residue_ok), h.depth_checked, int(h.proof_grade),
                     points, "ok" if ok else f"fails at n={bad}"))
        certs.emit(certs.from_hit(h), cfg.out)
        if not ok:
            print(f"FAIL key step for l={h.l}: b_{h.k}(({h.m}*{h.l}*n - {h.k - 1})/24) "
                  f"is not 0 mod {h.modulus} at n={bad}")
            code = FAILED
    path = os.path.join(cfg.out, f"annihilate-k{args.k}-m{args.m}-j{args.j}-p{lo}_{hi}"
                                 f"-d{depth}{'-residue' if args.residue else ''}.csv")
    plotting.write_csv(path, ["l", "modulus", "residue_ok", "depth", "proof_grade",
                              "key_step_points", "key_step"], rows)
    print(f"search annihilate k={args.k} m={args.m} j={args.j} primes {lo}..{hi} depth={depth}: "
          f"{len(hits)} hit(s) -> {path}")
    return code


def cmd_progressions(args, cfg: Config) -> int:
    _no_ring(cfg, "search")
    lo, hi = parse_range(args.primes or cfg.primes)
    depth = args.depth if args.depth is not None else cfg.search_depth
    n_max = args.nmax if args.nmax is not None else cfg.n_max
    verified, rejected, skipped, hits = find_progressions(
        args.k, args.M, (lo, hi), depth, n_max, threads=cfg.threads,
        require_residue=args.residue, ceiling=cfg.depth_ceiling,
        oracle_ceiling=cfg.oracle_ceiling)
    rows = []
    for pc in sorted(verified + rejected, key=lambda pc: (pc.A, pc.B)):
        certs.emit(certs.from_progression(pc), cfg.out)
        rows.append((pc.A, pc.B, pc.provenance.get("L", ""), "verified" if pc.passed else
                     f"rejected at n={pc.first_failure[0]}", pc.verified_to, pc.oracle_points))
    for c in skipped:
        rows.append((c.A, c.B, c.L, f"skipped: needs depth {c.A * n_max + c.B}", "", ""))
    path = os.path.join(cfg.out, f"progressions-k{args.k}-M{args.M}-p{lo}_{hi}-d{depth}"
                                 f"-n{n_max}{'-residue' if args.residue else ''}.csv")
    plotting.write_csv(path, ["A", "B", "L", "status", "verified_to", "oracle_points"], rows)
    per_prime = ", ".join(f"{p}: {len(h)}" for p, h in sorted(hits.items()))
    print(f"search progressions k={args.k} M={args.M}: hits per prime [{per_prime}]; "
          f"{len(verified)} verified, {len(rejected)} rejected, {len(skipped)} skipped -> {path}")
    return FAILED if rejected else OK


def cmd_census(args, cfg: Config) -> int:
    _no_ring(cfg, "census (use --mod)")
    if args.N > cfg.depth_ceiling:
        raise DepthInfeasible(f"--max {args.N} exceeds the ceiling {cfg.depth_ceiling}")
    result = census(args.k, args.mod, args.N)
    cert = certs.from_census(result)
    certs.emit(cert, cfg.out)
    base = os.path.join(cfg.out, f"census-k{args.k}-mod{args.mod}-N{args.N}")
    plotting.write_csv(base + ".csv", ["residue", "count"], sorted(result.counts.items()))
    plotting.census_bar(result.counts, args.k, args.mod, args.N, base + ".png")
    if result.witness is not None:
        w = result.witness
        if w["n0"] is None:
            print(f"no n0 < {args.N} with 24 n0 == {1 - args.k} (mod {w['m']}) "
                  f"and b_{args.k}(n0) prime to {w['m']}")
        else:
            print(f"witness n0={w['n0']}: b_{args.k}(n0) == {w['e']} (mod {args.mod})")
    return OK


def cmd_cert_check(args, cfg: Config) -> int:
    code = OK
    for path in args.files:
        outcome = certs.check(path, ceiling=cfg.depth_ceiling, oracle_ceiling=cfg.oracle_ceiling)
        if outcome.ok:
            print(f"PASS {path}: re-run reproduces digest and verdict")
            continue
        tag = "INVALID" if outcome.malformed else "MISMATCH"
        print(f"FAIL {path}: {tag}")
        for problem in outcome.problems:
            print(f"  {problem}")
        code = max(code, ERROR if outcome.malformed else FAILED)
    return code


def dispatch(args, cfg: Config) -> int:
    if args.command == "bk":
        return cmd_bk(args, cfg)
    if args.command == "eta":
        return cmd_eta(args, cfg)
    if args.command == "verify":
        return cmd_verify(args, cfg)
    if args.command == "search":
        return cmd_annihilate(args, cfg) if args.search_kind == "annihilate" \
            else cmd_progressions(args, cfg)
    if args.command == "census":
        return cmd_census(args, cfg)
    return cmd_cert_check(args, cfg)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config().merged(out=args.out, threads=args.threads, ring=args.ring)
        if cfg.ring:
            Ring.parse(cfg.ring)
        return dispatch(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"regulus: error: {exc}", file=sys.stderr)
        return ERROR
    except (ValueError, PrecisionError, OSError) as exc:
        print(f"regulus: error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
