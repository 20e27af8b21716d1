"""Command-line front end: ``lambda-lab <command> p ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 environment or cache error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .cache import CacheError, cache_file, cache_load, cache_store
from .errors import PrecisionError, TheoremViolation
from .finitefield import (
    Fp2Elem,
    FpPoly,
    rbar_signs,
    evaluate_rbar,
    ordinary_nonvanishing,
    supersingular_lambdas,
)
from .modpoly import (
    CongruenceError,
    ModpolyError,
    SolverOptions,
    compute_modpoly,
    diag_polynomial,
    is_prime,
    r_polynomial,
    verify_degrees,
    verify_kronecker,
    verify_symmetry,
)
from .padic import class_number, cm_lift_trace, thm3_report
from .pairing import build_pairing_matrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ENV = 0, 1, 2, 3
CACHE_ENV = "LAMBDA_LAB_CACHE"

log = logging.getLogger("lambda_lab")


class UsageError(Exception):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    observed: object = None
    expected: object = None


@dataclass
class RunReport:
    command: str
    p: int
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    seconds: float = 0.0
    versions: dict = field(default_factory=lambda: {"lambda_lab": __version__})

    def check(self, name, passed, observed=None, expected=None) -> bool:
        self.checks.append(Check(name, bool(passed), observed, expected))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=str)

    def to_text(self) -> str:
        lines = [f"{self.command} p={self.p}"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            line = f"  {mark} {c.name}"
            if c.observed is not None:
                line += f": {c.observed}"
            if not c.passed and c.expected is not None:
                line += f" (expected {c.expected})"
            lines.append(line)
        for k, v in self.data.items():
            lines.append(f"  {k}: {v}")
        lines.append(f"  time: {self.seconds:.2f}s")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# helpers


def _prime_arg(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if p < 3 or not is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not an odd prime")
    return p


def _need_p5(p: int):
    if p < 5:
        raise UsageError(f"this command needs a prime p >= 5, got {p}")


def _cache_dir(args) -> str | None:
    if getattr(args, "no_cache", False):
        return None
    return os.environ.get(CACHE_ENV) or args.cache_dir


def get_modpoly(p: int, args):
    """Load F_p from the cache, or compute (and store) it."""
    directory = _cache_dir(args)
    if directory and cache_file(p, directory).exists():
        return cache_load(p, directory)
    opts = SolverOptions(precision=getattr(args, "precision", None), jobs=args.jobs)
    F = compute_modpoly(p, opts)
    if directory:
        try:
            cache_store(F, directory)
        except OSError as exc:
            raise CacheError(f"cannot write cache in {directory}: {exc}") from exc
    return F


def format_term(i: int, j: int, c: int) -> str:
    mono = []
    if i:
        mono.append("X" if i == 1 else f"X^{i}")
    if j:
        mono.append("Y" if j == 1 else f"Y^{j}")
    m = "*".join(mono) or "1"
    if c == 1:
        return m
    if c == -1:
        return f"-{m}"
    return f"{c}*{m}"


def _emit(args, text: str, payload: dict):
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_modpoly(args) -> int:
    p = args.p
    t0 = time.perf_counter()
    F = get_modpoly(p, args)
    checks = {
        "symmetry": verify_symmetry(F),
        "kronecker": verify_kronecker(F),
        "monic_degree": verify_degrees(F),
    }
    ok = all(checks.values())
    terms = sorted(F.coeffs.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))
    text = "\n".join(
        [f"F_{p}(X,Y) =  ({len(F)} terms)"]
        + [f"  {format_term(i, j, c)}" for (i, j), c in terms]
        + [f"checks: " + ", ".join(f"{k}={'PASS' if v else 'FAIL'}" for k, v in checks.items())]
    )
    payload = {
        "p": p,
        "coeffs": {f"{i},{j}": str(c) for (i, j), c in sorted(F.coeffs.items())},
        "checks": checks,
    }
    _emit(args, text, payload)
    log.info("modpoly p=%d in %.2fs", p, time.perf_counter() - t0)
    return EXIT_OK if ok else EXIT_FAIL


def run_verify(p: int, F) -> RunReport:
    """All checks on F_p that do not need p-adic lifting."""
    rep = RunReport("verify", p)
    rep.check("symmetry", verify_symmetry(F))
    rep.check("kronecker", verify_kronecker(F), expected="(X^p - Y)(X - Y^p) mod p")
    rep.check("monic_degree", verify_degrees(F), observed=(F.degree_x(), F.degree_y()), expected=(p + 1, p + 1))
    try:
        diag_polynomial(F)
        rep.check("diag_congruence", True)
    except CongruenceError as exc:
        rep.check("diag_congruence", False, observed=str(exc), expected="-(X^p - X)^2 mod p")
    try:
        R = r_polynomial(F)
    except CongruenceError as exc:
        rep.check("r_integrality", False, observed=str(exc))
        return rep
    rep.check("r_integrality", True, observed=f"deg R = {R.degree}")
    Rbar = FpPoly.from_int_poly(R, p)
    S = supersingular_lambdas(p)
    rep.check("supersingular_count", len(S) == (p - 1) // 2, observed=len(S), expected=(p - 1) // 2)
    rep.check("frobenius_closed", S.frobenius_closed())
    try:
        signs = rbar_signs(p, Rbar, S)
        rep.check("rbar_signs", True, observed=signs)
    except TheoremViolation as exc:
        rep.check("rbar_signs", False, observed=str(exc), expected="+-1, + where forced")
        signs = None
    bad = ordinary_nonvanishing(p, Rbar, S)
    rep.check(
        "ordinary_vanishing",
        not bad,
        observed=f"{len(bad)} nonzero values" if bad else "Rbar = 0 on all ordinary lambda",
        expected="0 nonzero values",
    )
    rep.data["supersingular"] = [str(x) for x in S]
    rep.data["signs"] = signs
    rep.data["Rbar(0)"] = str(evaluate_rbar(Rbar, 0))
    rep.data["Rbar(1)"] = str(evaluate_rbar(Rbar, 1))
    return rep


def cmd_verify(args) -> int:
    p = args.p
    _need_p5(p)
    t0 = time.perf_counter()
    F = get_modpoly(p, args)
    rep = run_verify(p, F)
    rep.seconds = time.perf_counter() - t0
    if args.format == "json":
        print(rep.to_json())
    else:
        print(rep.to_text())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_ss(args) -> int:
    p = args.p
    _need_p5(p)
    S = supersingular_lambdas(p)
    k = len(S.in_prime_field())
    text = ", ".join(str(x) for x in S) + f" ({k} of {len(S)} in F_p)"
    payload = {"p": p, "lambdas": [str(x) for x in S], "in_prime_field": k, "count": len(S)}
    _emit(args, text, payload)
    return EXIT_OK


def cmd_classnum(args) -> int:
    p = args.p
    _need_p5(p)
    if p % 4 != 3:
        raise UsageError(f"classnum needs p = 3 mod 4, got {p}")
    h = class_number(p)
    k = len(supersingular_lambdas(p).in_prime_field())
    ok = k == 3 * h
    mark = "✓" if ok else "✗"
    text = f"h(-{p}) = {h}; |S ∩ F_p| = {k} {'=' if ok else '!='} 3h {mark}"
    _emit(args, text, {"p": p, "h": h, "ss_in_Fp": k, "check_3h": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_cmlift(args) -> int:
    p = args.p
    _need_p5(p)
    lam0 = args.lam0 % p
    S = supersingular_lambdas(p)
    if Fp2Elem(lam0, 0, p) not in S:
        raise UsageError(f"{lam0} is not a supersingular lambda in F_{p}")
    F = get_modpoly(p, args)
    f = diag_polynomial(F)
    out = []
    lifts = []
    ok = True
    for sign in (1, -1):
        tr = cm_lift_trace(f, p, lam0, args.prec, sign)
        rep = thm3_report(F, tr.value)
        ok &= rep.passed
        lifts.append(tr.value)
        out.append(
            {
                "lift": str(tr.value),
                "newton_steps": tr.steps,
                "residual_valuations": [r / 2 for r in tr.residuals],
                "thm3": rep.passed,
                "v_F": rep.twice_val_F / 2,
                "v_diff": rep.twice_val_diff / 2,
                "v_D_at_least": rep.twice_val_D / 2,
                "unit_F": str(rep.unit_F),
            }
        )
    conj = lifts[0].eq_mod(lifts[1].conjugate(), 2 * args.prec)
    distinct = not lifts[0].eq_mod(lifts[1], 2)
    ok &= conj and distinct
    lines = [f"CM lifts of lambda = {lam0} (p = {p}, precision p^{args.prec}):"]
    for k, o in enumerate(out, 1):
        lines.append(f"  lambda_{k} = {o['lift']}")
        lines.append(f"    Newton steps: {o['newton_steps']}, thm3: {'PASS' if o['thm3'] else 'FAIL'}")
    lines.append(f"  conjugate: {'yes' if conj else 'NO'}; distinct: {'yes' if distinct else 'NO'}")
    lines.append(f"thm3: {'PASS' if ok else 'FAIL'}")
    _emit(args, "\n".join(lines), {"p": p, "lambda0": lam0, "lifts": out, "conjugate": conj, "distinct": distinct, "thm3": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_pairing(args) -> int:
    import random

    p = args.p
    _need_p5(p)
    F = get_modpoly(p, args)
    S = supersingular_lambdas(p)
    rng = random.Random(args.seed) if args.seed is not None else None
    M = build_pairing_matrix(p, F, S, rng)
    lines = [f"pairing matrix p={p}, order: " + ", ".join(str(x) for x in S)]
    lines += ["  " + " ".join(row) for row in M.rows()]
    lines.append(f"signs: {list(M.signs)}")
    lines.append(f"raw signs (vs +p*prod): {list(M.raw_signs)}")
    payload = {
        "p": p,
        "lambdas": [str(x) for x in S],
        "rows": M.rows(),
        "signs": list(M.signs),
        "raw_signs": list(M.raw_signs),
        "symmetric": M.is_symmetric(),
    }
    _emit(args, "\n".join(lines), payload)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", default=None, help=f"modular polynomial cache (env {CACHE_ENV} overrides)")
    common.add_argument("--no-cache", action="store_true", help="always recompute F_p")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for the CRT primes")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lambda-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("modpoly", parents=[common], help="compute and print F_p")
    sp.add_argument("p", type=_prime_arg)
    sp.add_argument("--precision", type=int, default=None, help="series terms (default (p+2)^2+16)")
    sp.set_defaults(func=cmd_modpoly)

    sp = sub.add_parser("verify", parents=[common], help="structural and congruence checks")
    sp.add_argument("p", type=_prime_arg)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("ss", parents=[common], help="supersingular lambda-invariants")
    sp.add_argument("p", type=_prime_arg)
    sp.set_defaults(func=cmd_ss)

    sp = sub.add_parser("classnum", parents=[common], help="h(-p) and the 3h count")
    sp.add_argument("p", type=_prime_arg)
    sp.set_defaults(func=cmd_classnum)

    sp = sub.add_parser("cmlift", parents=[common], help="CM lifts of a supersingular lambda in F_p")
    sp.add_argument("p", type=_prime_arg)
    sp.add_argument("lam0", type=int)
    sp.add_argument("--prec", type=int, default=20)
    sp.set_defaults(func=cmd_cmlift)

    sp = sub.add_parser("pairing", parents=[common], help="residual pairing matrix")
    sp.add_argument("p", type=_prime_arg)
    sp.add_argument("--seed", type=int, default=None, help="randomise the lifts of the diagonal")
    sp.set_defaults(func=cmd_pairing)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if getattr(args, "prec", 20) < 4:
        print("error: --prec must be at least 4", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CacheError, OSError) as exc:
        print(f"cache/environment error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except (TheoremViolation, ModpolyError, PrecisionError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
