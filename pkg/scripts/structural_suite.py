"""Compute F_p for a range of primes and tabulate the structural checks.

    python3 scripts/structural_suite.py --max-p 31 --cache-dir .cache
"""

import argparse
import time
from dataclasses import dataclass

from lambda_lab.cache import cache_file, cache_load, cache_store
from lambda_lab.modpoly import (
    SolverOptions,
    compute_modpoly,
    diag_polynomial,
    is_prime,
    r_polynomial,
    verify_degrees,
    verify_kronecker,
    verify_symmetry,
)


@dataclass
class SuiteConfig:
    min_p: int = 3
    max_p: int = 31
    cache_dir: str | None = None
    jobs: int = 1


def load_or_compute(p, cfg):
    if cfg.cache_dir and cache_file(p, cfg.cache_dir).exists():
        return cache_load(p, cfg.cache_dir), 0.0
    t0 = time.perf_counter()
    F = compute_modpoly(p, SolverOptions(jobs=cfg.jobs))
    elapsed = time.perf_counter() - t0
    if cfg.cache_dir:
        cache_store(F, cfg.cache_dir)
    return F, elapsed


def run(cfg: SuiteConfig) -> bool:
    print(f"{'p':>3} {'terms':>6} {'max bits':>8} {'sym':>4} {'kron':>4} {'deg':>4} {'diag':>4} {'R':>4} {'time':>8}")
    ok_all = True
    for p in range(max(3, cfg.min_p), cfg.max_p + 1):
        if not is_prime(p):
            continue
        F, elapsed = load_or_compute(p, cfg)
        checks = [verify_symmetry(F), verify_kronecker(F), verify_degrees(F)]
        try:
            diag_polynomial(F)
            checks.append(True)
        except ArithmeticError:
            checks.append(False)
        try:
            deg_r = r_polynomial(F).degree
            checks.append(True)
        except ArithmeticError:
            deg_r = None
            checks.append(False)
        bits = max(abs(c).bit_length() for c in F.coeffs.values())
        marks = " ".join(f"{'ok' if c else 'FAIL':>4}" for c in checks)
        print(f"{p:>3} {len(F):>6} {bits:>8} {marks} {elapsed:>7.2f}s   deg R = {deg_r}")
        ok_all &= all(checks)
    return ok_all


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-p", type=int, default=3)
    ap.add_argument("--max-p", type=int, default=31)
    ap.add_argument("--cache-dir", default=None)
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args()
    cfg = SuiteConfig(a.min_p, a.max_p, a.cache_dir, a.jobs)
    raise SystemExit(0 if run(cfg) else 1)


if __name__ == "__main__":
    main()
