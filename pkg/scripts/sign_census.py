"""Census of the signs relating Rbar(lambda_i) to the product over the other
supersingular lambdas, plus the CM-lift comparison for p = 3 mod 4.

    python3 scripts/sign_census.py --max-p 23 --cache-dir .cache
"""

import argparse
from collections import Counter
from dataclasses import dataclass

from lambda_lab.cache import cache_file, cache_load, cache_store
from lambda_lab.finitefield import FpPoly, rbar_signs, evaluate_rbar, sign_is_forced, supersingular_lambdas
from lambda_lab.modpoly import compute_modpoly, diag_polynomial, is_prime, r_polynomial
from lambda_lab.padic import class_number, cm_lift, thm3_report


@dataclass
class CensusConfig:
    max_p: int = 23
    cache_dir: str | None = None
    lift_precision: int = 20


def modpoly(p, cache_dir):
    if cache_dir and cache_file(p, cache_dir).exists():
        return cache_load(p, cache_dir)
    F = compute_modpoly(p)
    if cache_dir:
        cache_store(F, cache_dir)
    return F


def census(cfg: CensusConfig):
    tally = Counter()
    for p in range(5, cfg.max_p + 1):
        if not is_prime(p):
            continue
        F = modpoly(p, cfg.cache_dir)
        Rbar = FpPoly.from_int_poly(r_polynomial(F), p)
        S = supersingular_lambdas(p)
        signs = rbar_signs(p, Rbar, S)
        for li, s in zip(S, signs):
            tally[("forced" if sign_is_forced(p, li) else "unforced", s)] += 1
        line = f"p={p:>3}  |S|={len(S):>2}  signs={''.join('+' if s > 0 else '-' for s in signs)}"
        if p % 4 == 3:
            f = diag_polynomial(F)
            agree = 0
            rational = S.in_prime_field()
            for lam0 in rational:
                rep = thm3_report(F, cm_lift(f, p, lam0.a, cfg.lift_precision))
                agree += rep.passed and rep.unit_square.unit == evaluate_rbar(Rbar, lam0)
            line += f"  h={class_number(p)}  |S cap F_p|={len(rational)}  lift/Rbar agree {agree}/{len(rational)}"
        print(line)
    print("tally:", dict(tally))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-p", type=int, default=23)
    ap.add_argument("--cache-dir", default=None)
    ap.add_argument("--lift-precision", type=int, default=20)
    a = ap.parse_args()
    census(CensusConfig(a.max_p, a.cache_dir, a.lift_precision))


if __name__ == "__main__":
    main()
