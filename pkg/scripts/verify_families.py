"""Check orthogonality, unextendibility and complement PPT for each family."""

import argparse
import time

from upb_locc.families import build_family
from upb_locc.verify import (
    SearchTooLarge,
    check_orthogonality,
    check_ppt,
    check_unextendible,
    normalized_complement,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mode", choices=["auto", "exhaustive", "branch_and_bound"], default="auto")
    args = ap.parse_args()

    cases = [("paper5x5", None)] + [("odd", d) for d in (3, 5, 7, 9)] + [("gentiles", d) for d in (4, 6, 8)]
    print(f"{'family':<9} {'d':>3} {'N':>4} {'orth':>5} {'unextendible':<28} {'rank':>5} {'min eig PT':>11}")
    for fam, d in cases:
        u = build_family(fam, d)
        orth = check_orthogonality(u)
        mode = args.mode if args.mode != "auto" else ("exhaustive" if len(u) <= 22 else "branch_and_bound")
        t0 = time.perf_counter()
        try:
            res = check_unextendible(u, mode)
            ext = f"{res.unextendible} ({mode[:6]}, {time.perf_counter() - t0:.2f}s)"
        except SearchTooLarge:
            ext = f"skipped (N={len(u)})"
        rho, rank = normalized_complement(u)
        lam, _ = check_ppt(rho, ["A"])
        print(f"{fam:<9} {u.d:>3} {len(u):>4} {str(orth.ok):>5} {ext:<28} {rank:>5} {lam:>11.2e}")


if __name__ == "__main__":
    main()
