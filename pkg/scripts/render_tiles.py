"""Print tile diagrams for the UPB families."""

import argparse

from upb_locc.families import build_family, render_tiles


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--plain", action="store_true")
    args = ap.parse_args()
    for fam, d in (("paper5x5", None), ("odd", 3), ("odd", 7), ("gentiles", 4), ("gentiles", 6)):
        u = build_family(fam, d)
        print(f"== {fam} d={u.d} ==")
        print(render_tiles(u, plain=args.plain))
        print()


if __name__ == "__main__":
    main()
