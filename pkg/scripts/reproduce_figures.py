#!/usr/bin/env python3
"""Regenerate every figure dataset and the validation report in one go.

Usage: python scripts/reproduce_figures.py [--out OUT_DIR] [--max-n 8]
"""

import argparse
from pathlib import Path

from metrosim.cli import FIGURE_IDS, figure_data, run_validate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("out"))
    parser.add_argument("--max-n", type=int, default=8, help="crosscheck grid size")
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    status = run_validate(json_path=args.out / "validation.json", max_n=args.max_n)
    for fig_id in FIGURE_IDS:
        for path in figure_data(fig_id, args.out):
            print(f"written {path}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
