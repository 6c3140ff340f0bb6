"""Run every figure preset and write one CSV per preset.

Usage: python3 scripts/reproduce_figures.py [outdir] [--only fig5,fig6] [--jobs N]
"""

import argparse
import pathlib
import time

from rabiqpt.sweep import PRESETS, export_table, figure_preset, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", nargs="?", default="figures")
    ap.add_argument("--only", help="comma-separated preset names")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    names = args.only.split(",") if args.only else PRESETS
    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        t0 = time.perf_counter()
        res = run_sweep(figure_preset(name), jobs=args.jobs)
        export_table(res, "csv", out / f"{name}.csv")
        print(f"{name:7s} {len(res.rows):6d} rows  {time.perf_counter() - t0:6.1f}s")


if __name__ == "__main__":
    main()
