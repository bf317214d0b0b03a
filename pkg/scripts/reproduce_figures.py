#!/usr/bin/env python3
"""Run every figure preset and write one CSV per preset.

    python3 scripts/reproduce_figures.py --trials 20000 --out results/

Full-size runs (the 100000-trial default) of the discovery presets take a
while on one core; ``--workers`` spreads trials over processes without
changing the output.
"""

import argparse
import logging
import pathlib
import time

from d2d_underlay.experiments import PRESETS, emit_csv, preset, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("presets", nargs="*", default=list(PRESETS))
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.presets:
        t0 = time.perf_counter()
        rows = run_sweep(preset(name, trials=args.trials, seed=args.seed), workers=args.workers)
        emit_csv(rows, out / f"{name}.csv")
        print(f"{name}: {len(rows)} rows in {time.perf_counter() - t0:.1f}s -> {out / (name + '.csv')}")


if __name__ == "__main__":
    main()
