"""Empirical tail frequencies of b(n) against their probability bounds."""

import argparse
from pathlib import Path

from lepskij.harness import ExperimentConfig, run_records, tail_table

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=ROOT / "configs" / "config_a.json")
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--levels", default="0,1,3,4,5,6")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    pairs = [(int(n), args.tau) for n in args.levels.split(",")]
    cfg = ExperimentConfig.load(args.config).with_overrides(
        reps=args.reps, workers=args.workers, tail_pairs=pairs)
    for r in tail_table(cfg, run_records(cfg)):
        bound = "n/a" if r.bound is None else f"{r.bound:.4g}"
        print(f"n={r.level} {r.direction:<10} freq={r.frequency:.4f} se={r.se:.4f} "
              f"bound={bound} within={r.within}")


if __name__ == "__main__":
    main()
