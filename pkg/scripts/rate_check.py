"""Slope of the minimal expected error against delta, with optional Monte Carlo C per delta."""

import argparse
from pathlib import Path

from lepskij.harness import ExperimentConfig, loglog_slope, sweep

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=ROOT / "configs" / "config_a.json")
    ap.add_argument("--deltas", default="1e-5,1e-6,1e-7,1e-8,1e-9")
    ap.add_argument("--mc", action="store_true", help="also run the Monte Carlo per delta")
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()
    deltas = [float(d) for d in args.deltas.split(",")]
    cfg = ExperimentConfig.load(args.config).with_overrides(reps=args.reps)
    rows = sweep(cfg, deltas, run_mc=args.mc)
    for r in rows:
        extra = f"  C={r['mean_ratio']:.3f}" if "mean_ratio" in r else ""
        print(f"delta={r['delta']:.0e}  n_opt={r['n_opt']}  "
              f"min E err^2={r['min_expected_err_sq']:.4g}{extra}")
    p = cfg.params
    predicted = 2 * (2 * p.gamma - 1) / (2 * p.gamma + 2 * p.lam + 2 * p.epsilon)
    slope = loglog_slope(deltas, [r["min_expected_err_sq"] for r in rows])
    print(f"slope {slope:.4f} (predicted {predicted:.4f})")


if __name__ == "__main__":
    main()
