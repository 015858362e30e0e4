"""Monte Carlo run of fast balancing under config A; prints the summary."""

import argparse
import json
from pathlib import Path

from lepskij.harness import ExperimentConfig, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=ROOT / "configs" / "config_a.json")
    ap.add_argument("--reps", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--rho", choices=["analytic-stochastic", "deterministic", "split-estimate"])
    args = ap.parse_args()
    cfg = ExperimentConfig.load(args.config).with_overrides(
        reps=args.reps, workers=args.workers, rho_mode=args.rho)
    s = run_experiment(cfg)
    print(f"C = {s.mean_ratio:.4f} +- {s.ratio_se:.4f} ({s.reps} reps, n_opt = {s.n_opt})")
    print("n_fb histogram:", {k: v for k, v in s.histogram.items() if v})
    print(f"outliers {s.outlier_count}, cost violations {s.cost_violations}, "
          f"mean evaluations {s.mean_evaluations:.2f}")
    print("conditions:", json.dumps(s.conditions))


if __name__ == "__main__":
    main()
