"""Scaled range #V_n / a(n) against the Brownian range reference."""
import argparse
import math

from rwrs.experiments import ExperimentConfig, brownian_range_reference, ks_statistic, run_range_experiment

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=100_000)
ap.add_argument("--trials", type=int, default=4000)
ap.add_argument("--seed", type=int, default=42)
args = ap.parse_args()

d = run_range_experiment(ExperimentConfig(trials=args.trials, n_grid=(args.n,), master_seed=args.seed))
ref = brownian_range_reference(args.n, 10_000, 7)
print(f"mean={d.mean():.5f} brownian_mean={math.sqrt(8 / math.pi):.5f} sd={d.sd():.4f}")
print(f"ks_vs_brownian={ks_statistic(d, ref):.4f}")
