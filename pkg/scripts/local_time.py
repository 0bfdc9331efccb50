"""Minimal scaled local time over a(n)E at n and 4n."""
import argparse

from rwrs.experiments import ExperimentConfig, ks_statistic, local_time_experiment
from rwrs.hyperspace import HyperSet

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=100_000)
ap.add_argument("--trials", type=int, default=2000)
ap.add_argument("--lo", type=float, default=-0.5)
ap.add_argument("--hi", type=float, default=0.5)
args = ap.parse_args()

E = HyperSet.from_intervals([(args.lo, args.hi)])
y1 = local_time_experiment(ExperimentConfig(kind="localtime", trials=args.trials, master_seed=5), E, args.n)
y4 = local_time_experiment(ExperimentConfig(kind="localtime", trials=args.trials, master_seed=6), E, 4 * args.n)
print(f"n: mean={y1.mean():.4f}  4n: mean={y4.mean():.4f}  ks={ks_statistic(y1, y4):.4f}")
