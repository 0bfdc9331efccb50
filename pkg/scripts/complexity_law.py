"""log2(Phi)/a(n) for uniform and skewed sceneries, compared with the range law."""
import argparse

import numpy as np

from rwrs.experiments import ExperimentConfig, ks_statistic, run_complexity_experiment, run_range_experiment

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=100_000)
ap.add_argument("--trials", type=int, default=2000)
ap.add_argument("--seed", type=int, default=42)
args = ap.parse_args()

eps = (0.1, 0.5)
base = dict(kind="complexity", trials=args.trials, n_grid=(args.n,), epsilons=eps, master_seed=args.seed)
uni = run_complexity_experiment(ExperimentConfig(**base))
skew = run_complexity_experiment(ExperimentConfig(probs=(0.8, 0.2), **base))
rng_ = run_range_experiment(ExperimentConfig(trials=args.trials, n_grid=(args.n,), master_seed=args.seed))
for e in eps:
    ratio = skew.log2_phi[e] / uni.log2_phi[e]
    print(f"eps={e}: ks(uniform, range)={ks_statistic(uni.scaled[e], rng_):.4f} "
          f"skew/uniform median={np.median(ratio):.5f} "
          f"within 0.02 of H={np.mean(np.abs(ratio - 0.72193) <= 0.02):.4f}")
