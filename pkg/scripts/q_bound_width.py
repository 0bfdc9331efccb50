"""Rate of the ball-count bound on Q and the per-trial sandwich width."""
import argparse

import numpy as np

from rwrs.complexity import q_upper_bound
from rwrs.experiments import ExperimentConfig, sandwich_width_experiment

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=100_000)
ap.add_argument("--trials", type=int, default=200)
ap.add_argument("--kappa", type=int, default=14)
ap.add_argument("--epsilon", type=float, default=0.01)
args = ap.parse_args()

for n in (10**3, 10**4, 10**5, 10**6):
    print(f"n={n:>8d} log2 Q/n at eps=1e-3: {q_upper_bound(n, 1e-3, 2) / n:.5f}")
w = sandwich_width_experiment(ExperimentConfig(trials=args.trials, n_grid=(args.n,), epsilons=(args.epsilon,),
                                               master_seed=9), args.kappa)
print(f"on_event={w.on_event:.3f} median_width={w.median_width:.4f} "
      f"max_width={np.max(w.widths) if w.widths.size else float('nan'):.4f}")
