"""Log-log slope of median log2 Phi versus n."""
import argparse

from rwrs.experiments import ExperimentConfig, edim_pipeline

ap = argparse.ArgumentParser()
ap.add_argument("--trials", type=int, default=500)
ap.add_argument("--seed", type=int, default=1)
ap.add_argument("--kmin", type=int, default=12)
ap.add_argument("--kmax", type=int, default=17)
args = ap.parse_args()

grid = tuple(2**k for k in range(args.kmin, args.kmax + 1))
for family, alpha in (("lazy", 2.0), ("pareto", 1.5)):
    res = edim_pipeline(ExperimentConfig(kind="edim", family=family, alpha=alpha, trials=args.trials,
                                         n_grid=grid, master_seed=args.seed))
    print(f"{family} alpha={alpha}: slope={res.slope:.4f} target={1 / alpha:.4f}")
    for n, m in res.points:
        print(f"  n={n:>7d} median_log2_phi={m:.1f}")
