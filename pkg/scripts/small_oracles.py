"""Exact Phi, Q and K on random tiny instances."""
import argparse
from collections import Counter

from rwrs.experiments import small_instance_suite

ap = argparse.ArgumentParser()
ap.add_argument("--count", type=int, default=1000)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

res = small_instance_suite(args.count, args.seed)
print("checks:", dict(Counter(r.kind for r in res)))
bad = [r for r in res if not r.passed]
print("failures:", len(bad))
for r in bad[:10]:
    print(" ", r)
