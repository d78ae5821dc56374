#!/usr/bin/env python3
"""Why few-sample contrastive pairs matter: a timing comparison.

The k-sample loss touches k_p + k_n partners per node; the conventional
full-pairwise loss treats every other node as a negative and scales
quadratically. This reproduces that comparison on random unit embeddings.
"""

from recc import bench_contrastive

sizes = [1000, 2000, 4000, 8000]
report = bench_contrastive(sizes, k_p=2, k_n=1, reps=5, seed=0)

print(f"{'n':>6} {'k-sample (ms)':>14} {'full-pairwise (ms)':>19} {'speedup':>9}")
for r in report.records:
    print(f"{r.n:>6} {r.recc_seconds * 1e3:>14.3f} "
          f"{r.baseline_seconds * 1e3:>19.2f} "
          f"{r.baseline_seconds / r.recc_seconds:>8.0f}x")

recc = [r.recc_seconds for r in report.records]
base = [r.baseline_seconds for r in report.records]
print("\ngrowth per doubling of n:")
for (n1, a1, b1), (n2, a2, b2) in zip(
        zip(sizes, recc, base), zip(sizes[1:], recc[1:], base[1:])):
    print(f"  {n1} -> {n2}: k-sample x{a2 / a1:.2f} (linear-ish), "
          f"full-pairwise x{b2 / b1:.2f} (quadratic-ish)")
