"""Load a binary dataset and inspect the sufficient statistics.

Writes a tiny comma-separated data file, loads it, and prints the
deduplicated view plus the single and pairwise counts that every
fitting routine in the package consumes.
"""

import os
import tempfile

import numpy as np

from forced_pruning import DataSet, load_dataset, marginal_count, pair_counts

rng = np.random.default_rng(0)

# Four variables, sixty rows, with variable 1 copying variable 0 most
# of the time so the (0, 1) pair stands out in the counts.
X = (rng.random((60, 4)) < 0.4).astype(np.float64)
copy = rng.random(60) < 0.85
X[copy, 1] = X[copy, 0]

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "toy.train.data")
    with open(path, "w", encoding="ascii") as fh:
        for row in X.astype(int):
            fh.write(",".join(map(str, row)) + "\n")
    data = load_dataset(path)

print(f"loaded {data.n_instances} instances of {data.n_vars} variables "
      f"(name={data.name!r})")

rows, weights = data.compressed()
print(f"deduplicated to {rows.shape[0]} distinct rows; "
      f"largest weight {int(weights.max())}")

print("\nmarginal counts (times each variable is 1):")
for i in range(data.n_vars):
    print(f"  x{i}: {int(marginal_count(data, i))}")

print("\njoint counts n11 (times both variables are 1):")
for i in range(data.n_vars):
    for j in range(i + 1, data.n_vars):
        c = pair_counts(data, i, j)
        print(f"  x{i},x{j}: n11={c.n11:3d}  n10={c.n10:3d}  "
              f"n01={c.n01:3d}  n00={c.n00:3d}")

# The same array can be wrapped directly without touching disk.
direct = DataSet(X, name="in-memory")
assert direct.n_instances == data.n_instances
print("\nin-memory wrapping matches the file round trip")
