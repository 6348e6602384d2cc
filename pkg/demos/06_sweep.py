"""Drive the command-line interface end to end on synthetic splits.

Writes train/valid/test files, runs a small sweep over edge budgets and
exchange sizes through the same entry point the ``forced-pruning``
console script uses, then prints the artifacts it produced.
"""

import os
import tempfile

import numpy as np

from forced_pruning import main

rng = np.random.default_rng(5)


def sample_split(n: int) -> np.ndarray:
    X = (rng.random((n, 6)) < 0.5).astype(int)
    agree = rng.random(n) < 0.8
    X[agree, 1] = X[agree, 0]
    agree = rng.random(n) < 0.8
    X[agree, 4] = X[agree, 3]
    return X


def write_split(path: str, X: np.ndarray) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for row in X:
            fh.write(",".join(map(str, row)) + "\n")


with tempfile.TemporaryDirectory() as tmp:
    paths = {s: os.path.join(tmp, f"demo.{s}.data") for s in ("train", "valid", "test")}
    write_split(paths["train"], sample_split(1500))
    write_split(paths["valid"], sample_split(300))
    write_split(paths["test"], sample_split(300))

    out = os.path.join(tmp, "run")
    code = main([
        "--train", paths["train"],
        "--valid", paths["valid"],
        "--test", paths["test"],
        "--sweep", "m=0,3;k=0,2",
        "--max-iter", "5",
        "--out-dir", out,
    ])
    print(f"\nexit code: {code}")

    print("\nartifacts:")
    for name in sorted(os.listdir(out)):
        size = os.path.getsize(os.path.join(out, name))
        print(f"  {name} ({size} bytes)")

    print("\nreport.csv:")
    with open(os.path.join(out, "report.csv"), encoding="ascii") as fh:
        print(fh.read())
