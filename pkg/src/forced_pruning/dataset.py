"""Binary datasets and their empirical counts.

Datasets are plain text, one instance per line, comma-separated 0/1 tokens
(the distribution format of the standard density-estimation benchmarks,
e.g. nltcs, plants, msnbc). All variables are strictly binary; anything
else is a load-time error.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class DatasetFormatError(ValueError):
    """A dataset file violates the expected text format."""


class PairCounts(NamedTuple):
    """Joint occurrence counts for one ordered variable pair (i, j).

    ``nab`` counts instances with x_i = a and x_j = b.
    """

    n00: int
    n01: int
    n10: int
    n11: int

    @property
    def total(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11


@dataclass(frozen=True, eq=False)
class DataSet:
    """Immutable table of binary instances.

    Attributes:
        X: (n_instances, n_vars) float64 array with entries 0.0/1.0,
           marked read-only after construction.
        name: label used in reports.
    """

    X: np.ndarray
    name: str = "dataset"
    # (unique rows, multiplicities) cache; exact compression, never observable.
    _compressed: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"instances must form a 2-D array, got ndim={X.ndim}")
        n, v = X.shape
        if v < 2:
            raise ValueError(f"need at least 2 variables, got {v}")
        if n < 1:
            raise ValueError("need at least 1 instance")
        if not ((X == 0.0) | (X == 1.0)).all():
            raise ValueError("instance entries must be 0 or 1")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "_compressed", [])

    @property
    def n_vars(self) -> int:
        return self.X.shape[1]

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def instances(self) -> np.ndarray:
        """Instances as an int array (copy)."""
        return self.X.astype(np.int8)

    def compressed(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique rows and their multiplicities.

        Sums weighted by the multiplicities equal plain sums over instances
        exactly, so per-instance means computed on the compressed form are
        identical up to float summation order. Rows come out in lexicographic
        order, which also makes such means independent of instance order.
        """
        if not self._compressed:
            rows, counts = np.unique(self.X, axis=0, return_counts=True)
            rows.setflags(write=False)
            weights = counts.astype(np.float64)
            weights.setflags(write=False)
            self._compressed.append((rows, weights))
        return self._compressed[0]


_TOKEN = {"0": 0, "1": 1}


def load_dataset(path: str | os.PathLike, name: str | None = None) -> DataSet:
    """Load a comma-separated 0/1 text file into a :class:`DataSet`.

    Raises:
        DatasetFormatError: empty file, ragged line lengths, or any token
            other than "0"/"1"; the message names the offending line.
        OSError: unreadable path.
    """
    path = os.fspath(path)
    buf = bytearray()
    width = None
    n_rows = 0
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                raise DatasetFormatError(f"{path}: line {lineno}: empty line")
            tokens = line.split(",")
            if width is None:
                width = len(tokens)
                if width < 2:
                    raise DatasetFormatError(
                        f"{path}: line 1: need at least 2 variables per instance, got {width}"
                    )
            elif len(tokens) != width:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected {width} values, got {len(tokens)}"
                )
            try:
                buf.extend(_TOKEN[t] for t in tokens)
            except KeyError:
                bad = next(t for t in tokens if t not in _TOKEN)
                raise DatasetFormatError(
                    f"{path}: line {lineno}: invalid token {bad!r} (expected 0 or 1)"
                ) from None
            n_rows += 1
    if n_rows == 0:
        raise DatasetFormatError(f"{path}: empty file")
    X = np.frombuffer(bytes(buf), dtype=np.uint8).reshape(n_rows, width)
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return DataSet(X=X.astype(np.float64), name=name)


def _check_index(ds: DataSet, i: int) -> None:
    if not 0 <= i < ds.n_vars:
        raise IndexError(f"variable index {i} out of range [0, {ds.n_vars})")


def pair_counts(ds: DataSet, i: int, j: int) -> PairCounts:
    """Exact joint counts of (x_i, x_j) over all instances."""
    _check_index(ds, i)
    _check_index(ds, j)
    if i == j:
        raise ValueError(f"pair requires two distinct variables, got ({i}, {j})")
    xi = ds.X[:, i]
    xj = ds.X[:, j]
    n11 = int(xi @ xj)
    n10 = int(xi.sum()) - n11
    n01 = int(xj.sum()) - n11
    n00 = ds.n_instances - n11 - n10 - n01
    return PairCounts(n00=n00, n01=n01, n10=n10, n11=n11)


def marginal_count(ds: DataSet, i: int) -> int:
    """Number of instances with x_i = 1."""
    _check_index(ds, i)
    return int(ds.X[:, i].sum())
