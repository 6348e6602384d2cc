"""Chow-Liu initial structure: maximum mutual-information spanning tree."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .dataset import DataSet, pair_counts
from .model import Edge


class WeightedEdge(NamedTuple):
    edge: Edge
    weight: float  # mutual information, nats


def _mi_from_counts(n00: int, n01: int, n10: int, n11: int) -> float:
    """Empirical MI of a 2x2 table, 0*log(0/q) := 0, clamped at 0."""
    n = n00 + n01 + n10 + n11
    cells = ((n00, n00 + n01, n00 + n10), (n01, n00 + n01, n01 + n11),
             (n10, n10 + n11, n00 + n10), (n11, n10 + n11, n01 + n11))
    mi = 0.0
    for cell, row, col in cells:
        if cell > 0:
            mi += (cell / n) * math.log(cell * n / (row * col))
    return max(mi, 0.0)


def mutual_information(ds: DataSet, i: int, j: int) -> float:
    """MI of the empirical joint of (X_i, X_j), in nats. Symmetric in (i, j)."""
    c = pair_counts(ds, i, j)
    return _mi_from_counts(c.n00, c.n01, c.n10, c.n11)


def mutual_information_matrix(ds: DataSet) -> np.ndarray:
    """Symmetric (n_vars, n_vars) matrix of pairwise MI, zero diagonal."""
    X = ds.X
    n = ds.n_instances
    ones = X.sum(axis=0)
    joint11 = X.T @ X
    v = ds.n_vars
    M = np.zeros((v, v))
    for i in range(v):
        for j in range(i + 1, v):
            n11 = int(joint11[i, j])
            n10 = int(ones[i]) - n11
            n01 = int(ones[j]) - n11
            n00 = n - n11 - n10 - n01
            M[i, j] = M[j, i] = _mi_from_counts(n00, n01, n10, n11)
    return M


def weighted_edges(ds: DataSet) -> list[WeightedEdge]:
    """All complete-graph edges with MI weights, best first.

    Sorted by descending weight, ties in lexicographic (lo, hi) order.
    """
    v = ds.n_vars
    M = mutual_information_matrix(ds)
    return sorted(
        (WeightedEdge(Edge(i, j), M[i, j]) for i in range(v) for j in range(i + 1, v)),
        key=lambda we: (-we.weight, we.edge),
    )


def chow_liu_tree(ds: DataSet) -> list[Edge]:
    """Maximum-weight spanning tree under empirical MI edge weights.

    Greedy edge-sorting construction; equal-weight edges are taken in
    lexicographic (lo, hi) order, so the result is deterministic. Returns
    the n_vars - 1 tree edges sorted lexicographically.
    """
    v = ds.n_vars
    ranked = weighted_edges(ds)
    parent = list(range(v))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree: list[Edge] = []
    for e, _ in ranked:
        ra, rb = find(e.lo), find(e.hi)
        if ra != rb:
            parent[ra] = rb
            tree.append(e)
            if len(tree) == v - 1:
                break
    return sorted(tree)
