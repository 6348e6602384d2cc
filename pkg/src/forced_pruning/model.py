"""Log-linear binary pairwise Markov network and its pseudo-log-likelihood.

The model carries one weight per node (indicator x_i = 1) and one weight per
active edge (indicator x_i * x_j = 1), all in nats. The joint normalizer is
never computed; every operation here works through the per-variable
conditionals, which the normalizer cancels out of.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.special import expit

from .dataset import DataSet


class Edge(NamedTuple):
    """Unordered variable pair in canonical (lo < hi) form."""

    lo: int
    hi: int


def canonical_edge(i: int, j: int) -> Edge:
    """Edge between i and j with endpoints in canonical order."""
    if i == j:
        raise ValueError(f"edge endpoints must differ, got ({i}, {j})")
    return Edge(i, j) if i < j else Edge(j, i)


def complete_edges(n_vars: int) -> list[Edge]:
    """All C(n_vars, 2) edges of the complete graph, lexicographic."""
    return [Edge(i, j) for i in range(n_vars) for j in range(i + 1, n_vars)]


@dataclass(frozen=True, eq=False)
class PairwiseModel:
    """Binary pairwise Markov network in log-linear form.

    Attributes:
        n_vars: number of variables.
        node_weights: (n_vars,) float64, weight of indicator x_i = 1.
        edges: active edges, distinct and canonical.
        edge_weights: (len(edges),) float64, aligned with ``edges``.
    """

    n_vars: int
    node_weights: np.ndarray
    edges: tuple[Edge, ...]
    edge_weights: np.ndarray

    def __post_init__(self):
        nw = np.array(self.node_weights, dtype=np.float64)
        ew = np.array(self.edge_weights, dtype=np.float64)
        edges = tuple(Edge(int(e[0]), int(e[1])) for e in self.edges)
        if self.n_vars < 1:
            raise ValueError("n_vars must be positive")
        if nw.shape != (self.n_vars,):
            raise ValueError(
                f"node_weights must have shape ({self.n_vars},), got {nw.shape}"
            )
        if ew.shape != (len(edges),):
            raise ValueError(
                f"edge_weights must have shape ({len(edges)},), got {ew.shape}"
            )
        if not (np.isfinite(nw).all() and np.isfinite(ew).all()):
            raise ValueError("all weights must be finite")
        seen = set()
        for e in edges:
            if not (0 <= e.lo < e.hi < self.n_vars):
                raise ValueError(f"edge {e} is not canonical for {self.n_vars} variables")
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        nw.setflags(write=False)
        ew.setflags(write=False)
        object.__setattr__(self, "node_weights", nw)
        object.__setattr__(self, "edge_weights", ew)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def zeros(cls, n_vars: int, edges: Iterable[Edge] = ()) -> "PairwiseModel":
        """Model with the given structure and all weights zero."""
        edges = tuple(edges)
        return cls(n_vars, np.zeros(n_vars), edges, np.zeros(len(edges)))

    @property
    def n_params(self) -> int:
        return self.n_vars + len(self.edges)

    def weight_vector(self) -> np.ndarray:
        """Node weights followed by edge weights, as one flat copy."""
        return np.concatenate([self.node_weights, self.edge_weights])

    def with_weights(self, vec: np.ndarray) -> "PairwiseModel":
        """Same structure, weights replaced by the flat vector ``vec``."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} weights, got {vec.shape}")
        return PairwiseModel(self.n_vars, vec[: self.n_vars], self.edges, vec[self.n_vars :])

    def edge_weight(self, e: Edge) -> float:
        idx = self.edge_index(e)
        return float(self.edge_weights[idx])

    def edge_index(self, e: Edge) -> int:
        try:
            return self.edges.index(Edge(*e))
        except ValueError:
            raise ValueError(f"edge {tuple(e)} is not active") from None

    def weight_matrix(self) -> np.ndarray:
        """Dense symmetric (n_vars, n_vars) edge-weight matrix, zero diagonal."""
        W = np.zeros((self.n_vars, self.n_vars))
        for (lo, hi), w in zip(self.edges, self.edge_weights):
            W[lo, hi] = w
            W[hi, lo] = w
        return W


def _check_dims(model: PairwiseModel, ds: DataSet) -> None:
    if ds.n_vars != model.n_vars:
        raise ValueError(
            f"dataset has {ds.n_vars} variables, model has {model.n_vars}"
        )


def logits(model: PairwiseModel, X: np.ndarray) -> np.ndarray:
    """Per-variable conditional logits for each row of X.

    Entry (n, i) is the log-odds of X_i = 1 given the rest of row n.
    """
    return X @ model.weight_matrix() + model.node_weights


def conditional_prob(model: PairwiseModel, x: np.ndarray, i: int) -> float:
    """P(X_i = 1 | rest of x) under the model."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_vars,):
        raise ValueError(f"x must have length {model.n_vars}, got shape {x.shape}")
    if not ((x == 0.0) | (x == 1.0)).all():
        raise ValueError("x entries must be 0 or 1")
    if not 0 <= i < model.n_vars:
        raise IndexError(f"variable index {i} out of range [0, {model.n_vars})")
    z = model.node_weights[i]
    for (lo, hi), w in zip(model.edges, model.edge_weights):
        if lo == i:
            z += w * x[hi]
        elif hi == i:
            z += w * x[lo]
    return float(expit(z))


def _log_conditionals(X: np.ndarray, A: np.ndarray) -> np.ndarray:
    """log P(x_i | rest) entrywise: log sigma(t * z) with t = 2x - 1."""
    T = 2.0 * X - 1.0
    return -np.logaddexp(0.0, -T * A)


def per_variable_pll_sums(model: PairwiseModel, ds: DataSet) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Building blocks for incremental PLL evaluation.

    Returns (rows, weights, A, col_sums) where rows/weights are the
    compressed instances, A the logit matrix on the rows, and col_sums[i]
    the multiplicity-weighted sum over rows of log P(x_i | rest); the full
    PLL is col_sums.sum() / n_instances.
    """
    _check_dims(model, ds)
    rows, weights = ds.compressed()
    A = logits(model, rows)
    col_sums = weights @ _log_conditionals(rows, A)
    return rows, weights, A, col_sums


def pll(model: PairwiseModel, ds: DataSet) -> float:
    """Mean per-instance pseudo-log-likelihood in nats (<= 0)."""
    _, _, _, col_sums = per_variable_pll_sums(model, ds)
    return float(col_sums.sum() / ds.n_instances)


def pll_gradient(model: PairwiseModel, ds: DataSet) -> np.ndarray:
    """Exact gradient of :func:`pll` over (node_weights ++ edge_weights)."""
    _check_dims(model, ds)
    rows, weights = ds.compressed()
    N = ds.n_instances
    A = logits(model, rows)
    resid = weights[:, None] * (rows - expit(A))
    g_node = resid.sum(axis=0) / N
    G = rows.T @ resid
    g_edge = np.array([(G[lo, hi] + G[hi, lo]) / N for lo, hi in model.edges])
    return np.concatenate([g_node, g_edge])


def pll_without_edges(model: PairwiseModel, ds: DataSet, drop: Iterable[Edge]) -> float:
    """PLL of the model with the weights of ``drop`` set to zero.

    Equivalent to rebuilding the model with those weights zeroed; computed
    incrementally because only the endpoints' conditionals change.
    """
    drop = [Edge(*e) for e in drop]
    rows, weights, A, col_sums = per_variable_pll_sums(model, ds)
    return _pll_without_edges_from_base(model, ds, drop, rows, weights, A, col_sums)


def _pll_without_edges_from_base(
    model: PairwiseModel,
    ds: DataSet,
    drop: list[Edge],
    rows: np.ndarray,
    weights: np.ndarray,
    A: np.ndarray,
    col_sums: np.ndarray,
) -> float:
    """Incremental core of :func:`pll_without_edges` reusing base terms."""
    touched: dict[int, np.ndarray] = {}
    for e in drop:
        w = model.edge_weight(e)
        for var, other in ((e.lo, e.hi), (e.hi, e.lo)):
            col = touched.get(var, A[:, var])
            touched[var] = col - w * rows[:, other]
    total = col_sums.sum()
    for var, col in touched.items():
        t = 2.0 * rows[:, var] - 1.0
        new_sum = weights @ (-np.logaddexp(0.0, -t * col))
        total += new_sum - col_sums[var]
    return float(total / ds.n_instances)


def pll_delta_without_edge(model: PairwiseModel, ds: DataSet, e: Edge) -> float:
    """pll(model) - pll(model with the weight of ``e`` zeroed).

    Positive when the edge helps; equals the full recomputation to within
    float summation error (only the endpoints' conditionals change).
    """
    rows, weights, A, _ = per_variable_pll_sums(model, ds)
    return _edge_delta_from_base(model, Edge(*e), rows, weights, A, ds.n_instances)


def _edge_delta_from_base(
    model: PairwiseModel,
    e: Edge,
    rows: np.ndarray,
    weights: np.ndarray,
    A: np.ndarray,
    n_instances: int,
) -> float:
    """Core of :func:`pll_delta_without_edge` reusing precomputed logits."""
    w = model.edge_weight(e)  # raises if inactive
    delta = 0.0
    for var, other in ((e.lo, e.hi), (e.hi, e.lo)):
        mask = rows[:, other] == 1.0
        if not mask.any():
            continue
        t = 2.0 * rows[mask, var] - 1.0
        z = A[mask, var]
        wts = weights[mask]
        before = wts @ (-np.logaddexp(0.0, -t * z))
        after = wts @ (-np.logaddexp(0.0, -t * (z - w)))
        delta += before - after
    return float(delta / n_instances)
