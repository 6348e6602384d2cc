"""Penalized MPLE parameter fitting and automatic parameter tying.

Fitting maximizes  pll(theta) - l2_strength * ||theta||^2  (the PLL is the
per-instance mean, so the penalty is on that scale too). Tying quantizes the
fitted weights into c clusters by exact 1-D dynamic programming, then refits
one shared value per cluster.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .dataset import DataSet
from .model import PairwiseModel, pll, pll_gradient

logger = logging.getLogger(__name__)


class FitError(RuntimeError):
    """The fit objective became non-finite."""


@dataclass(frozen=True)
class FitOptions:
    l2_strength: float = 0.1
    max_optimizer_steps: int = 500
    gradient_tolerance: float = 1e-5

    def __post_init__(self):
        if not (np.isfinite(self.l2_strength) and self.l2_strength >= 0):
            raise ValueError(f"l2_strength must be finite and >= 0, got {self.l2_strength}")
        if self.max_optimizer_steps < 1:
            raise ValueError("max_optimizer_steps must be >= 1")
        if not (np.isfinite(self.gradient_tolerance) and self.gradient_tolerance > 0):
            raise ValueError("gradient_tolerance must be positive")


@dataclass(frozen=True, eq=False)
class TyingPartition:
    """Assignment of each parameter to a cluster, plus cluster means.

    ``assignment[j]`` is the cluster id of parameter j (node weights first,
    then edge weights); ``means[a]`` is the representative value of cluster a.
    """

    assignment: np.ndarray
    means: np.ndarray
    n_clusters: int

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64)
        m = np.array(self.means, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("assignment must be a non-empty 1-D array")
        if m.shape != (self.n_clusters,):
            raise ValueError(f"means must have shape ({self.n_clusters},), got {m.shape}")
        if a.min() < 0 or a.max() >= self.n_clusters:
            raise ValueError("cluster ids must lie in [0, n_clusters)")
        if np.unique(a).size != self.n_clusters:
            raise ValueError("every cluster must be non-empty")
        a.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "means", m)

    @property
    def n_params(self) -> int:
        return self.assignment.size

    def expand(self) -> np.ndarray:
        """Per-parameter values implied by the partition."""
        return self.means[self.assignment]

    @classmethod
    def singletons(cls, params: np.ndarray) -> "TyingPartition":
        """One cluster per parameter (tying is vacuous)."""
        params = np.asarray(params, dtype=np.float64)
        return cls(np.arange(params.size), params.copy(), params.size)


def tying_objective(params: np.ndarray, partition: TyingPartition) -> float:
    """Sum of squared distances of parameters to their cluster means."""
    params = np.asarray(params, dtype=np.float64)
    d = params - partition.expand()
    return float(d @ d)


def quantize_params(params: np.ndarray, c: int) -> TyingPartition:
    """Optimal c-cluster quantization of a 1-D parameter vector.

    Minimizes the total squared distance to cluster means exactly: optimal
    clusters are contiguous intervals of the sorted values, found by dynamic
    programming over interval costs. Deterministic; on ties the earliest
    split is preferred.
    """
    params = np.asarray(params, dtype=np.float64).ravel()
    n = params.size
    if n < 1:
        raise ValueError("params must be non-empty")
    if not 1 <= c <= n:
        raise ValueError(f"cluster count must be in [1, {n}], got {c}")
    order = np.argsort(params, kind="stable")
    x = params[order]
    s = np.concatenate([[0.0], np.cumsum(x)])
    q = np.concatenate([[0.0], np.cumsum(x * x)])

    cost = np.full((c + 1, n + 1), np.inf)
    split = np.zeros((c + 1, n + 1), dtype=np.int64)
    cost[0, 0] = 0.0
    for t in range(1, c + 1):
        # j values below t can't host t non-empty clusters
        for j in range(t, n - (c - t) + 1):
            i = np.arange(t - 1, j)
            tot = s[j] - s[i]
            v = cost[t - 1, i] + (q[j] - q[i]) - tot * tot / (j - i)
            arg = int(np.argmin(v))  # first minimum: earliest split wins ties
            cost[t, j] = v[arg]
            split[t, j] = i[arg]
    bounds = [n]
    j = n
    for t in range(c, 0, -1):
        j = int(split[t, j])
        bounds.append(j)
    bounds.reverse()

    assignment = np.empty(n, dtype=np.int64)
    means = np.empty(c)
    for a in range(c):
        lo, hi = bounds[a], bounds[a + 1]
        assignment[order[lo:hi]] = a
        means[a] = (s[hi] - s[lo]) / (hi - lo)
    return TyingPartition(assignment=assignment, means=means, n_clusters=c)


def _maximize(fun_grad, x0: np.ndarray, opts: FitOptions, what: str) -> np.ndarray:
    """Maximize a concave objective with L-BFGS; stationarity to tolerance."""

    def neg(x):
        f, g = fun_grad(x)
        if not np.isfinite(f):
            raise FitError(f"{what}: objective became non-finite")
        return -f, -g

    res = minimize(
        neg,
        x0=np.asarray(x0, dtype=np.float64),
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": opts.max_optimizer_steps,
            "gtol": opts.gradient_tolerance,
            "ftol": 1e-14,
            "maxfun": 100 * opts.max_optimizer_steps,
        },
    )
    grad_inf = float(np.abs(res.jac).max()) if res.jac is not None else np.nan
    if grad_inf >= opts.gradient_tolerance:
        msg = res.message if isinstance(res.message, str) else str(res.message)
        logger.warning(
            "%s stopped with gradient inf-norm %.3g >= tolerance %.3g (%s)",
            what, grad_inf, opts.gradient_tolerance, msg,
        )
    return res.x


def mple_fit(model: PairwiseModel, ds: DataSet, opts: FitOptions = FitOptions()) -> PairwiseModel:
    """Maximize pll - l2 * ||theta||^2 over all weights.

    Starts from the weights carried by ``model`` (pass a zero-weight model
    for a cold start; the pruning loop passes the previous iteration's
    weights to warm-start).
    """
    l2 = opts.l2_strength

    def fun_grad(vec):
        m = model.with_weights(vec)
        f = pll(m, ds) - l2 * float(vec @ vec)
        g = pll_gradient(m, ds) - 2.0 * l2 * vec
        return f, g

    x = _maximize(fun_grad, model.weight_vector(), opts, "MPLE fit")
    return model.with_weights(x)


def tied_fit(
    model: PairwiseModel,
    ds: DataSet,
    partition: TyingPartition,
    opts: FitOptions = FitOptions(),
) -> PairwiseModel:
    """Refit with all parameters in a cluster sharing one value.

    Optimizes pll - l2 * sum_a mu_a^2 over the cluster values; a cluster's
    gradient is the sum of its members' PLL gradients. Starts from the
    partition's means.
    """
    if partition.n_params != model.n_params:
        raise ValueError(
            f"partition covers {partition.n_params} parameters, model has {model.n_params}"
        )
    assign = partition.assignment
    k = partition.n_clusters
    l2 = opts.l2_strength

    def fun_grad(mu):
        m = model.with_weights(mu[assign])
        f = pll(m, ds) - l2 * float(mu @ mu)
        g = np.bincount(assign, weights=pll_gradient(m, ds), minlength=k) - 2.0 * l2 * mu
        return f, g

    mu = _maximize(fun_grad, partition.means, opts, "tied fit")
    return model.with_weights(mu[assign])


def learn_params_with_apt(
    model: PairwiseModel,
    ds: DataSet,
    c: int,
    opts: FitOptions = FitOptions(),
) -> tuple[PairwiseModel, TyingPartition]:
    """Full parameter-learning pipeline: MPLE fit, quantize, tied refit.

    Returns the tied model and the partition; the partition's means are the
    refit shared values, so ``partition.expand()`` reproduces the returned
    model's weights and the model has at most c distinct values.
    """
    fitted = mple_fit(model, ds, opts)
    partition = quantize_params(fitted.weight_vector(), c)
    tied = tied_fit(fitted, ds, partition, opts)
    _, first = np.unique(partition.assignment, return_index=True)
    final = TyingPartition(
        assignment=partition.assignment,
        means=tied.weight_vector()[first],
        n_clusters=partition.n_clusters,
    )
    return tied, final
