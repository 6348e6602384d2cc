"""Structure learning under a hard edge budget by edge exchange.

The learner keeps exactly M = n_vars - 1 + extra_edges edges active at all
times. It starts from the Chow-Liu tree plus random extra edges, then
repeatedly refits parameters (with tying), drops the k weakest edges, and
adds the k most promising edges from the inactive pool.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .chowliu import chow_liu_tree
from .dataset import DataSet
from .model import (
    Edge,
    PairwiseModel,
    _edge_delta_from_base,
    _pll_without_edges_from_base,
    complete_edges,
    logits,
    per_variable_pll_sums,
    pll,
)
from .param_learn import FitOptions, TyingPartition, learn_params_with_apt

logger = logging.getLogger(__name__)

HEURISTICS = ("greedy", "rejection")


@dataclass(frozen=True)
class PruningConfig:
    """Settings for :func:`forced_pruning`.

    ``extra_edges`` is the count beyond the spanning tree, so the edge
    budget is M = n_vars - 1 + extra_edges; ``exchange_size`` is the number
    of edges swapped out and in per iteration.
    """

    extra_edges: int = 0
    exchange_size: int = 5
    heuristic: str = "greedy"
    max_iter: int = 30
    seed: int = 0
    apt_clusters: int = 16
    fit: FitOptions = field(default_factory=FitOptions)
    rejection_cap: int = 10000

    def __post_init__(self):
        if self.extra_edges < 0:
            raise ValueError("extra_edges must be >= 0")
        if self.exchange_size < 0:
            raise ValueError("exchange_size must be >= 0")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"heuristic must be one of {HEURISTICS}, got {self.heuristic!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.apt_clusters < 1:
            raise ValueError("apt_clusters must be >= 1")
        if self.rejection_cap < 1:
            raise ValueError("rejection_cap must be >= 1")


class EdgeScore(NamedTuple):
    edge: Edge
    delta: float


class IterationRecord(NamedTuple):
    """What one exchange iteration did."""

    iteration: int
    train_neg_pll: float
    deleted: tuple[Edge, ...]
    added: tuple[Edge, ...]
    proposals: int
    fell_back: bool
    active_edges: tuple[Edge, ...]
    pool_edges: tuple[Edge, ...]
    seconds: float


@dataclass(frozen=True)
class PruningResult:
    """Best model found, its tying partition, and the full iteration log."""

    model: PairwiseModel
    partition: TyingPartition
    iterations: tuple[IterationRecord, ...]
    best_iteration: int


class RejectionOutcome(NamedTuple):
    edges: frozenset[Edge]
    proposals: int
    fell_back: bool


def edge_deletion_scores(model: PairwiseModel, ds: DataSet) -> list[EdgeScore]:
    """PLL contribution of each active edge, worst first.

    The score of edge e is pll(model) - pll(model with e's weight zeroed);
    ties are broken lexicographically by edge.
    """
    if not model.edges:
        raise ValueError("model has no active edges to score")
    rows, weights, A, _ = per_variable_pll_sums(model, ds)
    scores = [
        EdgeScore(e, _edge_delta_from_base(model, e, rows, weights, A, ds.n_instances))
        for e in model.edges
    ]
    scores.sort(key=lambda s: (s.delta, s.edge))
    return scores


def greedy_delete(model: PairwiseModel, ds: DataSet, k: int) -> set[Edge]:
    """The k active edges whose removal costs the least PLL."""
    if not 0 <= k <= len(model.edges):
        raise ValueError(f"k must be in [0, {len(model.edges)}], got {k}")
    if k == 0:
        return set()
    return {s.edge for s in edge_deletion_scores(model, ds)[:k]}


def _draw_subset(items: Sequence, k: int, rng: np.random.Generator) -> list:
    """Uniform random k-subset via partial shuffling."""
    pool = list(items)
    n = len(pool)
    for i in range(k):
        j = i + int(rng.integers(n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def rejection_sample_delete(
    model: PairwiseModel,
    ds: DataSet,
    k: int,
    rng: np.random.Generator,
    cap: int = 10000,
) -> RejectionOutcome:
    """Sample a k-subset S of active edges with probability ∝ exp(pll without S).

    Proposes uniform k-subsets and accepts a proposal S iff u <= exp(pll of
    the model with S's weights zeroed), u ~ Uniform(0, 1). The constant-1
    envelope is valid because the mean per-instance PLL is never positive.
    If ``cap`` proposals are all rejected, falls back to the greedy choice
    and flags it in the outcome.
    """
    if not 0 <= k <= len(model.edges):
        raise ValueError(f"k must be in [0, {len(model.edges)}], got {k}")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if k == 0:
        return RejectionOutcome(frozenset(), 0, False)
    edges = sorted(model.edges)
    rows, weights, A, col_sums = per_variable_pll_sums(model, ds)
    for proposals in range(1, cap + 1):
        subset = _draw_subset(edges, k, rng)
        u = rng.random()
        score = _pll_without_edges_from_base(model, ds, subset, rows, weights, A, col_sums)
        if u <= np.exp(score):
            return RejectionOutcome(frozenset(subset), proposals, False)
    logger.info("no proposal accepted within cap %d, falling back to greedy deletion", cap)
    return RejectionOutcome(frozenset(greedy_delete(model, ds, k)), cap, True)


def greedy_add(
    model: PairwiseModel,
    ds: DataSet,
    candidates: Iterable[Edge],
    k: int,
    opts: FitOptions = FitOptions(),
) -> list[tuple[Edge, float]]:
    """The k inactive edges whose addition gains the most PLL.

    Each candidate's gain is max over a single scalar weight w of
    pll(model + candidate at w) - pll(model), all existing weights frozen;
    the maximization is a bounded 1-D search. Gains are >= 0 because w = 0
    recovers the unmodified model. Returns (edge, gain) pairs sorted by
    descending gain, ties lexicographic.
    """
    candidates = sorted(Edge(*e) for e in candidates)
    if not 0 <= k <= len(candidates):
        raise ValueError(f"k must be in [0, {len(candidates)}], got {k}")
    if k == 0:
        return []
    active = set(model.edges)
    for e in candidates:
        if e in active:
            raise ValueError(f"candidate {tuple(e)} is already active")
    rows, weights = ds.compressed()
    N = ds.n_instances
    A = logits(model, rows)
    T = 2.0 * rows - 1.0
    ones = [np.flatnonzero(rows[:, v] == 1.0) for v in range(model.n_vars)]

    scored = []
    for e in candidates:
        # only the endpoints' conditionals change, and only in rows where
        # the other endpoint is 1
        parts = []
        for var, other in ((e.lo, e.hi), (e.hi, e.lo)):
            idx = ones[other]
            if idx.size:
                parts.append((T[idx, var], A[idx, var], weights[idx]))
        if not parts:
            scored.append((e, 0.0))
            continue
        base = sum(wts @ (-np.logaddexp(0.0, -t * z)) for t, z, wts in parts)

        def neg_gain(w):
            new = sum(wts @ (-np.logaddexp(0.0, -t * (z + w))) for t, z, wts in parts)
            return -(new - base) / N

        res = minimize_scalar(neg_gain, bounds=(-30.0, 30.0), method="bounded",
                              options={"xatol": 1e-6})
        scored.append((e, max(0.0, -float(res.fun))))
    scored.sort(key=lambda s: (-s[1], s[0]))
    return scored[:k]


def forced_pruning(train: DataSet, config: PruningConfig) -> PruningResult:
    """Learn a pairwise model of exactly M edges by iterative edge exchange.

    Starts from the Chow-Liu tree plus ``extra_edges`` edges drawn uniformly
    at random from the remaining pairs (seeded). Each iteration refits the
    parameters with tying (warm-started from the surviving weights), removes
    ``exchange_size`` edges by the configured heuristic, and adds the same
    number of edges greedily from the inactive pool. The active set and the
    pool partition the complete edge set throughout. Returns the iteration
    with the lowest training negative PLL.
    """
    V = train.n_vars
    all_edges = complete_edges(V)
    M = V - 1 + config.extra_edges
    k = config.exchange_size
    if M > len(all_edges):
        raise ValueError(
            f"budget {M} exceeds the {len(all_edges)} edges of the complete graph"
        )
    if k > M:
        raise ValueError(f"exchange_size {k} exceeds the edge budget {M}")
    if k > len(all_edges) - M:
        raise ValueError(
            f"exchange_size {k} exceeds the {len(all_edges) - M} inactive edges"
        )

    rng = np.random.default_rng(config.seed)
    tree = chow_liu_tree(train)
    pool = sorted(set(all_edges) - set(tree))
    extra = _draw_subset(pool, M - len(tree), rng)
    active = sorted(tree + extra)
    pool = sorted(set(pool) - set(extra))

    model = PairwiseModel.zeros(V, active)
    c = min(config.apt_clusters, model.n_params)
    best = None
    records = []
    for it in range(1, config.max_iter + 1):
        t0 = time.perf_counter()
        model, partition = learn_params_with_apt(model, train, c, config.fit)
        neg = -pll(model, train)
        if best is None or neg < best[0]:
            best = (neg, model, partition, it)

        proposals, fell_back = 0, False
        if k > 0:
            if config.heuristic == "greedy":
                deleted = greedy_delete(model, train, k)
            else:
                outcome = rejection_sample_delete(model, train, k, rng, config.rejection_cap)
                deleted = set(outcome.edges)
                proposals, fell_back = outcome.proposals, outcome.fell_back
            added = [e for e, _ in greedy_add(model, train, pool, k, config.fit)]
            active = sorted(set(active) - deleted | set(added))
            pool = sorted(set(pool) - set(added) | deleted)
            carried = dict(zip(model.edges, model.edge_weights))
            model = PairwiseModel(
                V,
                model.node_weights,
                tuple(active),
                np.array([carried.get(e, 0.0) for e in active]),
            )
        else:
            deleted, added = set(), []

        records.append(IterationRecord(
            iteration=it,
            train_neg_pll=neg,
            deleted=tuple(sorted(deleted)),
            added=tuple(added),
            proposals=proposals,
            fell_back=fell_back,
            active_edges=tuple(active),
            pool_edges=tuple(pool),
            seconds=time.perf_counter() - t0,
        ))
        logger.info(
            "iteration %d/%d: train neg PLL %.6f, swapped %d edges%s",
            it, config.max_iter, neg, len(deleted),
            " (rejection fell back to greedy)" if fell_back else "",
        )

    _, best_model, best_partition, best_it = best
    return PruningResult(
        model=best_model,
        partition=best_partition,
        iterations=tuple(records),
        best_iteration=best_it,
    )
