"""Shared test helpers: synthetic models, exact enumeration, benchmark data."""

import os

# pin BLAS threading before numpy loads so float reductions are reproducible
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from forced_pruning import DataSet, Edge, PairwiseModel, complete_edges, pll

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_ENV = "FORCED_PRUNING_DATA"
BENCHMARK_SPLITS = ("train", "valid", "test")


def make_dataset(rows, name="test") -> DataSet:
    """DataSet from a list of 0/1 strings or an array-like."""
    if rows and isinstance(rows[0], str):
        rows = [[int(ch) for ch in r] for r in rows]
    return DataSet(np.asarray(rows, dtype=np.float64), name=name)


def write_data_file(path, X) -> str:
    X = np.asarray(X)
    with open(path, "w") as f:
        for row in X:
            f.write(",".join(str(int(v)) for v in row) + "\n")
    return str(path)


def random_model(rng, n_vars, n_edges=None, node_scale=0.5, edge_scale=1.0) -> PairwiseModel:
    """Random weights on a random edge subset of the complete graph."""
    pool = complete_edges(n_vars)
    if n_edges is None:
        n_edges = rng.integers(1, len(pool) + 1)
    picked = sorted(Edge(*pool[i]) for i in rng.choice(len(pool), size=n_edges, replace=False))
    return PairwiseModel(
        n_vars,
        rng.normal(0.0, node_scale, n_vars),
        tuple(picked),
        rng.normal(0.0, edge_scale, n_edges),
    )


def random_dataset(rng, n_vars, n_rows, p=0.5, name="random") -> DataSet:
    X = (rng.random((n_rows, n_vars)) < p).astype(np.float64)
    return DataSet(X, name=name)


def all_states(n_vars) -> np.ndarray:
    """All 2^n_vars binary configurations, one per row."""
    s = np.arange(2 ** n_vars)
    return ((s[:, None] >> np.arange(n_vars)) & 1).astype(np.float64)


def enumerate_joint(model) -> tuple[np.ndarray, np.ndarray]:
    """Exact joint distribution by enumeration (small n_vars only)."""
    states = all_states(model.n_vars)
    W = model.weight_matrix()
    energy = states @ model.node_weights + 0.5 * np.einsum("si,ij,sj->s", states, W, states)
    p = np.exp(energy - energy.max())
    return states, p / p.sum()


def sample_dataset(model, n_rows, rng, name="sampled") -> DataSet:
    """Exact iid sample from the model's joint, via full enumeration."""
    states, p = enumerate_joint(model)
    idx = rng.choice(states.shape[0], size=n_rows, p=p)
    return DataSet(states[idx], name=name)


def fd_gradient(model, ds, h=1e-5) -> np.ndarray:
    """Central finite differences of the mean PLL."""
    theta = model.weight_vector()
    g = np.empty_like(theta)
    for j in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[j] += h
        down[j] -= h
        g[j] = (pll(model.with_weights(up), ds) - pll(model.with_weights(down), ds)) / (2 * h)
    return g


def benchmark_dir() -> str | None:
    for cand in (os.environ.get(DATA_ENV), os.path.join(REPO_ROOT, "data")):
        if cand and os.path.isdir(cand):
            return cand
    return None


def benchmark_paths(name) -> dict[str, str] | None:
    """Split files for one benchmark dataset, or None if any is missing."""
    root = benchmark_dir()
    if root is None:
        return None
    paths = {s: os.path.join(root, f"{name}.{s}.data") for s in BENCHMARK_SPLITS}
    if all(os.path.isfile(p) for p in paths.values()):
        return paths
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def toy_dataset():
    """16 instances over 4 variables with a strong (0, 1) association."""
    return make_dataset([
        "0000", "0001", "0010", "0011",
        "1100", "1101", "1110", "1111",
        "0000", "1100", "0010", "1110",
        "0001", "1101", "0011", "1111",
    ], name="toy")
