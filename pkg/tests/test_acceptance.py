"""End-to-end acceptance gate.

Each test prints one live "[ACCEPTANCE] <name>: PASS/FAIL" line (through
capsys.disabled, so it shows even when captured) and then asserts. The
benchmark-driven checks need the nltcs/plants/msnbc split files; when those
are absent the tests fail with instructions rather than skipping, because
the quantitative targets are part of the contract.
"""

import itertools
import math
import subprocess
import sys
import time
from collections import Counter

import numpy as np
import pytest

from forced_pruning import (
    Edge,
    FitOptions,
    PairwiseModel,
    PruningConfig,
    TyingPartition,
    chow_liu_tree,
    complete_edges,
    forced_pruning,
    learn_params_with_apt,
    load_dataset,
    mple_fit,
    mutual_information_matrix,
    pll,
    pll_gradient,
    pll_without_edges,
    quantize_params,
    rejection_sample_delete,
    tied_fit,
    tying_objective,
)

from conftest import (
    REPO_ROOT,
    benchmark_paths,
    fd_gradient,
    random_dataset,
    random_model,
    sample_dataset,
)
from test_chowliu import spanning_trees
from test_param_learn import exhaustive_best_sse

_BENCH: dict = {}
_CELLS: dict = {}


@pytest.fixture
def announce(capsys):
    def _announce(label, passed, detail=""):
        with capsys.disabled():
            tail = f" ({detail})" if detail else ""
            print(f"[ACCEPTANCE] {label}: {'PASS' if passed else 'FAIL'}{tail}")
    return _announce


def _benchmark(name, label, announce):
    if name not in _BENCH:
        paths = benchmark_paths(name)
        _BENCH[name] = paths and {
            split: load_dataset(p, name=name) for split, p in paths.items()
        }
    if _BENCH[name] is None:
        detail = (
            f"dataset files {name}.train.data/{name}.valid.data/{name}.test.data "
            f"not found under $FORCED_PRUNING_DATA or {REPO_ROOT}/data"
        )
        announce(label, False, detail)
        pytest.fail(f"{label}: {detail}")
    return _BENCH[name]


def _cell(name, splits, m, k, heuristic, seed=0, max_iter=30):
    """Run one grid cell once; later callers reuse the result."""
    key = (name, m, k, heuristic, seed, max_iter)
    if key not in _CELLS:
        cfg = PruningConfig(extra_edges=m, exchange_size=k, heuristic=heuristic,
                            max_iter=max_iter, seed=seed)
        t0 = time.perf_counter()
        result = forced_pruning(splits["train"], cfg)
        seconds = time.perf_counter() - t0
        _CELLS[key] = (-pll(result.model, splits["test"]), seconds)
    return _CELLS[key]


class TestBenchmarkCells:
    def test_nltcs_tree_baseline(self, announce):
        label = "nltcs greedy m=0 k=0"
        splits = _benchmark("nltcs", label, announce)
        # with k=0 the structure is static, so one iteration already yields
        # the fitted tree model
        neg, seconds = _cell("nltcs", splits, 0, 0, "greedy", max_iter=1)
        ok = 4.8 <= neg <= 5.4 and seconds < 120
        announce(label, ok, f"test neg PLL {neg:.4f}, {seconds:.0f}s")
        assert 4.8 <= neg <= 5.4
        assert seconds < 120

    def test_nltcs_exchange_improves_on_baseline(self, announce):
        label = "nltcs greedy m=15 k=5 beats m=0 k=0"
        splits = _benchmark("nltcs", label, announce)
        base, _ = _cell("nltcs", splits, 0, 0, "greedy", max_iter=1)
        neg, _ = _cell("nltcs", splits, 15, 5, "greedy")
        ok = 4.4 <= neg <= 5.0 and neg < base
        announce(label, ok, f"test neg PLL {neg:.4f} vs baseline {base:.4f}")
        assert 4.4 <= neg <= 5.0
        assert neg < base

    def test_msnbc_cell(self, announce):
        label = "msnbc greedy m=15 k=10"
        splits = _benchmark("msnbc", label, announce)
        neg, seconds = _cell("msnbc", splits, 15, 10, "greedy")
        ok = 5.2 <= neg <= 5.9 and seconds < 1200
        announce(label, ok, f"test neg PLL {neg:.4f}, {seconds:.0f}s")
        assert 5.2 <= neg <= 5.9
        assert seconds < 1200

    def test_nltcs_greedy_beats_rejection_on_average(self, announce):
        label = "nltcs m=30 greedy <= rejection (mean over k=5,10)"
        splits = _benchmark("nltcs", label, announce)
        greedy = np.mean([_cell("nltcs", splits, 30, k, "greedy")[0] for k in (5, 10)])
        rejection = np.mean([_cell("nltcs", splits, 30, k, "rejection")[0] for k in (5, 10)])
        ok = greedy <= rejection
        announce(label, ok, f"greedy {greedy:.4f} vs rejection {rejection:.4f}")
        assert greedy <= rejection

    def test_plants_cell(self, announce):
        label = "plants greedy m=0 k=10"
        splits = _benchmark("plants", label, announce)
        neg, seconds = _cell("plants", splits, 0, 10, "greedy")
        ok = 10.6 <= neg <= 11.7 and seconds < 1800
        announce(label, ok, f"test neg PLL {neg:.4f}, {seconds:.0f}s")
        assert 10.6 <= neg <= 11.7
        assert seconds < 1800


class TestProperties:
    def test_gradient_matches_finite_differences(self, announce):
        label = "gradient matches central finite differences"
        worst = 0.0
        for seed in range(24):
            r = np.random.default_rng(seed)
            n_vars = int(r.integers(3, 7))
            model = random_model(r, n_vars)
            ds = random_dataset(r, n_vars, int(r.integers(20, 60)))
            g = pll_gradient(model, ds)
            fd = fd_gradient(model, ds)
            worst = max(worst, float(np.abs(g - fd).max() / np.abs(fd).max()))
        ok = worst < 1e-5
        announce(label, ok, f"max relative error {worst:.2e} over 24 models")
        assert worst < 1e-5

    def test_all_zero_model_is_uniform(self, announce):
        label = "all-zero model scores n_vars*ln(2)"
        worst = 0.0
        for seed, n_vars in ((0, 2), (1, 5), (2, 11)):
            ds = random_dataset(np.random.default_rng(seed), n_vars, 37)
            err = abs(-pll(PairwiseModel.zeros(n_vars), ds) - n_vars * math.log(2))
            worst = max(worst, err)
        ok = worst < 1e-12
        announce(label, ok, f"max deviation {worst:.2e}")
        assert worst < 1e-12

    def test_tree_initializer_is_optimal(self, announce):
        label = "tree initializer matches exhaustive spanning-tree search"
        ok = True
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            n_vars = 5 if seed % 2 == 0 else 6
            ds = random_dataset(rng, n_vars, 45)
            M = mutual_information_matrix(ds)
            best = max(sum(M[lo, hi] for lo, hi in t) for t in spanning_trees(n_vars))
            got = sum(M[lo, hi] for lo, hi in chow_liu_tree(ds))
            ok = ok and abs(got - best) < 1e-12
        announce(label, ok, "10 random datasets, 5-6 variables")
        assert ok

    def test_weight_quantization_is_optimal(self, announce):
        label = "weight quantization matches exhaustive partition search"
        worst = 0.0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, 11))
            x = rng.normal(size=n) * 3.0
            for c in range(1, n + 1):
                got = tying_objective(x, quantize_params(x, c))
                worst = max(worst, abs(got - exhaustive_best_sse(x, c)))
        ok = worst < 1e-12
        announce(label, ok, f"max objective gap {worst:.2e}, all cluster counts up to 10 params")
        assert ok

    def test_rejection_sampler_matches_enumeration(self, announce):
        label = "rejection sampler matches enumerated subset distribution"
        rng = np.random.default_rng(7)
        model = PairwiseModel(
            4,
            np.array([0.2, -0.1, 0.15, -0.2]),
            (Edge(0, 1), Edge(0, 3), Edge(1, 2), Edge(2, 3)),
            np.array([0.8, 0.7, -0.6, 0.5]),
        )
        ds = sample_dataset(model, 30, rng)
        draws = 10**4
        stream = np.random.default_rng(123)
        worst_tv = 0.0
        for k in (1, 2):
            exact = {
                frozenset(s): math.exp(pll_without_edges(model, ds, s))
                for s in itertools.combinations(model.edges, k)
            }
            z = sum(exact.values())
            exact = {s: p / z for s, p in exact.items()}
            counts = Counter(
                rejection_sample_delete(model, ds, k, stream, cap=10**7).edges
                for _ in range(draws)
            )
            tv = 0.5 * sum(
                abs(counts.get(s, 0) / draws - p) for s, p in exact.items())
            worst_tv = max(worst_tv, tv)
        ok = worst_tv < 0.05
        announce(label, ok, f"max TV distance {worst_tv:.4f} at 10^4 accepted samples")
        assert worst_tv < 0.05

    def test_exchange_loop_invariants(self, announce):
        label = "exchange loop keeps budget and partition invariants"
        rng = np.random.default_rng(17)
        ds = random_dataset(rng, 6, 90)
        cfg = PruningConfig(extra_edges=3, exchange_size=2, max_iter=50, seed=29,
                            apt_clusters=6)
        result = forced_pruning(ds, cfg)
        M = 6 - 1 + 3
        everything = set(complete_edges(6))
        ok = len(result.iterations) == 50
        for rec in result.iterations:
            active, pool = set(rec.active_edges), set(rec.pool_edges)
            ok = ok and len(rec.active_edges) == M
            ok = ok and not (active & pool)
            ok = ok and (active | pool) == everything
        announce(label, ok, "50 iterations on random data")
        assert ok

    def test_tying_consistency(self, announce):
        label = "singleton tying equals plain fit; tying bounds distinct values"
        rng = np.random.default_rng(23)
        ds = random_dataset(rng, 4, 80)
        model = random_model(rng, 4, 4, edge_scale=0.4)
        tight = FitOptions(gradient_tolerance=1e-8)
        fitted = mple_fit(model, ds, tight)
        tied = tied_fit(fitted, ds, TyingPartition.singletons(fitted.weight_vector()), tight)
        gap = float(np.abs(tied.weight_vector() - fitted.weight_vector()).max())

        distinct_ok = True
        for c in (1, 3, 5):
            apt_model, _ = learn_params_with_apt(PairwiseModel.zeros(4, model.edges), ds, c)
            distinct_ok = distinct_ok and len(set(apt_model.weight_vector().tolist())) <= c
        ok = gap < 1e-4 and distinct_ok
        announce(label, ok, f"max weight gap {gap:.2e}; distinct counts bounded")
        assert gap < 1e-4
        assert distinct_ok

    def test_deterministic_reports(self, announce, tmp_path):
        label = "identical config and seed give byte-identical CSV"
        X = (np.random.default_rng(3).random((100, 4)) < 0.5).astype(int)
        data = tmp_path / "d.data"
        with open(data, "w") as f:
            for row in X:
                f.write(",".join(map(str, row)) + "\n")
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            cmd = [
                sys.executable, "-m", "forced_pruning",
                "--train", str(data), "--sweep", "m=0,1;k=0,1",
                "--max-iter", "2", "--seed", "7", "--out-dir", str(out),
            ]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outs.append((out / "report.csv").read_bytes())
        ok = outs[0] == outs[1]
        announce(label, ok, f"{len(outs[0])} bytes")
        assert ok
