"""Command-line experiment runner and model file round-trip.

One invocation runs either a single learning job or an (m, k) sweep over
extra-edge counts and exchange sizes. Every run writes a deterministic CSV
report; wall-clock timings go to a separate file so the report is
byte-identical across reruns with the same config and seed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import DataSet, DatasetFormatError, load_dataset
from .model import Edge, PairwiseModel, pll
from .param_learn import FitError, FitOptions, TyingPartition
from .structure import HEURISTICS, PruningConfig, PruningResult, forced_pruning

logger = logging.getLogger(__name__)

MODEL_FORMAT_HEADER = "pairwise-model v1"
SPLITS = ("train", "valid", "test")
APT_SELECT_CHOICES = (4, 8, 16, 32)


class ModelFormatError(ValueError):
    """A model file is malformed or has the wrong version."""


def save_model(path: str, model: PairwiseModel, partition: TyingPartition | None = None) -> None:
    """Write a model (and optional tying partition) as readable text.

    Floats are written with ``repr`` so loading reproduces them bit-exactly.
    """
    lines = [MODEL_FORMAT_HEADER, f"n_vars {model.n_vars}"]
    lines.append("nodes " + " ".join(repr(float(w)) for w in model.node_weights))
    lines.append(f"edges {len(model.edges)}")
    for (lo, hi), w in zip(model.edges, model.edge_weights):
        lines.append(f"{lo} {hi} {float(w)!r}")
    if partition is not None:
        if partition.n_params != model.n_params:
            raise ValueError(
                f"partition covers {partition.n_params} parameters, model has {model.n_params}"
            )
        lines.append(f"tying {partition.n_clusters}")
        lines.append("assignment " + " ".join(str(a) for a in partition.assignment))
        lines.append("means " + " ".join(repr(float(m)) for m in partition.means))
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


class _LineReader:
    """Sequential line access that reports positions in load errors."""

    def __init__(self, path: str, lines: list[str]):
        self.path = path
        self.lines = lines
        self.pos = 0

    def next(self, what: str) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"{self.path}: unexpected end of file, expected {what}")
        self.pos += 1
        return self.lines[self.pos - 1]

    def fail(self, message: str):
        raise ModelFormatError(f"{self.path}, line {self.pos}: {message}")

    def fields(self, what: str, tag: str, n: int | None = None) -> list[str]:
        parts = self.next(what).split()
        if not parts or parts[0] != tag:
            self.fail(f"expected {what!r} line starting with {tag!r}")
        if n is not None and len(parts) - 1 != n:
            self.fail(f"expected {n} values after {tag!r}, got {len(parts) - 1}")
        return parts[1:]


def load_model(path: str) -> tuple[PairwiseModel, TyingPartition | None]:
    """Read a model file written by :func:`save_model`."""
    try:
        with open(path, encoding="ascii") as f:
            raw = f.read().splitlines()
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"{path}: not a text model file ({exc})") from None
    r = _LineReader(path, raw)
    header = r.next("header")
    if header != MODEL_FORMAT_HEADER:
        r.fail(f"unsupported format header {header!r}, expected {MODEL_FORMAT_HEADER!r}")
    try:
        n_vars = int(r.fields("variable count", "n_vars", 1)[0])
        node_weights = np.array([float(v) for v in r.fields("node weights", "nodes")])
        n_edges = int(r.fields("edge count", "edges", 1)[0])
        edges, edge_weights = [], []
        for _ in range(n_edges):
            parts = r.next("edge line").split()
            if len(parts) != 3:
                r.fail(f"expected 'lo hi weight', got {len(parts)} fields")
            edges.append(Edge(int(parts[0]), int(parts[1])))
            edge_weights.append(float(parts[2]))
        model = PairwiseModel(n_vars, node_weights, tuple(edges), np.array(edge_weights))
    except ModelFormatError:
        raise
    except ValueError as exc:
        r.fail(str(exc))

    partition = None
    if r.pos < len(r.lines) and r.lines[r.pos].strip():
        try:
            n_clusters = int(r.fields("tying header", "tying", 1)[0])
            assignment = np.array([int(v) for v in r.fields("cluster assignment", "assignment")])
            means = np.array([float(v) for v in r.fields("cluster means", "means")])
            partition = TyingPartition(assignment, means, n_clusters)
            if partition.n_params != model.n_params:
                raise ValueError(
                    f"assignment covers {partition.n_params} parameters, model has {model.n_params}"
                )
        except ModelFormatError:
            raise
        except ValueError as exc:
            r.fail(str(exc))
    return model, partition


@dataclass(frozen=True)
class CellResult:
    """Outcome of one (heuristic, m, k) grid cell."""

    heuristic: str
    m: int
    k: int
    seed: int
    neg_pll: dict[str, float]
    seconds: float
    best_iteration: int = 0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class ExperimentReport:
    """All grid cells of one run plus the shared configuration."""

    dataset: str
    config: dict
    splits: tuple[str, ...] = ("train",)
    cells: list[CellResult] = field(default_factory=list)

    def csv_text(self) -> str:
        """Deterministic report CSV: one row per cell and split."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "heuristic", "m", "k", "split", "neg_pll"])
        for c in sorted(self.cells, key=lambda c: (c.heuristic, c.m, c.k)):
            for split in self.splits:
                value = "nan" if c.failed else f"{c.neg_pll[split]:.12g}"
                w.writerow([self.dataset, c.heuristic, c.m, c.k, split, value])
        return buf.getvalue()

    def timings_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "heuristic", "m", "k", "seed", "seconds", "status"])
        for c in sorted(self.cells, key=lambda c: (c.heuristic, c.m, c.k)):
            w.writerow([
                self.dataset, c.heuristic, c.m, c.k, c.seed,
                f"{c.seconds:.3f}", c.error or "ok",
            ])
        return buf.getvalue()

    def table_text(self, split: str) -> str:
        """Aligned table: rows per heuristic, columns grouped by m, split by k."""
        ms = sorted({c.m for c in self.cells})
        ks = sorted({c.k for c in self.cells})
        hs = sorted({c.heuristic for c in self.cells})
        by_key = {(c.heuristic, c.m, c.k): c for c in self.cells}
        width = 8
        label_w = max(12, len(self.dataset) + 2, *(len(h) + 2 for h in hs))

        def fmt_cell(c: CellResult | None) -> str:
            if c is None:
                return "-".rjust(width)
            if c.failed or split not in c.neg_pll:
                return "FAIL".rjust(width)
            return f"{c.neg_pll[split]:.4f}".rjust(width)

        group_w = width * len(ks) + (len(ks) - 1)
        out = [f"negative PLL on the {split} split, dataset {self.dataset}"]
        out.append(" " * label_w + " | " + " | ".join(f"m={m}".center(group_w) for m in ms))
        out.append(" " * label_w + " | " + " | ".join(
            " ".join(f"k={k}".rjust(width) for k in ks) for _ in ms))
        out.append("-" * label_w + "-+-" + "-+-".join("-" * group_w for _ in ms))
        for h in hs:
            row = h.ljust(label_w) + " | "
            row += " | ".join(
                " ".join(fmt_cell(by_key.get((h, m, k))) for k in ks) for m in ms)
            out.append(row)
        return "\n".join(out) + "\n"


def _dataset_name(train_path: str) -> str:
    return os.path.basename(train_path).split(".")[0]


def _eval_splits(model: PairwiseModel, splits: dict[str, DataSet]) -> dict[str, float]:
    return {name: -pll(model, ds) for name, ds in splits.items()}


def _load_splits(args) -> dict[str, DataSet]:
    splits = {"train": load_dataset(args.train)}
    if args.valid:
        splits["valid"] = load_dataset(args.valid)
    if args.test:
        splits["test"] = load_dataset(args.test)
    n_vars = {name: ds.n_vars for name, ds in splits.items()}
    if len(set(n_vars.values())) != 1:
        raise DatasetFormatError(f"splits disagree on variable count: {n_vars}")
    return splits


def _cell_config(args, m: int, k: int, heuristic: str, seed: int, apt_clusters: int | None = None) -> PruningConfig:
    return PruningConfig(
        extra_edges=m,
        exchange_size=k,
        heuristic=heuristic,
        max_iter=args.max_iter,
        seed=seed,
        apt_clusters=apt_clusters if apt_clusters is not None else args.apt_clusters,
        fit=FitOptions(l2_strength=args.l2),
        rejection_cap=args.rejection_cap,
    )


def _write_iteration_log(path: str, result: PruningResult) -> None:
    with open(path, "w", encoding="ascii") as f:
        for rec in result.iterations:
            f.write(json.dumps({
                "iteration": rec.iteration,
                "train_neg_pll": rec.train_neg_pll,
                "deleted": [list(e) for e in rec.deleted],
                "added": [list(e) for e in rec.added],
                "proposals": rec.proposals,
                "fell_back": rec.fell_back,
                "n_active": len(rec.active_edges),
                "n_pool": len(rec.pool_edges),
                "seconds": round(rec.seconds, 3),
            }) + "\n")


def _config_echo(args, name: str) -> dict:
    return {
        "dataset": name,
        "train": args.train,
        "valid": args.valid,
        "test": args.test,
        "heuristic": args.heuristic,
        "extra_edges": args.extra_edges,
        "exchange": args.exchange,
        "apt_clusters": args.apt_clusters,
        "l2": args.l2,
        "max_iter": args.max_iter,
        "seed": args.seed,
        "rejection_cap": args.rejection_cap,
        "sweep": args.sweep,
    }


def _select_apt_clusters(splits: dict[str, DataSet], config: PruningConfig) -> tuple[int, PruningResult]:
    """Pick the cluster count with the best validation negative PLL."""
    best = None
    for c in APT_SELECT_CHOICES:
        result = forced_pruning(splits["train"], replace(config, apt_clusters=c))
        score = -pll(result.model, splits["valid"])
        logger.info("cluster count %d: validation neg PLL %.6f", c, score)
        if best is None or score < best[0]:
            best = (score, c, result)
    _, c, result = best
    logger.info("selected cluster count %d", c)
    return c, result


def run_single(args) -> int:
    splits = _load_splits(args)
    name = args.name or _dataset_name(args.train)
    config = _cell_config(args, args.extra_edges, args.exchange, args.heuristic, args.seed)
    t0 = time.perf_counter()
    if args.apt_select:
        clusters, result = _select_apt_clusters(splits, config)
    else:
        clusters, result = args.apt_clusters, forced_pruning(splits["train"], config)
    seconds = time.perf_counter() - t0

    cell = CellResult(
        heuristic=args.heuristic, m=args.extra_edges, k=args.exchange, seed=args.seed,
        neg_pll=_eval_splits(result.model, splits), seconds=seconds,
        best_iteration=result.best_iteration,
    )
    echo = _config_echo(args, name)
    echo["apt_clusters"] = clusters
    present = tuple(s for s in SPLITS if s in splits)
    report = ExperimentReport(dataset=name, config=echo, splits=present, cells=[cell])

    os.makedirs(args.out_dir, exist_ok=True)
    save_model(os.path.join(args.out_dir, "model.txt"), result.model, result.partition)
    _write_iteration_log(os.path.join(args.out_dir, "iterations.jsonl"), result)
    _write(os.path.join(args.out_dir, "report.csv"), report.csv_text())
    _write(os.path.join(args.out_dir, "timings.csv"), report.timings_csv_text())
    _write(os.path.join(args.out_dir, "config.json"), json.dumps(echo, indent=2, sort_keys=True) + "\n")
    eval_split = "test" if "test" in splits else "valid" if "valid" in splits else "train"
    _write(os.path.join(args.out_dir, "report.txt"), report.table_text(eval_split))

    for split in SPLITS:
        if split in cell.neg_pll:
            print(f"{name} {args.heuristic} m={args.extra_edges} k={args.exchange} "
                  f"{split} neg PLL {cell.neg_pll[split]:.4f}")
    print(f"model written to {os.path.join(args.out_dir, 'model.txt')} "
          f"(best iteration {result.best_iteration}, {seconds:.1f}s)")
    return 0


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(text)


def parse_sweep(spec: str) -> tuple[list[int], list[int], list[str] | None]:
    """Parse a grid spec like ``m=0,15,30;k=0,5,10`` (optionally ``;h=...``)."""
    ms: list[int] | None = None
    ks: list[int] | None = None
    hs: list[str] | None = None
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        key, eq, values = part.partition("=")
        key = key.strip()
        if not eq or key not in ("m", "k", "h"):
            raise ValueError(f"bad sweep component {part!r}, expected m=..., k=... or h=...")
        items = [v.strip() for v in values.split(",") if v.strip()]
        if not items:
            raise ValueError(f"empty value list in sweep component {part!r}")
        if key == "h":
            for h in items:
                if h not in HEURISTICS:
                    raise ValueError(f"unknown heuristic {h!r} in sweep")
            hs = list(dict.fromkeys(items))
        else:
            try:
                parsed = [int(v) for v in items]
            except ValueError:
                raise ValueError(f"non-integer value in sweep component {part!r}") from None
            if any(v < 0 for v in parsed):
                raise ValueError(f"negative value in sweep component {part!r}")
            if key == "m":
                ms = list(dict.fromkeys(parsed))
            else:
                ks = list(dict.fromkeys(parsed))
    if ms is None or ks is None:
        raise ValueError("sweep spec must define both m=... and k=...")
    return ms, ks, hs


def _run_cell_on(splits: dict[str, DataSet], config: PruningConfig) -> tuple[dict[str, float], float, int]:
    t0 = time.perf_counter()
    result = forced_pruning(splits["train"], config)
    seconds = time.perf_counter() - t0
    return _eval_splits(result.model, splits), seconds, result.best_iteration


def _run_cell(train_path: str, valid_path: str | None, test_path: str | None,
              config: PruningConfig) -> tuple[dict[str, float], float, int]:
    """Worker for one grid cell; reloads data so it can run in a subprocess."""
    splits = {"train": load_dataset(train_path)}
    if valid_path:
        splits["valid"] = load_dataset(valid_path)
    if test_path:
        splits["test"] = load_dataset(test_path)
    return _run_cell_on(splits, config)


def run_sweep(args) -> int:
    ms, ks, hs = parse_sweep(args.sweep)
    heuristics = hs or [args.heuristic]
    name = args.name or _dataset_name(args.train)
    splits = _load_splits(args)  # also fails fast before launching worker processes

    grid = sorted((h, m, k) for h in heuristics for m in ms for k in ks)
    cells_cfg = [
        (h, m, k, args.seed + i, _cell_config(args, m, k, h, args.seed + i))
        for i, (h, m, k) in enumerate(grid)
    ]
    present = tuple(s for s in SPLITS if s in splits)
    report = ExperimentReport(dataset=name, config=_config_echo(args, name), splits=present)

    def finish(h, m, k, seed, outcome, error=None):
        if error is not None:
            logger.error("cell %s m=%d k=%d failed: %s", h, m, k, error)
            report.cells.append(CellResult(h, m, k, seed, {}, 0.0, error=str(error)))
            return
        neg_pll, seconds, best_it = outcome
        report.cells.append(CellResult(h, m, k, seed, neg_pll, seconds, best_it))
        logger.info("cell %s m=%d k=%d done in %.1fs", h, m, k, seconds)

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {
                pool.submit(_run_cell, args.train, args.valid, args.test, cfg): (h, m, k, seed)
                for h, m, k, seed, cfg in cells_cfg
            }
            for fut in concurrent.futures.as_completed(futures):
                h, m, k, seed = futures[fut]
                try:
                    finish(h, m, k, seed, fut.result())
                except Exception as exc:
                    finish(h, m, k, seed, None, error=exc)
    else:
        for h, m, k, seed, cfg in cells_cfg:
            try:
                finish(h, m, k, seed, _run_cell_on(splits, cfg))
            except Exception as exc:
                finish(h, m, k, seed, None, error=exc)

    os.makedirs(args.out_dir, exist_ok=True)
    _write(os.path.join(args.out_dir, "report.csv"), report.csv_text())
    _write(os.path.join(args.out_dir, "timings.csv"), report.timings_csv_text())
    _write(os.path.join(args.out_dir, "config.json"),
           json.dumps(report.config, indent=2, sort_keys=True) + "\n")
    eval_split = "test" if args.test else "valid" if args.valid else "train"
    table = report.table_text(eval_split)
    _write(os.path.join(args.out_dir, "report.txt"), table)
    print(table, end="")

    failed = [c for c in report.cells if c.failed]
    if failed:
        print(f"{len(failed)} of {len(report.cells)} cells failed; see timings.csv",
              file=sys.stderr)
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="forced-pruning",
        description="Learn a binary pairwise Markov network under a hard edge "
                    "budget by iterative edge exchange.",
    )
    p.add_argument("--train", required=True, help="training split (one row of 0/1 tokens per line)")
    p.add_argument("--valid", help="validation split")
    p.add_argument("--test", help="test split")
    p.add_argument("--name", help="dataset name for reports (default: from --train filename)")
    p.add_argument("--extra-edges", type=int, default=0, metavar="M",
                   help="edges beyond the spanning tree (budget = n_vars - 1 + M)")
    p.add_argument("--exchange", type=int, default=5, metavar="K",
                   help="edges deleted and added per iteration")
    p.add_argument("--heuristic", choices=HEURISTICS, default="greedy",
                   help="edge deletion heuristic")
    p.add_argument("--apt-clusters", type=int, default=16,
                   help="parameter-tying cluster count")
    p.add_argument("--apt-select", action="store_true",
                   help="pick the tying cluster count from {4,8,16,32} by "
                        "validation negative PLL (needs --valid; single runs only)")
    p.add_argument("--l2", type=float, default=0.1, help="L2 penalty strength")
    p.add_argument("--max-iter", type=int, default=30, help="exchange iterations")
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--rejection-cap", type=int, default=10000,
                   help="max rejection-sampling proposals per iteration")
    p.add_argument("--out-dir", default="fp-run", help="output directory")
    p.add_argument("--sweep", metavar="GRID",
                   help="run a grid instead of a single job, e.g. "
                        "'m=0,15,30,45,60;k=0,5,10' (add ;h=greedy,rejection "
                        "to sweep heuristics)")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep processes")
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.jobs < 1:
        print("error: jobs must be >= 1", file=sys.stderr)
        return 1
    if args.apt_select and not args.valid:
        print("error: --apt-select needs --valid", file=sys.stderr)
        return 1
    if args.apt_select and args.sweep:
        print("error: --apt-select applies to single runs only", file=sys.stderr)
        return 1
    try:
        if args.sweep:
            return run_sweep(args)
        return run_single(args)
    except (DatasetFormatError, ModelFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
