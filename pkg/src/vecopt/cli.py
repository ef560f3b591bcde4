"""Command-line benchmark harness.

    vecopt run <config.json> [--jobs N] [--output-dir PATH]
    vecopt compare <aggregate.json> ...
    vecopt pareto <problem.json> <order.json>

Exit codes: 0 success, 1 configuration error, 2 at least one failed seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import shutil
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from vecopt.algorithms import ALGORITHMS, AlgConfig
from vecopt.cones import Order, cone_from_dict
from vecopt.errors import ConfigInvalid, SchemaMismatch
from vecopt.metrics import default_ref_point, eps_f1, hv_discrepancy
from vecopt.problems import load_problem_json, load_problem_spec

METRIC_KEYS = ("eps_f1", "hv_discrepancy", "samples_used")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemBlock(_Strict):
    path: str
    design_cols: List[str]
    objective_cols: List[str]
    minimize: Optional[List[bool]] = None
    standardize: bool = False
    noise_std: float = 0.0
    costs: Optional[List[float]] = None


class OrderBlock(_Strict):
    type: Literal["matrix", "componentwise", "theta2d", "icecream3d"]
    W: Optional[List[List[float]]] = None
    theta: Optional[float] = None
    alpha: Optional[float] = None
    facets: Optional[int] = None
    dim: Optional[int] = None


class AlgorithmBlock(_Strict):
    name: str
    epsilon: float = 0.0
    delta: float = 0.05
    budget: float
    batch_size: int = 1
    conf_shape: Literal["rect", "ellipsoid"] = "rect"
    costs: Optional[List[float]] = None
    gp_signal: float = 1.0
    gp_lengthscale: float = 1.0
    gp_noise: Optional[float] = None
    gp_grid: Optional[List[List[float]]] = None

    @field_validator("name")
    @classmethod
    def _known(cls, v):
        if v not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {v!r}; choose from {sorted(ALGORITHMS)}")
        return v


class MetricsBlock(_Strict):
    epsilon: float = 0.0
    ref_point: Optional[List[float]] = None
    mc_samples: int = 100_000


class TrialsBlock(_Strict):
    seeds: List[int]

    @field_validator("seeds")
    @classmethod
    def _unique(cls, v):
        if not v:
            raise ValueError("at least one seed is required")
        if len(set(v)) != len(v):
            raise ValueError("seeds must be unique")
        return v


class ExperimentConfig(_Strict):
    name: str
    problem: ProblemBlock
    order: OrderBlock
    algorithm: AlgorithmBlock
    metrics: MetricsBlock = MetricsBlock()
    trials: TrialsBlock
    output_dir: str = "results"


def _describe(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"])
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigInvalid(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from None
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigInvalid(_describe(exc)) from None
    try:
        cone_from_dict(cfg.order.model_dump(exclude_none=True))
    except Exception as exc:
        raise ConfigInvalid(f"order: {exc}") from None
    return cfg


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def run_trial(cfg_dict: dict, base_dir: str, seed: int, seed_dir: str) -> dict:
    """Run one seed and write its directory; never raises for run-time errors.

    The returned summary carries ``wall_ms``, which is written to the
    experiment-level ``timing.json`` rather than to the seed directory.
    """
    cfg = ExperimentConfig.model_validate(cfg_dict)
    seed_dir = Path(seed_dir)
    staging = Path(tempfile.mkdtemp(dir=seed_dir.parent, prefix=f".{seed_dir.name}."))
    summary: dict = {"seed": seed, "algorithm": cfg.algorithm.name}
    start = time.perf_counter()
    try:
        problem = load_problem_spec(cfg.problem.model_dump(exclude_none=True), base_dir=base_dir)
        order = Order(cone_from_dict(cfg.order.model_dump(exclude_none=True)))
        alg = cfg.algorithm
        config = AlgConfig(
            epsilon=alg.epsilon,
            delta=alg.delta,
            budget=alg.budget,
            batch_size=alg.batch_size,
            conf_shape=alg.conf_shape,
            costs=alg.costs,
            seed=seed,
            gp_signal=alg.gp_signal,
            gp_lengthscale=alg.gp_lengthscale,
            gp_noise=alg.gp_noise,
            gp_grid=[tuple(g) for g in alg.gp_grid] if alg.gp_grid else None,
        )
        result = ALGORITHMS[alg.name](problem, order, config)
        ref = cfg.metrics.ref_point if cfg.metrics.ref_point is not None else default_ref_point(problem).tolist()
        f1 = eps_f1(result.predicted_pareto, problem, order, cfg.metrics.epsilon)
        hvd = hv_discrepancy(result.predicted_pareto, problem, order, ref, mc_samples=cfg.metrics.mc_samples, seed=seed)
        summary.update(result.summary())
        summary.update(
            status="ok",
            eps_f1=f1,
            hv_discrepancy=hvd,
            log10_hv_discrepancy=math.log10(max(hvd, 1e-12)),
        )
        (staging / "rounds.csv").write_text(result.rounds_csv(), encoding="utf-8")
    except Exception as exc:  # a failing seed is recorded, not propagated
        summary.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    (staging / "summary.json").write_text(_dump(summary), encoding="utf-8")
    if seed_dir.exists():
        shutil.rmtree(seed_dir)
    os.replace(staging, seed_dir)
    # wall-clock time is the only nondeterministic field; it stays out of the seed directory
    return {**summary, "wall_ms": round((time.perf_counter() - start) * 1000.0, 3)}


def _aggregate(name: str, summaries: list[dict]) -> tuple[str, dict]:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "status", "eps_f1", "hv_discrepancy", "samples_used", "terminated_by"])
    for s in summaries:
        w.writerow([
            s["seed"],
            s["status"],
            repr(s["eps_f1"]) if "eps_f1" in s else "",
            repr(s["hv_discrepancy"]) if "hv_discrepancy" in s else "",
            s.get("samples_used", ""),
            s.get("terminated_by", ""),
        ])
    ok = [s for s in summaries if s["status"] == "ok"]
    metrics = {}
    for key in METRIC_KEYS:
        vals = np.array([s[key] for s in ok], dtype=float)
        metrics[key] = {
            "mean": float(vals.mean()) if vals.size else None,
            "std": float(vals.std()) if vals.size else None,
        }
    agg = {
        "name": name,
        "n_seeds": len(summaries),
        "n_failed": len(summaries) - len(ok),
        "metrics": metrics,
    }
    return buf.getvalue(), agg


def run_experiment(config_path, jobs: int = 1, output_dir=None) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    base_dir = str(Path(config_path).resolve().parent)
    out_root = Path(output_dir) if output_dir else Path(cfg.output_dir)
    if not out_root.is_absolute() and output_dir is None:
        out_root = Path(base_dir) / out_root
    exp_dir = out_root / cfg.name
    exp_dir.mkdir(parents=True, exist_ok=True)
    cfg_dict = cfg.model_dump()
    tasks = [(cfg_dict, base_dir, seed, str(exp_dir / f"seed{seed}")) for seed in cfg.trials.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(run_trial, *zip(*tasks)))
    else:
        summaries = [run_trial(*t) for t in tasks]
    agg_csv, agg = _aggregate(cfg.name, summaries)
    _atomic_write(exp_dir / "aggregate.csv", agg_csv)
    _atomic_write(exp_dir / "aggregate.json", _dump(agg))
    _atomic_write(exp_dir / "timing.json", _dump({f"seed{s['seed']}": s["wall_ms"] for s in summaries}))
    for s in summaries:
        if s["status"] != "ok":
            print(f"seed {s['seed']} failed: {s['error']}", file=sys.stderr)
    return 0 if agg["n_failed"] == 0 else 2


def _read_aggregate(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such aggregate file: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        name = data["name"]
        metrics = {k: (data["metrics"][k]["mean"], data["metrics"][k]["std"]) for k in METRIC_KEYS}
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SchemaMismatch(f"{path}: not an aggregate.json ({type(exc).__name__}: {exc})") from None
    return {"name": name, **metrics}


def compare(paths) -> str:
    rows = [_read_aggregate(p) for p in paths]
    header = ["experiment", *METRIC_KEYS]
    table = [header]
    for r in rows:
        cells = [str(r["name"])]
        for key in METRIC_KEYS:
            mean, std = r[key]
            cells.append("n/a" if mean is None else f"{mean!r} ± {std!r}")
        table.append(cells)
    widths = [max(len(row[c]) for row in table) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table]
    return "\n".join(lines)


def pareto_command(problem_path, order_path) -> list[int]:
    problem = load_problem_json(problem_path)
    order = Order(cone_from_dict(json.loads(Path(order_path).read_text(encoding="utf-8"))))
    return order.pareto_indices(problem.objectives)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vecopt", description="Vector optimization benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config over its seeds")
    p_run.add_argument("config")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--output-dir", default=None)
    p_cmp = sub.add_parser("compare", help="tabulate aggregate.json files")
    p_cmp.add_argument("paths", nargs="+")
    p_par = sub.add_parser("pareto", help="print ground-truth Pareto indices")
    p_par.add_argument("problem")
    p_par.add_argument("order")
    args = parser.parse_args(argv)

    if args.command == "run":
        return run_experiment(args.config, jobs=max(1, args.jobs), output_dir=args.output_dir)
    if args.command == "compare":
        try:
            print(compare(args.paths))
        except (FileNotFoundError, SchemaMismatch) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        return 0
    try:
        indices = pareto_command(args.problem, args.order)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for i in indices:
        print(i)
    return 0


if __name__ == "__main__":
    sys.exit(main())
