"""Tabular problems: CSV ingestion, the noisy evaluation oracle, ground truth.

All objectives are maximized. A column flagged ``minimize`` is negated when
the file is read, and ``write_csv`` writes the stored (already negated)
values back under the same column names.

CSV files are UTF-8, comma separated, with one header row and '.' decimals.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from vecopt.cones import Order
from vecopt.errors import IndexOutOfRange, MalformedRow, NonFinite, NonNumericColumn
from vecopt.models import Observation


@dataclass(frozen=True, eq=False)
class TabularProblem:
    """A finite design set with tabulated objective values.

    ``objective_shift``/``objective_scale`` hold the affine map applied by
    standardization (``stored = (raw - shift) / scale``); they are zeros and
    ones when the table was not standardized.
    """

    designs: np.ndarray
    objectives: np.ndarray
    noise_std: float = 0.0
    costs: np.ndarray | None = None
    name: str = "problem"
    design_names: tuple = ()
    objective_names: tuple = ()
    objective_shift: np.ndarray | None = None
    objective_scale: np.ndarray | None = None

    def __post_init__(self):
        X = np.array(self.designs, dtype=float)
        Y = np.array(self.objectives, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 2:
            raise ValueError(f"objectives must be K x D with K >= 1, D >= 2; got shape {Y.shape}")
        if X.shape[0] != Y.shape[0]:
            raise ValueError("designs and objectives must have the same number of rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise NonFinite("problem table contains NaN or Inf")
        if not (math.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ValueError("noise_std must be finite and nonnegative")
        D = Y.shape[1]
        costs = np.ones(D) if self.costs is None else np.array(self.costs, dtype=float)
        if costs.shape != (D,):
            raise ValueError(f"costs must have length {D}")
        shift = np.zeros(D) if self.objective_shift is None else np.array(self.objective_shift, dtype=float)
        scale = np.ones(D) if self.objective_scale is None else np.array(self.objective_scale, dtype=float)
        for arr in (X, Y, costs, shift, scale):
            arr.setflags(write=False)
        object.__setattr__(self, "designs", X)
        object.__setattr__(self, "objectives", Y)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "objective_shift", shift)
        object.__setattr__(self, "objective_scale", scale)
        if not self.design_names:
            object.__setattr__(self, "design_names", tuple(f"x{i}" for i in range(X.shape[1])))
        if not self.objective_names:
            object.__setattr__(self, "objective_names", tuple(f"f{j}" for j in range(D)))

    @property
    def n_designs(self) -> int:
        return self.objectives.shape[0]

    @property
    def n_objectives(self) -> int:
        return self.objectives.shape[1]

    def with_noise(self, noise_std: float) -> "TabularProblem":
        return _replace(self, noise_std=float(noise_std))


def _replace(problem: TabularProblem, **changes) -> TabularProblem:
    fields = dict(
        designs=problem.designs,
        objectives=problem.objectives,
        noise_std=problem.noise_std,
        costs=problem.costs,
        name=problem.name,
        design_names=problem.design_names,
        objective_names=problem.objective_names,
        objective_shift=problem.objective_shift,
        objective_scale=problem.objective_scale,
    )
    fields.update(changes)
    return TabularProblem(**fields)


@dataclass(frozen=True)
class EvalQuery:
    """Ask for ``count`` noisy draws of the objectives in ``objective_mask``."""

    design_index: int
    objective_mask: tuple = ()
    count: int = 1

    def __post_init__(self):
        mask = tuple(sorted(set(int(j) for j in self.objective_mask)))
        if not mask:
            raise ValueError("objective_mask must be nonempty")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        object.__setattr__(self, "objective_mask", mask)


def full_query(problem: TabularProblem, design_index: int, count: int = 1) -> EvalQuery:
    return EvalQuery(design_index, tuple(range(problem.n_objectives)), count)


def evaluate(problem: TabularProblem, query: EvalQuery, rng: np.random.Generator) -> list[Observation]:
    """Draw ``query.count`` observations of the masked objectives.

    Standard normals are always drawn, even at zero noise, one per
    (objective, batch slot) with the objective index varying slowest, so
    a given seed yields the same stream whatever the noise level.
    """
    i = query.design_index
    if not (0 <= i < problem.n_designs):
        raise IndexOutOfRange(f"design index {i} outside [0, {problem.n_designs})")
    mask = query.objective_mask
    if mask[0] < 0 or mask[-1] >= problem.n_objectives:
        raise IndexOutOfRange(f"objective mask {mask} outside [0, {problem.n_objectives})")
    z = rng.standard_normal((len(mask), query.count))
    base = problem.objectives[i, list(mask)]
    values = base[:, None] + problem.noise_std * z
    return [
        Observation(i, tuple(zip(mask, values[:, k].tolist())))
        for k in range(query.count)
    ]


def ground_truth_pareto(problem: TabularProblem, order: Order) -> list[int]:
    """Noiseless Pareto indices of the objective table."""
    return order.pareto_indices(problem.objectives)


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such CSV file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow(0, "file has no header row") from None
        rows = [row for row in reader if row]
    return header, rows


def load_csv(
    path,
    design_cols: Sequence[str],
    objective_cols: Sequence[str],
    minimize: Sequence[bool] | None = None,
    *,
    standardize: bool = False,
    noise_std: float = 0.0,
    costs: Sequence[float] | None = None,
    name: str | None = None,
) -> TabularProblem:
    """Load a problem table from CSV.

    Data rows are indexed from 0. A row with the wrong field count or a
    non-finite value raises ``MalformedRow(index)``; text that does not parse
    as a number raises ``NonNumericColumn(column)``.
    """
    header, rows = _read_table(path)
    minimize = [False] * len(objective_cols) if minimize is None else list(minimize)
    if len(minimize) != len(objective_cols):
        raise ValueError("minimize flags must match objective_cols")
    wanted = list(design_cols) + list(objective_cols)
    missing = [c for c in wanted if c not in header]
    if missing:
        raise KeyError(f"columns not in header: {missing}")
    pos = [header.index(c) for c in wanted]
    table = np.empty((len(rows), len(wanted)))
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise MalformedRow(r, f"expected {len(header)} fields, found {len(row)}")
        for k, p in enumerate(pos):
            try:
                v = float(row[p])
            except ValueError:
                raise NonNumericColumn(wanted[k]) from None
            if not math.isfinite(v):
                raise MalformedRow(r, f"non-finite value in column {wanted[k]!r}")
            table[r, k] = v
    nd = len(design_cols)
    X = table[:, :nd]
    Y = table[:, nd:] * np.where(minimize, -1.0, 1.0)
    shift = scale = None
    if standardize:
        shift = Y.mean(axis=0)
        scale = Y.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        Y = (Y - shift) / scale
    return TabularProblem(
        designs=X,
        objectives=Y,
        noise_std=noise_std,
        costs=costs,
        name=name or Path(path).stem,
        design_names=tuple(design_cols),
        objective_names=tuple(objective_cols),
        objective_shift=shift,
        objective_scale=scale,
    )


def write_csv(problem: TabularProblem, path):
    """Write designs and stored objective values with round-trip exact floats."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(problem.design_names) + list(problem.objective_names))
        for x, y in zip(problem.designs, problem.objectives):
            w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in y])
    os.replace(tmp, path)


PROBLEM_SPEC_KEYS = {"path", "design_cols", "objective_cols", "minimize", "standardize", "noise_std", "costs"}


def load_problem_spec(spec: dict, base_dir=None) -> TabularProblem:
    """Build a problem from the JSON problem spec.

    Relative ``path`` values resolve against ``base_dir``. A path of the form
    ``builtin:<name>`` loads one of the packaged fixture tables.
    """
    unknown = set(spec) - PROBLEM_SPEC_KEYS
    if unknown:
        raise KeyError(f"unknown problem keys: {sorted(unknown)}")
    for key in ("path", "design_cols", "objective_cols"):
        if key not in spec:
            raise KeyError(f"problem spec is missing {key!r}")
    path = spec["path"]
    if path.startswith("builtin:"):
        path = dataset_path(path.split(":", 1)[1])
    elif base_dir is not None and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    return load_csv(
        path,
        spec["design_cols"],
        spec["objective_cols"],
        spec.get("minimize"),
        standardize=bool(spec.get("standardize", False)),
        noise_std=float(spec.get("noise_std", 0.0)),
        costs=spec.get("costs"),
    )


def load_problem_json(path) -> TabularProblem:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    return load_problem_spec(spec, base_dir=path.parent)


# Packaged fixtures: name -> (file, design columns, objective columns, minimize flags)
DATASETS = {
    "toy3": ("toy3.csv", ["x"], ["f1", "f2"], [False, False]),
    "disk_brake": (
        "disk_brake.csv",
        ["x1", "x2", "x3", "x4"],
        ["mass", "stopping_time", "constraint_violation"],
        [True, True, True],
    ),
    "vehicle_safety": (
        "vehicle_safety.csv",
        ["x1", "x2", "x3", "x4", "x5"],
        ["mass", "acceleration", "toe_board_intrusion"],
        [True, True, True],
    ),
}


def dataset_path(name: str) -> str:
    if name not in DATASETS:
        raise KeyError(f"unknown dataset {name!r}; available: {sorted(DATASETS)}")
    return str(resources.files("vecopt") / "data" / DATASETS[name][0])


def load_dataset(name: str, *, standardize: bool = True, noise_std: float = 0.0) -> TabularProblem:
    """Load a packaged fixture with its documented column roles."""
    fname, dcols, ocols, mins = DATASETS.get(name, (None,) * 4)
    path = dataset_path(name)
    return load_csv(path, dcols, ocols, mins, standardize=standardize, noise_std=noise_std, name=name)
