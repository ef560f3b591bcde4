"""Pareto-set identification algorithms on finite design sets.

All round-based algorithms share one elimination step. With ``u`` the cone's
central direction and regions ``R(d)``:

* discard ``d`` from the undecided set ``S`` when some other active design
  ``d'`` satisfies ``definitely_leq(R(d), R(d') - eps*u)``;
* move ``d`` from ``S`` to the predicted set ``P`` when no other active
  design has ``possibly_leq(R(d), R(d') - eps*u)``.

Identical regions never discard each other, and identical point regions
(exact duplicates at zero noise) do not block each other's identification.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from vecopt.cones import Order
from vecopt.errors import BudgetTooSmall, CostVectorInvalid
from vecopt.models import EmpiricalModel, GPModel, fit_gp_hyperparams, region_from_summary
from vecopt.problems import EvalQuery, TabularProblem, evaluate, full_query
from vecopt.regions import RectRegion, RegionTable, rect_intersect

ROUND_COLUMNS = ("t", "samples_used", "S_size", "P_size", "max_diameter")


@dataclass
class AlgConfig:
    """Run settings shared by every algorithm.

    ``batch_size`` is the number of repeat draws per design per round for the
    elimination algorithms, and the number of designs sampled per round for
    ``gp_pal_run``. ``costs`` overrides the problem's per-objective costs in
    the decoupled algorithm. GP hyperparameters are fixed unless ``gp_grid``
    is given, in which case they are re-selected every round by marginal
    likelihood once each objective has two observations.
    """

    epsilon: float = 0.0
    delta: float = 0.05
    budget: float = 1000
    batch_size: int = 1
    conf_shape: str = "rect"
    costs: Sequence[float] | None = None
    seed: int = 0
    known_noise: bool = True
    gp_signal: float = 1.0
    gp_lengthscale: float = 1.0
    gp_noise: float | None = None
    gp_noise_floor: float = 1e-4
    gp_grid: Sequence[tuple[float, float, float]] | None = None
    trace_regions: bool = False

    def __post_init__(self):
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be finite and nonnegative")
        if not (0 < self.delta < 1):
            raise ValueError("delta must lie in (0, 1)")
        if not self.budget >= 0:
            raise ValueError("budget must be nonnegative")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if self.conf_shape not in ("rect", "ellipsoid"):
            raise ValueError(f"conf_shape must be 'rect' or 'ellipsoid', got {self.conf_shape!r}")


@dataclass(frozen=True)
class RoundLog:
    t: int
    samples_used: float
    S_size: int
    P_size: int
    max_diameter: float


@dataclass
class RunResult:
    predicted_pareto: list[int]
    rounds: list[RoundLog]
    terminated_by: str
    samples_used: float
    regions: dict = field(default_factory=dict)
    region_trace: list = field(default_factory=list)
    sample_counts: np.ndarray | None = None  # per (design, objective) cell, empirical-model runs

    def rounds_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ROUND_COLUMNS)
        for r in self.rounds:
            w.writerow([r.t, _fmt(r.samples_used), r.S_size, r.P_size, repr(float(r.max_diameter))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "predicted": list(self.predicted_pareto),
            "terminated_by": self.terminated_by,
            "samples_used": _num(self.samples_used),
            "rounds": len(self.rounds),
        }


def _fmt(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else x


def paveba_beta(t, n_designs: int, n_objectives: int, delta: float):
    return 2.0 * np.log(4.0 * n_designs * n_objectives * np.square(t) / delta)


def gp_beta(t: int, n_designs: int, n_objectives: int, delta: float) -> float:
    return 2.0 * math.log(n_designs * n_objectives * math.pi**2 * t**2 / (6.0 * delta))


def eliminate(regions: dict, S: set, P: set, order: Order, epsilon: float) -> tuple[set, set]:
    """One discard/identify step. Returns the new ``(S, P)``."""
    cone = order.cone
    active = sorted(S | P)
    pos = {d: k for k, d in enumerate(active)}
    table = RegionTable([regions[d] for d in active], cone)
    shift = -epsilon * cone.central_direction
    distinct = ~table.identical

    defm = table.definitely(shift) & distinct
    # mutual definite relations only arise between numerically coincident regions
    strict = defm & ~(table.definitely(np.zeros_like(shift)).T & distinct)
    discarded = {d for d in S if strict[pos[d]].any()}
    S_new = S - discarded

    # identical regions only excuse each other when they are single points
    point = np.array([regions[d].diameter() == 0.0 for d in active])
    blocking = ~(table.identical & point[:, None])
    remaining = [pos[d] for d in sorted(S_new | P)]
    accept, reject = table.possibly_quick(shift)
    identified = set()
    for d in sorted(S_new):
        i = pos[d]
        others = [j for j in remaining if j != i and blocking[i, j]]
        if any(accept[i, j] for j in others):
            continue
        if any(table.possibly_pair(i, j, shift) for j in others if not reject[i, j]):
            continue
        identified.add(d)
    return S_new - identified, P | identified


def _final_prediction(S: set, P: set, means: np.ndarray, order: Order) -> list[int]:
    """``P`` plus the undecided designs whose mean estimates are Pareto among ``S | P``."""
    pred = set(P)
    if S:
        active = sorted(S | P)
        front = order.pareto_indices(means[active])
        pred |= {active[k] for k in front if active[k] in S}
    if not pred:
        pred = set(order.pareto_indices(means))
    return sorted(pred)


def _max_diameter(regions: dict, designs) -> float:
    return max((regions[d].diameter() for d in designs), default=0.0)


def _check_budget(budget, needed, what):
    if budget < needed:
        raise BudgetTooSmall(f"budget {budget} is below the {needed} evaluations {what}")


def naive_elimination(problem: TabularProblem, order: Order, config: AlgConfig) -> RunResult:
    """Sample every design ``budget // K`` times, return the Pareto set of the means."""
    K, D = problem.n_designs, problem.n_objectives
    _check_budget(config.budget, K, "needed to sample every design once")
    passes = int(config.budget // K)
    rng = np.random.default_rng(config.seed)
    model = EmpiricalModel(K, D, problem.noise_std, known_noise=config.known_noise)
    logs = []
    used = 0
    for t in range(1, passes + 1):
        for d in range(K):
            model.update_many(evaluate(problem, full_query(problem, d), rng))
        used += K
        _, scales = model.posterior_all()
        diam = float(np.max(2.0 * np.linalg.norm(scales, axis=1)))
        logs.append((t, used, diam))
    means, _ = model.posterior_all()
    pred = order.pareto_indices(means)
    rounds = [RoundLog(t, u, K, 0, dm) for t, u, dm in logs[:-1]]
    t, u, dm = logs[-1]
    rounds.append(RoundLog(t, u, 0, len(pred), dm))
    return RunResult(pred, rounds, "converged", used, sample_counts=model.counts.copy())


def paveba_run(problem: TabularProblem, order: Order, config: AlgConfig) -> RunResult:
    """Round-based elimination with empirical confidence regions.

    Each round samples every active design ``batch_size`` times and builds
    regions with ``beta_t = 2 ln(4 K D t^2 / delta)``. With rectangular
    regions and the componentwise cone this is the classic empirical-mean
    gap-elimination scheme for Pareto set identification.
    """
    K, D = problem.n_designs, problem.n_objectives
    b = int(config.batch_size)
    _check_budget(config.budget, K * b, "of the first round")
    rng = np.random.default_rng(config.seed)
    model = EmpiricalModel(K, D, problem.noise_std, known_noise=config.known_noise)
    S, P = set(range(K)), set()
    rounds: list[RoundLog] = []
    used = 0
    t = 0
    regions: dict = {}
    terminated = "budget_exhausted"
    while True:
        active = sorted(S | P)
        if used + len(active) * b > config.budget:
            break
        t += 1
        for d in active:
            model.update_many(evaluate(problem, full_query(problem, d, b), rng))
        used += len(active) * b
        means, scales = model.posterior_all()
        beta = paveba_beta(t, K, D, config.delta)
        regions = {d: region_from_summary(means[d], scales[d], beta, config.conf_shape) for d in active}
        S, P = eliminate(regions, S, P, order, config.epsilon)
        rounds.append(RoundLog(t, used, len(S), len(P), _max_diameter(regions, S | P)))
        if not S:
            terminated = "converged"
            break
    means, _ = model.posterior_all()
    pred = sorted(P) if not S else _final_prediction(S, P, means, order)
    return RunResult(pred, rounds, terminated, used, regions=regions, sample_counts=model.counts.copy())


def decoupled_paveba_run(problem: TabularProblem, order: Order, config: AlgConfig) -> RunResult:
    """Elimination with one (design, objective) evaluation per active design per round.

    The objective sampled for design ``d`` maximizes ``scale_j(d) / cost_j``;
    objectives never observed for ``d`` come first, lowest index first.
    Elimination starts once every active design has each objective observed.
    Each confidence face uses ``beta`` with the round counter replaced by the
    cell's sample count plus one. The budget counts cost-weighted samples.
    """
    K, D = problem.n_designs, problem.n_objectives
    costs = np.asarray(problem.costs if config.costs is None else config.costs, dtype=float)
    if costs.shape != (D,) or np.any(~np.isfinite(costs)) or np.any(costs <= 0):
        raise CostVectorInvalid(f"costs must be {D} positive finite numbers, got {costs.tolist()}")
    b = int(config.batch_size)
    _check_budget(config.budget, K * b * costs[0], "of the first round")
    rng = np.random.default_rng(config.seed)
    model = EmpiricalModel(K, D, problem.noise_std, known_noise=config.known_noise)
    S, P = set(range(K)), set()
    rounds: list[RoundLog] = []
    used = 0.0
    t = 0
    regions: dict = {}
    terminated = "budget_exhausted"
    while True:
        active = sorted(S | P)
        _, scales = model.posterior_all()
        picks = {}
        for d in active:
            unseen = np.flatnonzero(model.counts[d] == 0)
            picks[d] = int(unseen[0]) if unseen.size else int(np.argmax(scales[d] / costs))
        cost = float(sum(costs[picks[d]] for d in active)) * b
        if used + cost > config.budget:
            break
        t += 1
        for d in active:
            model.update_many(evaluate(problem, EvalQuery(d, (picks[d],), b), rng))
        used += cost
        means, scales = model.posterior_all()
        beta = paveba_beta(model.counts + 1, K, D, config.delta)
        regions = {d: region_from_summary(means[d], scales[d], beta[d], config.conf_shape) for d in active}
        if np.all(model.counts[active] > 0):
            S, P = eliminate(regions, S, P, order, config.epsilon)
        rounds.append(RoundLog(t, used, len(S), len(P), _max_diameter(regions, S | P)))
        if not S:
            terminated = "converged"
            break
    means, _ = model.posterior_all()
    pred = sorted(P) if not S else _final_prediction(S, P, means, order)
    return RunResult(pred, rounds, terminated, used, regions=regions, sample_counts=model.counts.copy())


def gp_pal_run(problem: TabularProblem, order: Order, config: AlgConfig) -> RunResult:
    """GP-based identification with rectangles intersected across rounds.

    Per round: build posterior boxes ``mean +- sqrt(beta_t) * std`` with
    ``beta_t = 2 ln(K D pi^2 t^2 / (6 delta))``, intersect them with the
    previous boxes, run the elimination step, then evaluate the
    ``batch_size`` active designs with the widest boxes (lowest index first
    on ties).
    """
    if config.conf_shape != "rect":
        raise ValueError("gp_pal_run intersects boxes across rounds and needs conf_shape='rect'")
    K, D = problem.n_designs, problem.n_objectives
    _check_budget(config.budget, 1, "needed for a single evaluation")
    b = int(config.batch_size)
    noise = config.gp_noise if config.gp_noise is not None else problem.noise_std
    model = GPModel(
        problem.designs, D,
        signal=config.gp_signal,
        lengthscale=config.gp_lengthscale,
        noise=max(noise, config.gp_noise_floor),
    )
    rng = np.random.default_rng(config.seed)
    S, P = set(range(K)), set()
    boxes: dict = {}
    rounds: list[RoundLog] = []
    trace = []
    used = 0
    t = 0
    terminated = "budget_exhausted"
    while True:
        t += 1
        active = sorted(S | P)
        if config.gp_grid and all(model.n_train(j) >= 2 for j in range(D)):
            fit_gp_hyperparams(model, config.gp_grid)
        means, stds = model.posterior_all()
        beta = gp_beta(t, K, D, config.delta)
        for d in active:
            new = region_from_summary(means[d], stds[d], beta, "rect")
            boxes[d] = new if d not in boxes else _refine(boxes[d], new)
        if config.trace_regions:
            trace.append({d: boxes[d] for d in active})
        S, P = eliminate(boxes, S, P, order, config.epsilon)
        if not S:
            rounds.append(RoundLog(t, used, 0, len(P), _max_diameter(boxes, P)))
            terminated = "converged"
            break
        if used + 1 > config.budget:
            rounds.append(RoundLog(t, used, len(S), len(P), _max_diameter(boxes, S | P)))
            break
        pool = sorted(S | P)
        diam = np.array([boxes[d].diameter() for d in pool])
        ranked = np.argsort(-diam, kind="stable")
        n_eval = int(min(b, len(pool), config.budget - used))
        for k in ranked[:n_eval]:
            model.update_many(evaluate(problem, full_query(problem, pool[k]), rng))
        used += n_eval
        rounds.append(RoundLog(t, used, len(S), len(P), float(diam.max())))
    means, _ = model.posterior_all()
    pred = sorted(P) if not S else _final_prediction(S, P, means, order)
    return RunResult(pred, rounds, terminated, used, regions=boxes, region_trace=trace)


def _refine(old: RectRegion, new: RectRegion) -> RectRegion:
    out = rect_intersect(old, new)
    if out.degenerate:
        # keep the collapsed point inside the previous box so boxes only shrink
        p = old.project(out.lower)
        out = RectRegion(p, p, degenerate=True)
    return out


ALGORITHMS = {
    "naive": naive_elimination,
    "paveba": paveba_run,
    "gp_pal": gp_pal_run,
    "decoupled_paveba": decoupled_paveba_run,
}
