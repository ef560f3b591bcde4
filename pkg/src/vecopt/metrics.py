"""Quality of a predicted Pareto set against the noiseless table.

The epsilon-F1 score shifts by ``epsilon * u`` along the cone's central
direction ``u``:

* precision: share of predicted designs that are epsilon-Pareto, i.e. no
  other design ``d'`` has ``f(d') - f(d) - eps*u`` in ``C``;
* recall: share of true Pareto designs ``d`` covered by some prediction
  ``p`` with ``p == d`` or ``f(p) + eps*u - f(d)`` in ``C``.

Hypervolume always uses the componentwise (orthant) measure.
"""

from __future__ import annotations

import math
import warnings
from typing import Iterable

import numpy as np

from vecopt._policy import POLICY
from vecopt.cones import Order
from vecopt.errors import DimensionMismatch, IndexOutOfRange


def _check_indices(predicted: Iterable[int], n: int) -> list[int]:
    idx = sorted(set(int(i) for i in predicted))
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise IndexOutOfRange(f"predicted indices must lie in [0, {n})")
    return idx


def eps_pareto_mask(objectives: np.ndarray, order: Order, epsilon: float) -> np.ndarray:
    """Boolean mask of designs that no other design epsilon-dominates."""
    Y = np.asarray(objectives, dtype=float)
    W = order.cone.W
    shift = epsilon * order.cone.central_direction
    diff = Y[None, :, :] - Y[:, None, :] - shift  # [d, d'] = f(d') - f(d) - eps*u
    inside = np.all(diff @ W.T >= -POLICY.membership_tol, axis=2)
    distinct = np.any(Y[None, :, :] != Y[:, None, :], axis=2)
    return ~np.any(inside & distinct, axis=1)


def eps_f1(predicted, problem, order: Order, epsilon: float = 0.0) -> float:
    Y = problem.objectives
    pred = _check_indices(predicted, Y.shape[0])
    if not pred:
        return 0.0
    good = eps_pareto_mask(Y, order, epsilon)
    precision = float(np.mean(good[pred]))
    true_front = order.pareto_indices(Y)
    W = order.cone.W
    shift = epsilon * order.cone.central_direction
    P = Y[pred]
    covered = 0
    for d in true_front:
        if d in pred:
            covered += 1
            continue
        gaps = (P + shift - Y[d]) @ W.T
        if np.any(np.all(gaps >= -POLICY.membership_tol, axis=1)):
            covered += 1
    recall = covered / len(true_front)
    if precision == 0 or recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _prepare(points, ref):
    ref = np.asarray(ref, dtype=float)
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return P.reshape(0, ref.shape[0]), ref
    if P.ndim != 2 or P.shape[1] != ref.shape[0]:
        raise DimensionMismatch(f"points of shape {P.shape} do not match reference of length {ref.shape[0]}")
    if np.any(P < ref):
        warnings.warn("points below the reference point were clipped to it", RuntimeWarning, stacklevel=3)
        P = np.maximum(P, ref)
    return P, ref


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((-P[:, 1], -P[:, 0]))
    area = 0.0
    best_y = ref[1]
    for x, y in P[order]:
        if y > best_y:
            area += (x - ref[0]) * (y - best_y)
            best_y = y
    return area


def _hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.argsort(-P[:, 2], kind="stable")]
    levels = np.append(P[:, 2], ref[2])
    vol = 0.0
    for k in range(P.shape[0]):
        height = levels[k] - levels[k + 1]
        if height > 0:
            vol += height * _hv2d(P[: k + 1, :2], ref[:2])
    return vol


def hypervolume_mc(points, ref, n_samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo hypervolume estimate and its standard error."""
    P, ref = _prepare(points, ref)
    if P.shape[0] == 0:
        return 0.0, 0.0
    hi = P.max(axis=0)
    box = float(np.prod(hi - ref))
    if box == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 50_000
    done = 0
    while done < n_samples:
        n = min(chunk, n_samples - done)
        S = ref + (hi - ref) * rng.random((n, ref.shape[0]))
        hits += int(np.any(np.all(S[:, None, :] <= P[None, :, :], axis=2), axis=1).sum())
        done += n
    frac = hits / n_samples
    return float(box * frac), float(box * math.sqrt(frac * (1.0 - frac) / n_samples))


def hypervolume(points, ref, *, mc_samples: int = 100_000, seed: int = 0, return_stderr: bool = False):
    """Lebesgue measure of the union of boxes ``[ref, p]``.

    Exact in two and three dimensions; Monte Carlo from four dimensions up,
    where ``return_stderr=True`` also returns the standard error (zero for the
    exact cases).
    """
    P, ref = _prepare(points, ref)
    D = ref.shape[0]
    if P.shape[0] == 0:
        value, se = 0.0, 0.0
    elif D == 1:
        value, se = float(P[:, 0].max() - ref[0]), 0.0
    elif D == 2:
        value, se = _hv2d(P, ref), 0.0
    elif D == 3:
        value, se = _hv3d(P, ref), 0.0
    else:
        value, se = hypervolume_mc(P, ref, mc_samples, seed)
    value, se = float(value), float(se)
    return (value, se) if return_stderr else value


def default_ref_point(problem) -> np.ndarray:
    return problem.objectives.min(axis=0)


def hv_discrepancy(predicted, problem, order: Order, ref=None, *, mc_samples: int = 100_000, seed: int = 0) -> float:
    """Hypervolume of the true front minus that of the predicted designs.

    Nonnegative whenever the cone sits inside the orthant. For wider cones
    the true front can miss componentwise-Pareto points and the value may go
    negative.
    """
    Y = problem.objectives
    pred = _check_indices(predicted, Y.shape[0])
    ref = default_ref_point(problem) if ref is None else np.asarray(ref, dtype=float)
    front = order.pareto_indices(Y)
    hv_true = hypervolume(Y[front], ref, mc_samples=mc_samples, seed=seed)
    hv_pred = hypervolume(Y[pred], ref, mc_samples=mc_samples, seed=seed) if pred else 0.0
    return float(hv_true - hv_pred)
