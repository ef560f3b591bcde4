"""Confidence regions and region-level dominance predicates.

Two region shapes are supported: axis-aligned boxes and ellipsoids
``{x : (x - c)^T A^{-1} (x - c) <= 1}``. Every "definite" comparison reduces
to support functions ``h_R(w) = sup_{x in R} w.x``, which are closed form for
both shapes. The "possible" comparison is a set-distance problem solved by
projected gradient on ``(a, b)`` with the cone variable eliminated by an exact
cone projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.optimize import lsq_linear, nnls

from vecopt._policy import POLICY
from vecopt.cones import Cone
from vecopt.errors import DimensionMismatch, EmptyInput, NonFinite, SolverDidNotConverge


def _vec(x, dim=None, name="vector") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1D, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {x.shape[0]}, expected {dim}")
    return x


@dataclass(frozen=True, eq=False)
class RectRegion:
    """Box ``[lower, upper]``.

    ``degenerate`` marks a point region produced by an empty intersection;
    algorithms still treat it as an ordinary (zero-width) box.
    """

    lower: np.ndarray
    upper: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        lower = _vec(self.lower, name="lower").copy()
        upper = _vec(self.upper, lower.shape[0], name="upper").copy()
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise NonFinite("rectangle bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("rectangle needs lower <= upper componentwise")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def point(cls, x) -> "RectRegion":
        x = _vec(x)
        return cls(x, x)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def support(self, w) -> float:
        w = _vec(w, self.dim, "direction")
        return float(np.sum(np.where(w >= 0, w * self.upper, w * self.lower)))

    def support_many(self, W: np.ndarray) -> np.ndarray:
        return np.where(W >= 0, W * self.upper, W * self.lower).sum(axis=1)

    def argmax(self, w) -> np.ndarray:
        """A point of the region maximizing ``w.x`` (lowest corner on ties)."""
        return np.where(np.asarray(w) > 0, self.upper, self.lower)

    def project(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _vec(x, self.dim)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def translate(self, shift) -> "RectRegion":
        shift = _vec(shift, self.dim, "shift")
        return RectRegion(self.lower + shift, self.upper + shift, self.degenerate)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def key(self) -> tuple:
        return ("rect", self.lower.tobytes(), self.upper.tobytes())

    def same_as(self, other) -> bool:
        return (
            isinstance(other, RectRegion)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )


@dataclass(frozen=True, eq=False)
class EllipsoidRegion:
    """Ellipsoid with ``center`` and symmetric positive-definite ``shape``."""

    center: np.ndarray
    shape: np.ndarray
    _eig: tuple = field(init=False, repr=False)

    def __post_init__(self):
        c = _vec(self.center, name="center").copy()
        A = np.array(self.shape, dtype=float)
        if A.shape != (c.shape[0], c.shape[0]):
            raise DimensionMismatch(f"shape matrix must be {c.shape[0]}x{c.shape[0]}, got {A.shape}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A))):
            raise NonFinite("ellipsoid parameters must be finite")
        if np.max(np.abs(A - A.T), initial=0.0) > 1e-12:
            raise ValueError("ellipsoid shape matrix must be symmetric")
        A = 0.5 * (A + A.T)
        lam, Q = np.linalg.eigh(A)
        if lam[0] <= 0:
            raise ValueError("ellipsoid shape matrix must be positive definite")
        c.setflags(write=False)
        A.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", A)
        object.__setattr__(self, "_eig", (lam, Q))

    @classmethod
    def ball(cls, center, radius: float) -> "EllipsoidRegion":
        center = _vec(center)
        return cls(center, radius**2 * np.eye(center.shape[0]))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def support(self, w) -> float:
        w = _vec(w, self.dim, "direction")
        return float(w @ self.center + math.sqrt(max(w @ self.shape @ w, 0.0)))

    def support_many(self, W: np.ndarray) -> np.ndarray:
        quad = np.einsum("ij,jk,ik->i", W, self.shape, W)
        return W @ self.center + np.sqrt(np.maximum(quad, 0.0))

    def argmax(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        Aw = self.shape @ w
        q = float(w @ Aw)
        if q <= 0:
            return self.center.copy()
        return self.center + Aw / math.sqrt(q)

    def project(self, x) -> np.ndarray:
        lam, Q = self._eig
        y = Q.T @ (np.asarray(x, dtype=float) - self.center)
        if np.sum(y * y / lam) <= 1.0:
            return np.asarray(x, dtype=float).copy()
        # Find mu >= 0 with sum lam*y^2/(lam+mu)^2 = 1; phi is convex and
        # decreasing, so Newton from mu = 0 increases monotonically to the root.
        mu = 0.0
        for _ in range(200):
            den = lam + mu
            phi = np.sum(lam * y * y / den**2) - 1.0
            if phi <= 1e-15:
                break
            dphi = -2.0 * np.sum(lam * y * y / den**3)
            step = phi / dphi
            mu -= step
            if abs(step) <= 1e-15 * max(1.0, mu):
                break
        z = lam * y / (lam + mu)
        return self.center + Q @ z

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _vec(x, self.dim)
        lam, Q = self._eig
        y = Q.T @ (x - self.center)
        return bool(np.sum(y * y / lam) <= 1.0 + tol)

    def translate(self, shift) -> "EllipsoidRegion":
        shift = _vec(shift, self.dim, "shift")
        return EllipsoidRegion(self.center + shift, self.shape)

    def diameter(self) -> float:
        return 2.0 * math.sqrt(self._eig[0][-1])

    def key(self) -> tuple:
        return ("ellipsoid", self.center.tobytes(), self.shape.tobytes())

    def same_as(self, other) -> bool:
        return (
            isinstance(other, EllipsoidRegion)
            and np.array_equal(self.center, other.center)
            and np.array_equal(self.shape, other.shape)
        )


Region = Union[RectRegion, EllipsoidRegion]


def support(region: Region, w) -> float:
    return region.support(w)


def diameter(region: Region) -> float:
    return region.diameter()


def rect_intersect(a: RectRegion, b: RectRegion) -> RectRegion:
    """Intersect two boxes.

    When the boxes do not overlap in some coordinate the result collapses to
    the midpoint of the overlap gap in that coordinate (and to the middle of
    the overlap elsewhere) and is flagged ``degenerate``.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot intersect boxes of dimension {a.dim} and {b.dim}")
    lo = np.maximum(a.lower, b.lower)
    hi = np.minimum(a.upper, b.upper)
    if np.all(lo <= hi):
        return RectRegion(lo, hi, a.degenerate or b.degenerate)
    mid = 0.5 * (lo + hi)
    return RectRegion(mid, mid, degenerate=True)


def _check_dims(ra: Region, rb: Region, cone: Cone):
    if ra.dim != rb.dim or ra.dim != cone.dim:
        raise DimensionMismatch(f"region dims {ra.dim}, {rb.dim} and cone dim {cone.dim} differ")


def definitely_leq(ra: Region, rb: Region, cone: Cone) -> bool:
    """True iff every point of ``ra`` is dominated by every point of ``rb``."""
    _check_dims(ra, rb, cone)
    W = cone.W
    inf_b = -rb.support_many(-W)
    sup_a = ra.support_many(W)
    return bool(np.all(inf_b - sup_a >= -POLICY.region_tol))


def _polar_multipliers(W: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``argmin_{lam >= 0} ||x + W^T lam||``.

    ``scipy.optimize.nnls`` occasionally stops at a non-optimal point on
    overcomplete systems, so its answer is checked against the projection
    KKT conditions (feasibility and complementarity) and recomputed with
    bounded-variable least squares when they fail.
    """
    lam, _ = nnls(W.T, -x)
    p = x + W.T @ lam
    slack = W @ p
    scale = max(1.0, float(np.linalg.norm(x)))
    if np.min(slack) >= -1e-10 * scale and abs(float(lam @ slack)) <= 1e-10 * scale * scale:
        return lam
    res = lsq_linear(W.T, -x, bounds=(0.0, np.inf), method="bvls", tol=1e-14)
    return np.maximum(res.x, 0.0)


def project_onto_cone(x, cone: Cone, method: str = "dykstra", return_multipliers: bool = False):
    """Euclidean projection of ``x`` onto ``{z : W z >= 0}``.

    ``method="dykstra"`` runs Dykstra's alternating projections over the
    halfspaces. ``method="nnls"`` instead solves the dual problem
    ``min_{lam >= 0} ||x + W^T lam||`` (Moreau decomposition) and can also
    return the multipliers, which certify the residual lies in the polar cone.
    """
    x = _vec(x, cone.dim)
    W = cone.W
    if method == "nnls":
        if np.all(W @ x >= 0):
            lam = np.zeros(W.shape[0])
            p = x.copy()
        else:
            lam = _polar_multipliers(W, x)
            p = x + W.T @ lam
        return (p, lam) if return_multipliers else p
    if method != "dykstra":
        raise ValueError(f"unknown projection method {method!r}")
    if return_multipliers:
        raise ValueError("multipliers are only available with method='nnls'")
    if np.all(W @ x >= 0):
        return x.copy()
    m = W.shape[0]
    p = x.copy()
    incr = np.zeros((m, x.shape[0]))
    for _ in range(POLICY.dykstra_max_sweeps):
        p_start = p
        for i in range(m):
            y = p + incr[i]
            s = W[i] @ y
            p_new = y - s * W[i] if s < 0 else y
            incr[i] = y - p_new
            p = p_new
        if np.max(np.abs(p - p_start)) <= POLICY.dykstra_step_tol * max(1.0, np.max(np.abs(p))):
            if np.all(W @ p >= -POLICY.dykstra_feas_tol):
                return p
    raise SolverDidNotConverge(
        f"Dykstra projection did not converge in {POLICY.dykstra_max_sweeps} sweeps"
    )


def set_distance_bounds(ra: Region, rb: Region, cone: Cone, slack_eps: float = 0.0):
    """Bracket ``min_{a in ra, b in rb} dist(b - a, C)``.

    Returns ``(lower, upper, a, b)``. Iterates until the bracket decides
    ``distance <= slack_eps + solver_tol`` or projected gradient stalls.
    """
    _check_dims(ra, rb, cone)
    thresh = slack_eps + POLICY.solver_tol
    W = cone.W
    u = cone.central_direction
    a = ra.argmax(-u)
    b = rb.argmax(u)
    # Rows of W are unit vectors of the dual cone, so each gives a separation bound.
    lower = max(0.0, float(np.max(ra.support_many(-W) * -1.0 - rb.support_many(W))))
    upper = math.inf
    f_prev = math.inf
    for it in range(POLICY.pgd_max_iter):
        z = b - a
        p, lam = project_onto_cone(z, cone, method="nnls", return_multipliers=True)
        r = z - p
        f = float(r @ r)
        upper = min(upper, math.sqrt(f))
        if upper <= thresh:
            return lower, upper, a, b
        g = W.T @ lam  # = -r, a nonnegative combination of dual-cone rows
        gn = float(np.linalg.norm(g))
        if gn > 0:
            w = g / gn
            lower = max(lower, -(rb.support(w) + ra.support(-w)))
        if lower > thresh:
            return lower, upper, a, b
        # relative test: near a touching configuration f itself is tiny
        if f_prev - f < POLICY.pgd_decrease_tol * f_prev:
            return lower, upper, a, b
        f_prev = f
        # step 1/L with L = 4 for the gradient of dist^2(b - a, C) in (a, b)
        a = ra.project(a + 0.5 * r)
        b = rb.project(b - 0.5 * r)
    raise SolverDidNotConverge(
        "set-distance solver hit its iteration cap",
        lower=lower,
        upper=upper,
        decided=upper <= thresh or lower > thresh,
    )


def possibly_leq(ra: Region, rb: Region, cone: Cone, slack_eps: float = 0.0) -> bool:
    """True iff some ``a in ra`` and ``b in rb`` have ``dist(b - a, C) <= slack_eps``.

    A solver tolerance ``POLICY.solver_tol`` is added to the slack.
    """
    _check_dims(ra, rb, cone)
    if not math.isfinite(slack_eps) or slack_eps < 0:
        raise ValueError("slack_eps must be finite and nonnegative")
    decided = _quick_possibly(ra, rb, cone, slack_eps)
    if decided is not None:
        return decided
    lower, upper, _, _ = set_distance_bounds(ra, rb, cone, slack_eps)
    return upper <= slack_eps + POLICY.solver_tol


def _quick_possibly(ra: Region, rb: Region, cone: Cone, slack_eps: float):
    W = cone.W
    u = cone.central_direction
    sep = np.max(ra.support_many(-W) * -1.0 - rb.support_many(W))
    if sep > slack_eps + POLICY.solver_tol:
        return False
    z = rb.argmax(u) - ra.argmax(-u)
    if np.all(W @ z >= 0):
        return True
    return None


def pessimistic_pareto(regions: Sequence[Region], cone: Cone) -> list[int]:
    """Indices whose region is not definitely dominated by another, distinct region."""
    if len(regions) == 0:
        raise EmptyInput("pessimistic_pareto needs at least one region")
    dim = regions[0].dim
    if any(r.dim != dim for r in regions):
        raise DimensionMismatch("regions must share one dimension")
    table = RegionTable(regions, cone)
    dom = table.definitely(np.zeros(dim)) & ~table.identical
    np.fill_diagonal(dom, False)
    return [int(i) for i in np.flatnonzero(~dom.any(axis=1))]


class RegionTable:
    """Support values of many regions against one cone, for pairwise predicates.

    ``definitely(shift)[i, j]`` is ``definitely_leq(R_i, R_j + shift)``. The
    ``possibly`` method answers the same pairs for ``possibly_leq`` with zero
    slack, using closed-form accept/reject tests first and the iterative
    solver only on pairs those tests leave open.
    """

    def __init__(self, regions: Sequence[Region], cone: Cone):
        self.regions = list(regions)
        self.cone = cone
        W = cone.W
        u = cone.central_direction
        self.up = np.array([r.support_many(W) for r in self.regions])
        self.lo = -np.array([r.support_many(-W) for r in self.regions])
        self.top = np.array([r.argmax(u) for r in self.regions])
        self.bottom = np.array([r.argmax(-u) for r in self.regions])
        keys = [r.key() for r in self.regions]
        groups: dict = {}
        for k, key in enumerate(keys):
            groups.setdefault(key, []).append(k)
        group_id = np.empty(len(keys), dtype=np.int64)
        for g, members in enumerate(groups.values()):
            group_id[members] = g
        self.identical = group_id[:, None] == group_id[None, :]

    def definitely(self, shift) -> np.ndarray:
        ws = self.cone.W @ shift
        gap = (self.lo + ws)[None, :, :] - self.up[:, None, :]
        return np.all(gap >= -POLICY.region_tol, axis=2)

    def possibly_quick(self, shift):
        """Return ``(accept, reject)`` boolean matrices from the closed-form tests."""
        W = self.cone.W
        ws = W @ shift
        sep = np.max(self.lo[:, None, :] - (self.up + ws)[None, :, :], axis=2)
        reject = sep > POLICY.solver_tol
        z = (self.top + shift)[None, :, :] - self.bottom[:, None, :]
        accept = np.all(z @ W.T >= 0, axis=2) & ~reject
        return accept, reject

    def possibly_pair(self, i: int, j: int, shift) -> bool:
        return possibly_leq(self.regions[i], self.regions[j].translate(shift), self.cone, 0.0)
