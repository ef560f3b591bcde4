"""Polyhedral ordering cones and the partial orders they induce.

A cone is stored in halfspace form ``C = {x : W x >= 0}``. The induced order
is ``mu <=_C nu`` iff ``nu - mu`` lies in ``C``. Every objective is
maximized; minimization objectives are sign-flipped when a problem is
loaded, so nothing in this module knows about "sense".

The 2D constructor takes the *total* aperture of the cone about the
``(1, 1)`` diagonal, so ``cone_theta_2d(90)`` is the nonnegative quadrant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linprog

from vecopt._policy import POLICY
from vecopt.errors import (
    DimensionMismatch,
    EmptyInput,
    EmptyInterior,
    InvalidAngle,
    NonFinite,
    NotPointed,
    TooFewFacets,
)


@dataclass(frozen=True, eq=False)
class Cone:
    """Pointed polyhedral cone ``{x : W x >= 0}`` with unit-norm rows.

    Build instances through the ``cone_*`` constructors, which validate the
    matrix and compute ``central_direction``.
    """

    W: np.ndarray
    central_direction: np.ndarray
    kind: str = "matrix"
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    @property
    def n_halfspaces(self) -> int:
        return self.W.shape[0]

    def contains(self, x, tol: float | None = None) -> bool:
        tol = POLICY.membership_tol if tol is None else tol
        x = _as_vector(x, self.dim)
        return bool(np.all(self.W @ x >= -tol))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"type": self.kind, "W": self.W.tolist()}
        out.update(self.params)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __repr__(self) -> str:
        return f"Cone(kind={self.kind!r}, dim={self.dim}, m={self.n_halfspaces})"


def _as_vector(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != dim:
        raise DimensionMismatch(f"expected a vector of length {dim}, got shape {x.shape}")
    return x


def _normalize_rows(W: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(W, axis=1)
    if np.any(norms == 0):
        raise NotPointed("zero row in halfspace matrix")
    # Rows already at unit norm are kept bit-for-bit so JSON round-trips are exact.
    keep = np.abs(norms - 1.0) <= 4 * np.finfo(float).eps
    scale = np.where(keep, 1.0, norms)
    return W / scale[:, None]


def _central_direction(W: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve ``max_{|u|_inf <= 1} min_i w_i.u`` as a small LP."""
    m, D = W.shape
    # variables: u (D), t (1); minimize -t subject to t - W u <= 0
    c = np.zeros(D + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-W, np.ones((m, 1))])
    b_ub = np.zeros(m)
    bounds = [(-1.0, 1.0)] * D + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise EmptyInterior(f"interior-direction LP failed: {res.message}")
    u = res.x[:D]
    t = float(-res.fun)
    return u, t


def cone_from_matrix(W, *, kind: str = "matrix", params: dict | None = None) -> Cone:
    """Validate a halfspace matrix and build a cone from it.

    Rows are scaled to unit norm. Raises ``NotPointed`` if ``rank(W) < D``
    and ``EmptyInterior`` if no direction is strictly inside every halfspace.
    """
    W = np.array(W, dtype=float)
    if W.ndim == 1:
        W = W[None, :]
    if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
        raise DimensionMismatch(f"halfspace matrix must be 2D and nonempty, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise NonFinite("halfspace matrix has non-finite entries")
    W = _normalize_rows(W)
    m, D = W.shape
    sv = np.linalg.svd(W, compute_uv=False)
    rank = int(np.sum(sv > POLICY.rank_rtol * sv[0]))
    if m < D or rank < D:
        raise NotPointed(f"rank(W) = {rank} < {D}; cone contains a line")
    u, t = _central_direction(W)
    if t <= POLICY.interior_tol:
        raise EmptyInterior(f"max-min interior margin {t:.3g} is not positive")
    u = u / np.linalg.norm(u)
    W.setflags(write=False)
    u.setflags(write=False)
    return Cone(W=W, central_direction=u, kind=kind, params=dict(params or {}))


def componentwise_cone(dim: int) -> Cone:
    """The nonnegative orthant of ``R^dim``: ordinary Pareto dominance."""
    if dim < 1:
        raise DimensionMismatch("dimension must be positive")
    return cone_from_matrix(np.eye(dim), kind="componentwise", params={"dim": dim})


def cone_theta_2d(aperture_deg: float) -> Cone:
    """2D cone of total aperture ``aperture_deg`` centred on the (1, 1) diagonal.

    The boundary rays sit at ``45 - theta/2`` and ``45 + theta/2`` degrees.
    ``theta = 90`` gives the nonnegative quadrant.
    """
    theta = float(aperture_deg)
    if not (0.0 < theta < 180.0) or not math.isfinite(theta):
        raise InvalidAngle(f"aperture must be in (0, 180) degrees, got {aperture_deg}")
    a1 = math.radians(45.0 - theta / 2.0)
    a2 = math.radians(45.0 + theta / 2.0)
    W = np.array(
        [
            [-math.sin(a1), math.cos(a1)],
            [math.sin(a2), -math.cos(a2)],
        ]
    )
    return cone_from_matrix(W, kind="theta2d", params={"theta": theta})


def _icecream_basis() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = np.ones(3) / math.sqrt(3.0)
    basis = []
    for v in (np.array([1.0, -1.0, 0.0]), np.array([1.0, 1.0, -2.0])):
        v = v - (v @ d) * d
        for b in basis:
            v = v - (v @ b) * b
        basis.append(v / np.linalg.norm(v))
    return d, basis[0], basis[1]


def icecream_generators(half_angle_deg: float, facets: int) -> np.ndarray:
    """Rays on the circular cone boundary spanning the inner approximation."""
    alpha = math.radians(half_angle_deg)
    d, e1, e2 = _icecream_basis()
    phis = 2.0 * math.pi * np.arange(facets) / facets
    return (
        math.cos(alpha) * d[None, :]
        + math.sin(alpha) * (np.cos(phis)[:, None] * e1[None, :] + np.sin(phis)[:, None] * e2[None, :])
    )


def cone_icecream_3d(half_angle_deg: float, facets: int) -> Cone:
    """Inner polyhedral approximation of the circular cone about (1, 1, 1).

    The ``facets`` generators lie on the circular cone, so the polyhedral
    cone is contained in it.
    """
    alpha = float(half_angle_deg)
    if not (0.0 < alpha < 90.0) or not math.isfinite(alpha):
        raise InvalidAngle(f"half-angle must be in (0, 90) degrees, got {half_angle_deg}")
    if int(facets) != facets or facets < 3:
        raise TooFewFacets(f"need at least 3 facets, got {facets}")
    facets = int(facets)
    d = np.ones(3) / math.sqrt(3.0)
    g = icecream_generators(alpha, facets)
    rows = []
    for j in range(facets):
        n = np.cross(g[j], g[(j + 1) % facets])
        if n @ d < 0:
            n = -n
        rows.append(n / np.linalg.norm(n))
    return cone_from_matrix(np.array(rows), kind="icecream3d", params={"alpha": alpha, "facets": facets})


def cone_from_dict(spec: dict[str, Any]) -> Cone:
    """Inverse of ``Cone.to_dict``; also accepts the CLI order-spec JSON."""
    allowed = {"type", "W", "theta", "alpha", "facets", "dim"}
    unknown = set(spec) - allowed
    if unknown:
        raise ValueError(f"unknown cone keys: {sorted(unknown)}")
    kind = spec.get("type")
    if kind == "matrix":
        if "W" not in spec:
            raise ValueError("matrix cone needs 'W'")
        return cone_from_matrix(spec["W"])
    if kind == "componentwise":
        if "dim" in spec:
            return componentwise_cone(int(spec["dim"]))
        if "W" in spec:
            return componentwise_cone(len(spec["W"][0]))
        raise ValueError("componentwise cone needs 'dim'")
    if kind == "theta2d":
        return cone_theta_2d(spec["theta"])
    if kind == "icecream3d":
        return cone_icecream_3d(spec["alpha"], spec["facets"])
    raise ValueError(f"unknown cone type {kind!r}")


def cone_from_json(text: str) -> Cone:
    return cone_from_dict(json.loads(text))


class Order:
    """Partial order ``<=_C`` induced by a cone (maximization convention)."""

    def __init__(self, cone: Cone):
        self.cone = cone

    @classmethod
    def componentwise(cls, dim: int) -> "Order":
        return cls(componentwise_cone(dim))

    @property
    def dim(self) -> int:
        return self.cone.dim

    def dominates(self, mu, nu) -> bool:
        """True iff ``mu <=_C nu``, i.e. ``nu`` is at least as good as ``mu``."""
        mu = _as_vector(mu, self.dim)
        nu = _as_vector(nu, self.dim)
        return bool(np.all(self.cone.W @ (nu - mu) >= -POLICY.membership_tol))

    def dominance_matrix(self, points) -> np.ndarray:
        """``M[i, j]`` is True when ``points[j] - points[i]`` is a nonzero cone element."""
        P = np.asarray(points, dtype=float)
        diff = P[None, :, :] - P[:, None, :]  # diff[i, j] = p_j - p_i
        inside = np.all(diff @ self.cone.W.T >= -POLICY.membership_tol, axis=2)
        nonzero = np.any(diff != 0.0, axis=2)
        return inside & nonzero

    def pareto_indices(self, points) -> list[int]:
        """Indices of points not strictly dominated by any other point.

        Exactly equal vectors never dominate each other, so duplicates on the
        front are all kept.
        """
        P = np.asarray(points, dtype=float)
        if P.ndim != 2 or P.shape[0] == 0:
            if P.size == 0:
                raise EmptyInput("pareto_indices needs at least one point")
            raise DimensionMismatch(f"points must form a 2D array, got shape {P.shape}")
        if P.shape[1] != self.dim:
            raise DimensionMismatch(f"points have dimension {P.shape[1]}, cone has {self.dim}")
        dominated = self.dominance_matrix(P).any(axis=1)
        return [int(i) for i in np.flatnonzero(~dominated)]

    def __repr__(self) -> str:
        return f"Order({self.cone!r})"


def pareto_indices(order: Order, points: Sequence) -> list[int]:
    return order.pareto_indices(points)


def dominates(order: Order, mu, nu) -> bool:
    return order.dominates(mu, nu)
