"""Synthetic benchmark instances with known Pareto sets."""

from __future__ import annotations

import numpy as np

from vecopt.cones import Cone
from vecopt.problems import TabularProblem
from vecopt.regions import project_onto_cone


def ring_problem(n_designs: int = 20, noise_std: float = 0.1) -> TabularProblem:
    """Designs evenly spaced on the unit circle; objectives ``(cos phi, sin phi)``."""
    phi = 2.0 * np.pi * np.arange(n_designs) / n_designs
    Y = np.column_stack([np.cos(phi), np.sin(phi)])
    return TabularProblem(phi[:, None], Y, noise_std=noise_std, name=f"ring{n_designs}")


def smooth_problem(n_designs: int = 30, noise_std: float = 0.01, scale: float = 1.5) -> TabularProblem:
    """1D grid on ``[0, 3 pi / 2]`` with objectives ``scale * (sin x, cos x)``.

    At the default scale every design's epsilon-dominance status (for
    ``epsilon = 0.1`` and the orthant) is at least 0.03 away from flipping,
    so the instance is decidable at desk-scale budgets.
    """
    x = np.linspace(0.0, 1.5 * np.pi, n_designs)
    Y = scale * np.column_stack([np.sin(x), np.cos(x)])
    return TabularProblem(x[:, None], Y, noise_std=noise_std, name=f"smooth{n_designs}")


def _separated(z: np.ndarray, cone: Cone, margin: float) -> bool:
    # each pairwise difference must sit clearly inside C or clearly away from it
    inner = np.min(cone.W @ z)
    if inner >= margin:
        return True
    if inner >= 0:
        return False
    return float(np.linalg.norm(z - project_onto_cone(z, cone, method="nnls"))) >= margin


def random_problem(
    rng: np.random.Generator,
    n_designs: int,
    cone: Cone,
    *,
    margin: float = 0.005,
    feature_dim: int = 2,
    noise_std: float = 0.0,
    max_tries: int = 200_000,
) -> TabularProblem:
    """Uniform objectives in the unit cube, every ordered pair ``margin``-separated
    from the cone boundary, with uniform features in the unit square.
    """
    D = cone.dim
    pts: list[np.ndarray] = []
    tries = 0
    while len(pts) < n_designs:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not draw a separated instance; lower the margin")
        y = rng.random(D)
        if all(_separated(y - p, cone, margin) and _separated(p - y, cone, margin) for p in pts):
            pts.append(y)
    X = rng.random((n_designs, feature_dim))
    return TabularProblem(X, np.array(pts), noise_std=noise_std, name=f"random{n_designs}")
