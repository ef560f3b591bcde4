"""Belief models over each design's objective vector.

Both models accept coupled observations (every objective of a design at once)
and decoupled ones (a single objective), and both report a
``PosteriorSummary`` per design from which confidence regions are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from vecopt._policy import POLICY
from vecopt.errors import IndexOutOfRange, InsufficientData, ModelError
from vecopt.regions import EllipsoidRegion, RectRegion


@dataclass(frozen=True)
class Observation:
    """Noisy values for some objectives of one design.

    ``values`` is a tuple of ``(objective_index, value)`` pairs.
    """

    design_index: int
    values: tuple

    def __post_init__(self):
        vals = tuple((int(j), float(y)) for j, y in self.values)
        idx = [j for j, _ in vals]
        if len(set(idx)) != len(idx):
            raise ValueError("objective indices must be unique within an observation")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class PosteriorSummary:
    mean: np.ndarray
    scale: np.ndarray


class _Model:
    n_designs: int
    n_objectives: int

    def _check_design(self, i: int):
        if not (0 <= i < self.n_designs):
            raise IndexOutOfRange(f"design index {i} outside [0, {self.n_designs})")

    def _check_obs(self, obs: Observation):
        self._check_design(obs.design_index)
        for j, _ in obs.values:
            if not (0 <= j < self.n_objectives):
                raise IndexOutOfRange(f"objective index {j} outside [0, {self.n_objectives})")

    def update_many(self, observations: Iterable[Observation]):
        for obs in observations:
            self.update(obs)

    def posterior_all(self) -> tuple[np.ndarray, np.ndarray]:
        rows = [self.posterior(i) for i in range(self.n_designs)]
        return np.array([r.mean for r in rows]), np.array([r.scale for r in rows])

    def confidence_region(self, design_index: int, beta, shape: str = "rect"):
        """Region ``mean +- sqrt(beta) * scale``.

        ``beta`` may be a scalar or one value per objective. The ellipsoid
        variant is axis-aligned with ``A = beta * diag(scale^2)``.
        """
        post = self.posterior(design_index)
        return region_from_summary(post.mean, post.scale, beta, shape)


def region_from_summary(mean, scale, beta, shape: str = "rect"):
    beta = np.broadcast_to(np.asarray(beta, dtype=float), np.shape(mean))
    if not np.all(np.isfinite(beta)) or np.any(beta <= 0):
        raise ValueError("beta must be finite and positive")
    if shape == "rect":
        half = np.sqrt(beta) * scale
        return RectRegion(mean - half, mean + half)
    if shape == "ellipsoid":
        diag = np.maximum(beta * np.asarray(scale) ** 2, POLICY.scale_floor)
        return EllipsoidRegion(mean, np.diag(diag))
    raise ValueError(f"unknown region shape {shape!r}")


class EmpiricalModel(_Model):
    """Running mean and variance of every (design, objective) cell.

    The uncertainty scale is the standard error ``sigma_hat / sqrt(n)``.
    ``sigma_hat`` is the sample standard deviation once a cell holds two
    samples, and ``noise_std_prior`` before that. With ``known_noise=True``
    the prior is used regardless of the sample count.
    """

    def __init__(self, n_designs: int, n_objectives: int, noise_std_prior: float, known_noise: bool = False):
        if noise_std_prior < 0:
            raise ValueError("noise_std_prior must be nonnegative")
        self.n_designs = int(n_designs)
        self.n_objectives = int(n_objectives)
        self.noise_std_prior = float(noise_std_prior)
        self.known_noise = known_noise
        shape = (self.n_designs, self.n_objectives)
        self.counts = np.zeros(shape, dtype=np.int64)
        self.means = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def update(self, obs: Observation):
        self._check_obs(obs)
        i = obs.design_index
        for j, y in obs.values:
            n = self.counts[i, j] + 1
            delta = y - self.means[i, j]
            self.means[i, j] += delta / n
            self.m2[i, j] += delta * (y - self.means[i, j])
            self.counts[i, j] = n

    def variance(self) -> np.ndarray:
        """Sample variance per cell (NaN where fewer than two samples)."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts >= 2, self.m2 / np.maximum(self.counts - 1, 1), np.nan)

    def _scales(self, counts, m2):
        if self.known_noise:
            sigma = np.full(counts.shape, self.noise_std_prior)
        else:
            var = np.where(counts >= 2, np.maximum(m2, 0.0) / np.maximum(counts - 1, 1), self.noise_std_prior**2)
            sigma = np.sqrt(var)
        return sigma / np.sqrt(np.maximum(counts, 1))

    def posterior(self, design_index: int) -> PosteriorSummary:
        self._check_design(design_index)
        i = design_index
        return PosteriorSummary(self.means[i].copy(), self._scales(self.counts[i], self.m2[i]))

    def posterior_all(self):
        return self.means.copy(), self._scales(self.counts, self.m2)


def rbf_kernel(X1: np.ndarray, X2: np.ndarray, signal: float, lengthscale: float) -> np.ndarray:
    d2 = (
        np.sum(X1 * X1, axis=1)[:, None]
        + np.sum(X2 * X2, axis=1)[None, :]
        - 2.0 * X1 @ X2.T
    )
    np.maximum(d2, 0.0, out=d2)
    return signal**2 * np.exp(-0.5 * d2 / lengthscale**2)


def _jittered_cholesky(K: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        pass
    jitter = POLICY.jitter_start
    eye = np.eye(K.shape[0])
    while jitter <= POLICY.jitter_max:
        try:
            return np.linalg.cholesky(K + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise ModelError("kernel matrix is not positive definite even with maximal jitter")


class _ObjectiveGP:
    """Zero-mean GP for one objective with an RBF kernel."""

    def __init__(self, signal: float, lengthscale: float, noise: float):
        self.set_params(signal, lengthscale, noise)
        self.X: list[np.ndarray] = []
        self.y: list[float] = []
        self._chol = None
        self._alpha = None

    def set_params(self, signal, lengthscale, noise):
        if min(signal, lengthscale, noise) <= 0:
            raise ValueError("GP hyperparameters must be positive")
        self.signal = float(signal)
        self.lengthscale = float(lengthscale)
        self.noise = float(noise)
        self._chol = None

    def add(self, x, y):
        self.X.append(np.asarray(x, dtype=float))
        self.y.append(float(y))
        self._chol = None

    def _factor(self):
        if self._chol is None and self.y:
            X = np.array(self.X)
            K = rbf_kernel(X, X, self.signal, self.lengthscale)
            K[np.diag_indices_from(K)] += self.noise**2
            self._chol = _jittered_cholesky(K)
            self._alpha = cho_solve((self._chol, True), np.array(self.y))

    def predict(self, Xq: np.ndarray):
        """Posterior mean and variance of the latent function at ``Xq``."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        prior_var = np.full(Xq.shape[0], self.signal**2)
        if not self.y:
            return np.zeros(Xq.shape[0]), prior_var
        self._factor()
        Ks = rbf_kernel(np.array(self.X), Xq, self.signal, self.lengthscale)
        mean = Ks.T @ self._alpha
        v = solve_triangular(self._chol, Ks, lower=True)
        var = prior_var - np.sum(v * v, axis=0)
        return mean, np.maximum(var, 0.0)

    def log_marginal_likelihood(self) -> float:
        self._factor()
        y = np.array(self.y)
        return float(
            -0.5 * y @ self._alpha
            - np.sum(np.log(np.diag(self._chol)))
            - 0.5 * len(y) * math.log(2.0 * math.pi)
        )


class GPModel(_Model):
    """Independent RBF Gaussian processes, one per objective, over design features."""

    def __init__(self, features, n_objectives: int, signal=1.0, lengthscale=1.0, noise=0.1):
        X = np.asarray(features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        self.features = X
        self.n_designs = X.shape[0]
        self.n_objectives = int(n_objectives)
        params = [self._per_objective(p) for p in (signal, lengthscale, noise)]
        self.gps = [_ObjectiveGP(params[0][j], params[1][j], params[2][j]) for j in range(self.n_objectives)]

    def _per_objective(self, value):
        arr = np.broadcast_to(np.asarray(value, dtype=float), (self.n_objectives,))
        return [float(v) for v in arr]

    def hyperparams(self) -> list[tuple[float, float, float]]:
        return [(g.signal, g.lengthscale, g.noise) for g in self.gps]

    def update(self, obs: Observation):
        self._check_obs(obs)
        x = self.features[obs.design_index]
        for j, y in obs.values:
            self.gps[j].add(x, y)
        for j, _ in obs.values:
            self.gps[j]._factor()

    def n_train(self, objective: int) -> int:
        return len(self.gps[objective].y)

    def predict(self, Xq):
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        means, varis = zip(*(g.predict(Xq) for g in self.gps))
        return np.array(means).T, np.array(varis).T

    def posterior(self, design_index: int) -> PosteriorSummary:
        self._check_design(design_index)
        mean, var = self.predict(self.features[design_index : design_index + 1])
        return PosteriorSummary(mean[0], np.sqrt(var[0]))

    def posterior_all(self):
        mean, var = self.predict(self.features)
        return mean, np.sqrt(var)


def fit_gp_hyperparams(model: GPModel, grid: Sequence[tuple[float, float, float]]):
    """Pick, per objective, the ``(signal, lengthscale, noise)`` triple with the
    highest exact log marginal likelihood. Earlier grid entries win ties.

    The chosen triples are installed in ``model`` and returned.
    """
    grid = [tuple(float(v) for v in g) for g in grid]
    if not grid:
        raise ValueError("hyperparameter grid is empty")
    chosen = []
    for j, gp in enumerate(model.gps):
        if len(gp.y) < 2:
            raise InsufficientData(f"objective {j} has {len(gp.y)} training points; need 2")
        best, best_ll = None, -math.inf
        for triple in grid:
            gp.set_params(*triple)
            ll = gp.log_marginal_likelihood()
            if ll > best_ll:
                best, best_ll = triple, ll
        gp.set_params(*best)
        gp._factor()
        chosen.append(best)
    return chosen
