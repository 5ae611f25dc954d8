"""Sine-basis spectral surrogate for the Dirichlet wave equation.

Each basis function sin(j pi x / L1) sin(k pi y / L2) cos(w_{jk} t) with
w_{jk} = c pi sqrt((j/L1)^2 + (k/L2)^2) satisfies the wave equation and the
homogeneous Dirichlet condition exactly, so only the weights are fitted.
Fitting samples the initial displacement on a Latin hypercube design and
solves a ridge problem through one retained SVD; the ridge parameter is
selected by generalized cross-validation.

Weight / column order: (j, k) lexicographic with j outer, i.e. column
(j-1)*N + (k-1) holds mode (j, k).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpectralBasis",
    "DesignMatrix",
    "RidgeSVD",
    "SpectralModel",
    "lhs_sample",
    "build_design_matrix",
    "ridge_fit_svd",
    "gcv_score",
    "select_lambda_gcv",
    "effective_dof",
    "default_lambda_grid",
    "fit_spectral_model",
    "predict",
    "predict_grid",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _sine_table(coords, N: int, L: float) -> np.ndarray:
    """sin(j pi x / L) for j = 1..N; exact zeros wherever j x / L is integral."""
    z = np.multiply.outer(np.asarray(coords, dtype=float) / L,
                          np.arange(1, N + 1, dtype=float))
    out = np.sin(np.pi * z)
    out[z == np.round(z)] = 0.0
    return out


@dataclass(frozen=True)
class SpectralBasis:
    """Mode table for the rectangle: N modes per direction."""

    N: int
    L1: float = 1.0
    L2: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("need at least one mode per direction")
        if min(self.L1, self.L2, self.c) <= 0:
            raise ValueError("lengths and wave speed must be positive")

    @property
    def omegas(self) -> np.ndarray:
        """Angular frequencies w_{jk}, shape (N, N), j indexing rows."""
        j = np.arange(1, self.N + 1, dtype=float)
        return self.c * np.pi * np.sqrt((j[:, None] / self.L1) ** 2
                                        + (j[None, :] / self.L2) ** 2)


@dataclass(frozen=True)
class DesignMatrix:
    """Spatial basis evaluated at the sample points, shape (m, N^2)."""

    values: np.ndarray
    points: np.ndarray
    basis: SpectralBasis


def lhs_sample(m: int, L1: float, L2: float, seed: int = 0,
               mode: str = "jittered") -> np.ndarray:
    """Latin hypercube sample of m points in (0, L1) x (0, L2).

    Each coordinate is split into m equal strata, each containing exactly
    one point. Midpoint mode places points at stratum centers; jittered
    mode draws uniformly within each stratum. The pairing between
    coordinates is a seeded random permutation, so the same (m, seed, mode)
    always yields the same point set.
    """
    if m < 1:
        raise ValueError("sample count must be at least 1")
    if mode not in ("midpoint", "jittered"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    pts = np.empty((m, 2))
    for dim, L in enumerate((L1, L2)):
        strata = rng.permutation(m)
        offsets = np.full(m, 0.5) if mode == "midpoint" else rng.random(m)
        pts[:, dim] = (strata + offsets) / m * L
    return pts


def build_design_matrix(points: np.ndarray, basis: SpectralBasis) -> DesignMatrix:
    """Evaluate all N^2 spatial basis functions at the sample points."""
    points = np.asarray(points, dtype=float)
    x, y = points[:, 0], points[:, 1]
    if np.any(x < 0) or np.any(x > basis.L1) or np.any(y < 0) or np.any(y > basis.L2):
        raise ValueError("sample point outside the closed rectangle")
    sx = _sine_table(x, basis.N, basis.L1)       # (m, N), j index
    sy = _sine_table(y, basis.N, basis.L2)       # (m, N), k index
    values = (sx[:, :, None] * sy[:, None, :]).reshape(points.shape[0], -1)
    return DesignMatrix(values, points, basis)


@dataclass(frozen=True)
class RidgeSVD:
    """Retained thin SVD of the design matrix, reused across ridge solves."""

    U: np.ndarray
    s: np.ndarray
    Vt: np.ndarray
    m: int

    def coefficients(self, u: np.ndarray, lam: float) -> np.ndarray:
        a = self.U.T @ u
        return self.Vt.T @ (self.s / (self.s**2 + lam) * a)

    def rss(self, u: np.ndarray, lam: float) -> float:
        """Residual sum of squares ||u - Phi w_lam||^2 via the spectral filter."""
        a = self.U.T @ u
        out_of_range = float(u @ u - a @ a)      # component outside col(Phi)
        shrunk = (lam / (self.s**2 + lam)) * a
        return max(out_of_range, 0.0) + float(shrunk @ shrunk)

    def edof(self, lam: float) -> float:
        return float(np.sum(self.s**2 / (self.s**2 + lam)))


def ridge_fit_svd(Phi: DesignMatrix | np.ndarray, u: np.ndarray, lam: float):
    """Solve the ridge problem through a thin SVD.

    Returns (weights, handle); the handle retains the factorization so that
    GCV evaluation over many ridge parameters costs O(rank) each.
    """
    A = Phi.values if isinstance(Phi, DesignMatrix) else np.asarray(Phi, dtype=float)
    u = np.asarray(u, dtype=float)
    if lam < 0:
        raise ValueError("ridge parameter must be nonnegative")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(u))):
        raise ValueError("non-finite entries in the ridge system")
    if u.shape != (A.shape[0],):
        raise ValueError("observation vector length does not match the design")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if lam == 0.0:
        tol = max(A.shape) * np.finfo(float).eps * s[0]
        if s[-1] <= tol:
            raise np.linalg.LinAlgError(
                "design matrix is rank deficient; a positive ridge parameter "
                "is required")
    fit = RidgeSVD(U, s, Vt, A.shape[0])
    return fit.coefficients(u, lam), fit


def gcv_score(fit: RidgeSVD, u: np.ndarray, lam: float) -> float:
    """GCV(lam) = ||u - Phi w_lam||^2 / (m - tr(H_lam))^2."""
    if lam <= 0:
        raise ValueError("GCV requires a strictly positive ridge parameter")
    u = np.asarray(u, dtype=float)
    return fit.rss(u, lam) / (fit.m - fit.edof(lam)) ** 2


def effective_dof(fit: RidgeSVD, lam: float) -> float:
    """Trace of the hat matrix, sum of s_i^2 / (s_i^2 + lam)."""
    if lam < 0:
        raise ValueError("ridge parameter must be nonnegative")
    return fit.edof(lam)


def default_lambda_grid() -> np.ndarray:
    """Log-spaced search grid over [1e-12, 1e2], 8 points per decade."""
    return np.logspace(-12.0, 2.0, 14 * 8 + 1)


def select_lambda_gcv(fit: RidgeSVD, u: np.ndarray, grid=None):
    """Minimize the GCV score over a grid, then refine by golden section.

    Ties on the grid break toward larger (more regularizing) values. The
    refinement runs one golden-section search on log(lambda) in the interval
    bracketing the grid minimizer. Returns (lambda_star, edof, score).
    """
    if grid is None:
        grid = default_lambda_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be nonempty with positive entries")
    grid = np.sort(grid)
    u = np.asarray(u, dtype=float)

    scores = np.array([gcv_score(fit, u, lam) for lam in grid])
    i = grid.size - 1 - int(np.argmin(scores[::-1]))   # last (largest-lam) min
    best_lam, best_score = grid[i], scores[i]

    lo = np.log(grid[max(i - 1, 0)])
    hi = np.log(grid[min(i + 1, grid.size - 1)])
    if hi > lo:
        a, b = lo, hi
        x1 = b - _GOLDEN * (b - a)
        x2 = a + _GOLDEN * (b - a)
        f1 = gcv_score(fit, u, np.exp(x1))
        f2 = gcv_score(fit, u, np.exp(x2))
        for _ in range(60):
            if b - a < 1e-4:
                break
            if f1 > f2:
                a, x1, f1 = x1, x2, f2
                x2 = a + _GOLDEN * (b - a)
                f2 = gcv_score(fit, u, np.exp(x2))
            else:
                b, x2, f2 = x2, x1, f1
                x1 = b - _GOLDEN * (b - a)
                f1 = gcv_score(fit, u, np.exp(x1))
        for x, f in ((x1, f1), (x2, f2)):
            if f < best_score:
                best_lam, best_score = np.exp(x), f
    return float(best_lam), fit.edof(best_lam), float(best_score)


@dataclass(frozen=True)
class SpectralModel:
    """Fitted surrogate: basis, weights, chosen ridge parameter, diagnostics."""

    basis: SpectralBasis
    weights: np.ndarray
    lam: float
    edof: float
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "N": self.basis.N,
            "L1": self.basis.L1,
            "L2": self.basis.L2,
            "c": self.basis.c,
            "lambda": self.lam,
            "edof": self.edof,
            "seed": self.diagnostics.get("seed"),
            "weights": self.weights.tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "SpectralModel":
        doc = json.loads(text)
        basis = SpectralBasis(doc["N"], doc["L1"], doc["L2"], doc["c"])
        w = np.asarray(doc["weights"], dtype=float)
        if w.shape != (basis.N**2,):
            raise ValueError("weight vector length does not match N^2")
        return cls(basis, w, doc["lambda"], doc["edof"], {"seed": doc.get("seed")})


def fit_spectral_model(problem, N: int, m: int, seed: int = 0,
                       sample_mode: str = "jittered", lambda_grid=None,
                       noise_std: float = 0.0) -> SpectralModel:
    """Full fitting pipeline: sample, design matrix, SVD, GCV, weights.

    `noise_std` adds seeded Gaussian noise to the sampled initial data;
    the benchmark experiments leave it at zero.
    """
    basis = SpectralBasis(N, problem.L1, problem.L2, problem.c)
    pts = lhs_sample(m, problem.L1, problem.L2, seed=seed, mode=sample_mode)
    Phi = build_design_matrix(pts, basis)
    u = np.asarray(problem.initial_condition()(pts[:, 0], pts[:, 1]), dtype=float)
    if noise_std > 0:
        u = u + np.random.default_rng(seed + 1).normal(0.0, noise_std, m)
    _, fit = ridge_fit_svd(Phi, u, 1.0)   # keeps the factorization handle
    lam, edof, score = select_lambda_gcv(fit, u, lambda_grid)
    w = fit.coefficients(u, lam)
    diagnostics = {
        "seed": seed,
        "m": m,
        "gcv_score": score,
        "residual_norm": float(np.sqrt(fit.rss(u, lam))),
        "sample_mode": sample_mode,
    }
    return SpectralModel(basis, w, lam, edof, diagnostics)


def predict(model: SpectralModel, x, y, t: float):
    """Evaluate the surrogate at points (x, y) and time t."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    b = model.basis
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    if np.any(x < 0) or np.any(x > b.L1) or np.any(y < 0) or np.any(y > b.L2):
        raise ValueError("evaluation point outside the closed rectangle")
    sx = _sine_table(x, b.N, b.L1)
    sy = _sine_table(y, b.N, b.L2)
    Wt = model.weights.reshape(b.N, b.N) * np.cos(b.omegas * t)
    out = np.einsum("pj,jk,pk->p", sx, Wt, sy)
    return float(out[0]) if scalar else out


def predict_grid(model: SpectralModel, xs, ys, t: float) -> np.ndarray:
    """Evaluate on a tensor grid; returns shape (len(ys), len(xs)).

    Uses separable sine tables, so the cost is O(grid * N) per direction
    rather than O(grid * N^2).
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    b = model.basis
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if np.any(xs < 0) or np.any(xs > b.L1) or np.any(ys < 0) or np.any(ys > b.L2):
        raise ValueError("grid point outside the closed rectangle")
    sx = _sine_table(xs, b.N, b.L1)              # (nx, N_j)
    sy = _sine_table(ys, b.N, b.L2)              # (ny, N_k)
    Wt = model.weights.reshape(b.N, b.N) * np.cos(b.omegas * t)
    return sy @ Wt.T @ sx.T
