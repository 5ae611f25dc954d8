"""Quadrature-based error measurement.

Space: the 4-point degree-3 triangle rule (barycentric centroid with weight
-27/48 plus the three permutations of (3/5, 1/5, 1/5) with weight 25/48).
Time: composite Simpson's 1/3 rule over a uniform evaluation grid. The
reference solution is read back by bilinear interpolation in space and
linear interpolation in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh, geometry_arrays

__all__ = [
    "ErrorReport",
    "mesh_quadrature",
    "triangle_quadrature_integral",
    "bilinear_interp",
    "spatial_l2_error",
    "simpson_weights",
    "space_time_l2_error",
    "linf_l2_error",
    "relative_error",
    "compute_error_report",
]

# degree-3 rule in barycentric coordinates
_QUAD_BARY = np.array([
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [3.0 / 5.0, 1.0 / 5.0, 1.0 / 5.0],
    [1.0 / 5.0, 3.0 / 5.0, 1.0 / 5.0],
    [1.0 / 5.0, 1.0 / 5.0, 3.0 / 5.0],
])
_QUAD_W = np.array([-27.0, 25.0, 25.0, 25.0]) / 48.0


def mesh_quadrature(mesh: Mesh):
    """Quadrature points and weights covering the whole mesh.

    Returns (points, weights) with shapes (4 n_el, 2) and (4 n_el,); the
    weights already include the element areas, so sum(w * f(p)) integrates
    f over the rectangle.
    """
    area, _, _ = geometry_arrays(mesh)
    tri = mesh.nodes[mesh.elements]                       # (n_el, 3, 2)
    pts = np.einsum("qb,ebd->eqd", _QUAD_BARY, tri)       # (n_el, 4, 2)
    w = area[:, None] * _QUAD_W[None, :]
    return pts.reshape(-1, 2), w.ravel()


def triangle_quadrature_integral(f, mesh: Mesh) -> float:
    """Integrate f(x, y) over the mesh with the degree-3 triangle rule."""
    pts, w = mesh_quadrature(mesh)
    return float(w @ np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float))


def bilinear_interp(ref_slice: np.ndarray, L1: float, L2: float, x, y):
    """Tensor-product bilinear interpolation on a uniform nodal grid.

    `ref_slice` has shape (ny+1, nx+1) over [0, L1] x [0, L2]; exact at
    grid nodes and for any bilinear function.
    """
    ny = ref_slice.shape[0] - 1
    nx = ref_slice.shape[1] - 1
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < -1e-12) or np.any(x > L1 * (1 + 1e-12)) \
            or np.any(y < -1e-12) or np.any(y > L2 * (1 + 1e-12)):
        raise ValueError("interpolation point outside the domain")
    gx = np.clip(x / L1 * nx, 0.0, nx)
    gy = np.clip(y / L2 * ny, 0.0, ny)
    ix = np.minimum(gx.astype(np.int64), nx - 1)
    iy = np.minimum(gy.astype(np.int64), ny - 1)
    s = gx - ix
    r = gy - iy
    return ((1 - s) * (1 - r) * ref_slice[iy, ix]
            + s * (1 - r) * ref_slice[iy, ix + 1]
            + (1 - s) * r * ref_slice[iy + 1, ix]
            + s * r * ref_slice[iy + 1, ix + 1])


def spatial_l2_error(u_h, ref_slice: np.ndarray, mesh: Mesh) -> float:
    """L2 norm of (u_h - reference slice) over the mesh at one time.

    `u_h` is a callable (x, y) -> values; the reference slice is read by
    bilinear interpolation at the quadrature points.
    """
    pts, w = mesh_quadrature(mesh)
    diff = (np.asarray(u_h(pts[:, 0], pts[:, 1]), dtype=float)
            - bilinear_interp(ref_slice, mesh.L1, mesh.L2, pts[:, 0], pts[:, 1]))
    # the negative centroid weight can push a tiny squared integral below zero
    return float(np.sqrt(max(w @ diff**2, 0.0)))


def simpson_weights(Nt: int, dt: float, paper_endpoint: bool = False) -> np.ndarray:
    """Composite Simpson 1/3 weights on Nt intervals (Nt even).

    With `paper_endpoint` the first weight is halved, reproducing a variant
    formula kept only for comparison; the standard weights are exact for
    cubics.
    """
    if Nt < 2 or Nt % 2:
        raise ValueError("Simpson's rule needs an even interval count >= 2")
    w = np.ones(Nt + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    if paper_endpoint:
        w[0] = 0.5
    return w * dt / 3.0


def linf_l2_error(per_snapshot) -> float:
    """Maximum of the per-time spatial errors."""
    per_snapshot = np.asarray(per_snapshot, dtype=float)
    if per_snapshot.size == 0:
        raise ValueError("empty snapshot error array")
    return float(per_snapshot.max())


def relative_error(abs_err: float, ref_norm: float) -> float:
    if ref_norm <= 0:
        raise ValueError("reference norm must be positive")
    return abs_err / ref_norm


def space_time_l2_error(solution, ref, mesh: Mesh, Nt_eval: int = 200,
                        paper_simpson: bool = False):
    """Space-time L2 error of a solver field against the reference.

    `solution` is a callable (x, y, t) -> values; `ref` is a
    ReferenceSolution. Returns (error, per_snapshot) where per_snapshot
    holds the spatial errors E_n on the evaluation time grid.
    """
    E, _, times = _snapshot_errors(solution, ref, mesh, Nt_eval)
    w = simpson_weights(Nt_eval, times[1] - times[0], paper_simpson)
    return float(np.sqrt(w @ E**2)), E


def _snapshot_errors(solution, ref, mesh: Mesh, Nt_eval: int):
    """Per-time spatial errors and reference norms on the evaluation grid."""
    if Nt_eval < 2 or Nt_eval % 2:
        raise ValueError("Simpson's rule needs an even interval count >= 2")
    pts, w = mesh_quadrature(mesh)
    x, y = pts[:, 0], pts[:, 1]
    times = np.linspace(0.0, ref.problem.T, Nt_eval + 1)
    E = np.empty(Nt_eval + 1)
    R = np.empty(Nt_eval + 1)
    for n, t in enumerate(times):
        ref_vals = bilinear_interp(ref.at_time(t), mesh.L1, mesh.L2, x, y)
        sol_vals = np.asarray(solution(x, y, t), dtype=float)
        E[n] = np.sqrt(max(w @ (sol_vals - ref_vals) ** 2, 0.0))
        R[n] = np.sqrt(max(w @ ref_vals**2, 0.0))
    return E, R, times


@dataclass
class ErrorReport:
    """Error summary for one (solver, initial condition) pair."""

    st_l2: float
    st_rel: float
    linf_l2: float
    linf_rel: float
    ref_st_norm: float
    per_snapshot: np.ndarray
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "st_l2": self.st_l2,
            "st_rel": self.st_rel,
            "linf_l2": self.linf_l2,
            "linf_rel": self.linf_rel,
            "ref_st_norm": self.ref_st_norm,
            "per_snapshot": self.per_snapshot.tolist(),
            "timings": self.timings,
        }


def compute_error_report(solution, ref, mesh: Mesh, Nt_eval: int = 200,
                         paper_simpson: bool = False,
                         timings: dict | None = None) -> ErrorReport:
    """Full error report of a space-time field against the reference."""
    E, R, times = _snapshot_errors(solution, ref, mesh, Nt_eval)
    w = simpson_weights(Nt_eval, times[1] - times[0], paper_simpson)
    st = float(np.sqrt(w @ E**2))
    ref_norm = float(np.sqrt(w @ R**2))
    linf = linf_l2_error(E)
    # The max-in-time error is normalized by the reference norm at the
    # snapshot where the error peaks, so linf_rel is the relative error
    # of that worst snapshot rather than a ratio of two unrelated maxima.
    n_peak = int(np.argmax(E))
    return ErrorReport(
        st_l2=st,
        st_rel=relative_error(st, ref_norm),
        linf_l2=linf,
        linf_rel=relative_error(linf, float(R[n_peak])),
        ref_st_norm=ref_norm,
        per_snapshot=E,
        timings=dict(timings or {}),
    )
