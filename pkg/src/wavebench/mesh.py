"""Structured conforming triangulation of a rectangle.

The rectangle (0, L1) x (0, L2) is divided into nx * ny uniform cells, each
split into two triangles along the lower-left to upper-right diagonal.
Nodes are ordered row-major, y outer, x inner. Triangles are oriented
counter-clockwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Mesh", "build_structured_mesh", "element_geometry"]


@dataclass(frozen=True)
class Mesh:
    """Immutable triangulation with an interior-unknown index map.

    Attributes
    ----------
    nodes : (n_nodes, 2) float array of coordinates.
    elements : (n_elements, 3) int array of CCW node triples.
    interior : (n_nodes,) int array mapping each node to its interior-unknown
        index, or -1 for boundary nodes.
    h : mesh size, max(L1/nx, L2/ny).
    """

    L1: float
    L2: float
    nx: int
    ny: int
    nodes: np.ndarray
    elements: np.ndarray
    interior: np.ndarray
    h: float

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_interior(self) -> int:
        return int((self.nx - 1) * (self.ny - 1))

    @property
    def interior_ids(self) -> np.ndarray:
        """Global node ids of interior nodes, in interior-unknown order."""
        return np.flatnonzero(self.interior >= 0)


def build_structured_mesh(L1: float, L2: float, nx: int, ny: int) -> Mesh:
    """Build the uniform criss-cross triangulation of (0, L1) x (0, L2)."""
    if L1 <= 0 or L2 <= 0:
        raise ValueError("domain lengths must be positive")
    if nx < 1 or ny < 1:
        raise ValueError("interval counts must be at least 1")

    xs = np.linspace(0.0, L1, nx + 1)
    ys = np.linspace(0.0, L2, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    # cell (i, j) has corners n00, n10, n01, n11; split along n00 -> n11
    i = np.arange(nx)
    j = np.arange(ny)
    I, J = np.meshgrid(i, j)
    n00 = (J * (nx + 1) + I).ravel()
    n10 = n00 + 1
    n01 = n00 + (nx + 1)
    n11 = n01 + 1
    lower = np.column_stack([n00, n10, n11])
    upper = np.column_stack([n00, n11, n01])
    elements = np.empty((2 * nx * ny, 3), dtype=np.int64)
    elements[0::2] = lower
    elements[1::2] = upper

    interior = np.full(nodes.shape[0], -1, dtype=np.int64)
    ix = np.arange(nx + 1)
    iy = np.arange(ny + 1)
    IX, IY = np.meshgrid(ix, iy)
    mask = (IX > 0) & (IX < nx) & (IY > 0) & (IY < ny)
    interior[mask.ravel()] = np.arange(mask.sum())

    h = max(L1 / nx, L2 / ny)
    nodes.setflags(write=False)
    elements.setflags(write=False)
    interior.setflags(write=False)
    return Mesh(L1, L2, nx, ny, nodes, elements, interior, h)


def element_geometry(mesh: Mesh, e: int):
    """Area and edge-difference vectors of one triangle.

    With vertices (x_i, y_i), i = 1..3 and cyclic indexing,
    b_i = y_{i+1} - y_{i-1} and c_i = x_{i-1} - x_{i+1}; the signed area is
    (b_2 c_3 - b_3 c_2) / 2 expressed via the standard cross product.
    """
    if not 0 <= e < mesh.n_elements:
        raise ValueError(f"element id {e} out of range")
    a, b_, c_ = geometry_arrays(mesh)
    return float(a[e]), b_[e].copy(), c_[e].copy()


def geometry_arrays(mesh: Mesh):
    """Vectorized (areas, b, c) for every element; used by assembly."""
    tri = mesh.nodes[mesh.elements]          # (n_el, 3, 2)
    x = tri[:, :, 0]
    y = tri[:, :, 1]
    nxt = [1, 2, 0]
    prv = [2, 0, 1]
    b = y[:, nxt] - y[:, prv]
    c = x[:, prv] - x[:, nxt]
    area = 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
                  - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    return area, b, c
