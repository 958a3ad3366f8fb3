"""Scaled monomial bases on cells and on edge parameter intervals.

Cell monomials are ``((x - center) / scale) ** alpha`` over all multi-indices
``|alpha| <= order`` in graded lexicographic order; this ordering is fixed
once and shared by every module that exchanges coefficient arrays.  Edge
monomials are 1D monomials in the curve parameter; composing with the edge
parametrization gives the mapped edge polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def monomial_exponents(order):
    """(dim, 2) exponent table in graded lexicographic order."""
    exps = []
    for d in range(order + 1):
        for i in range(d, -1, -1):
            exps.append((i, d - i))
    return np.array(exps, dtype=int)


def monomial_count(order):
    if order < 0:
        return 0
    return (order + 1) * (order + 2) // 2


@dataclass(frozen=True, eq=False)
class CellBasis:
    """Scaled monomials of degree <= order centered at the cell star center."""

    center: tuple
    scale: float
    order: int

    @property
    def dim(self):
        return monomial_count(self.order)

    @property
    def exponents(self):
        return monomial_exponents(self.order)


def cell_basis(center, scale, order):
    return CellBasis(center=(float(center[0]), float(center[1])),
                     scale=float(scale), order=int(order))


def _scaled_coords(basis, points):
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x = (p[:, 0] - basis.center[0]) / basis.scale
    y = (p[:, 1] - basis.center[1]) / basis.scale
    return x, y


def eval_cell_basis(basis, points):
    """Values of every monomial at every point, shape (n_points, dim)."""
    x, y = _scaled_coords(basis, points)
    ex = basis.exponents
    return x[:, None] ** ex[None, :, 0] * y[:, None] ** ex[None, :, 1]


def grad_cell_basis(basis, points):
    """Gradients, shape (n_points, dim, 2)."""
    x, y = _scaled_coords(basis, points)
    ex = basis.exponents
    a = ex[None, :, 0]
    b = ex[None, :, 1]
    xa = x[:, None] ** a
    yb = y[:, None] ** b
    xam1 = x[:, None] ** np.maximum(a - 1, 0)
    ybm1 = y[:, None] ** np.maximum(b - 1, 0)
    gx = a * xam1 * yb / basis.scale
    gy = b * xa * ybm1 / basis.scale
    return np.stack([gx, gy], axis=-1)


def laplacian_cell_basis(basis, points):
    """Pointwise Laplacian of every monomial, shape (n_points, dim)."""
    x, y = _scaled_coords(basis, points)
    ex = basis.exponents
    a = ex[None, :, 0]
    b = ex[None, :, 1]
    lap = a * (a - 1) * x[:, None] ** np.maximum(a - 2, 0) * y[:, None] ** b \
        + b * (b - 1) * x[:, None] ** a * y[:, None] ** np.maximum(b - 2, 0)
    return lap / basis.scale ** 2


def _index_map(order):
    ex = monomial_exponents(order)
    return {(int(a), int(b)): i for i, (a, b) in enumerate(ex)}


def laplacian_coefficient_map(basis):
    """Exact coefficient-level Laplacian.

    Returns the (dim(order-2), dim(order)) matrix L with
    ``laplacian(m_alpha) = sum_j L[j, alpha] m_j`` in the order-(order-2)
    basis with the same center and scale.
    """
    order = basis.order
    lo = _index_map(max(order - 2, 0)) if order >= 2 else {}
    L = np.zeros((monomial_count(order - 2), basis.dim))
    for col, (a, b) in enumerate(basis.exponents):
        if a >= 2:
            L[lo[(a - 2, b)], col] += a * (a - 1) / basis.scale ** 2
        if b >= 2:
            L[lo[(a, b - 2)], col] += b * (b - 1) / basis.scale ** 2
    return L


def _first_derivative_map(basis, component):
    order = basis.order
    lo = _index_map(max(order - 1, 0)) if order >= 1 else {}
    D = np.zeros((monomial_count(order - 1), basis.dim))
    for col, (a, b) in enumerate(basis.exponents):
        if component == 0 and a >= 1:
            D[lo[(a - 1, b)], col] = a / basis.scale
        elif component == 1 and b >= 1:
            D[lo[(a, b - 1)], col] = b / basis.scale
    return D


def dx_coefficient_map(basis):
    return _first_derivative_map(basis, 0)


def dy_coefficient_map(basis):
    return _first_derivative_map(basis, 1)


def divergence_vector_basis(basis, points):
    """Pointwise divergence of the vector monomials [(m, 0), (0, m)],
    shape (n_points, 2 * dim)."""
    g = grad_cell_basis(basis, points)
    return np.concatenate([g[:, :, 0], g[:, :, 1]], axis=1)


@dataclass(frozen=True, eq=False)
class EdgeBasis:
    """Graded 1D polynomials in the edge parameter.

    The normalized coordinate runs from -1 at the lower-id vertex to +1 at
    the other end on every edge, so the functionals built from this basis
    are identical for the two cells sharing an edge.  The basis itself is
    the Legendre family scaled to unit mean square: this spans the same
    polynomial space as the plain scaled monomials (hence the same edge
    moments in aggregate, the same nonconforming coupling and the same
    projections), but it keeps the moment magnitudes comparable across
    orders, which equilibrates the dofi-dofi stabilization.  The first
    member is identically 1.
    """

    t_mid: float
    half_span: float
    order: int

    @property
    def dim(self):
        return self.order + 1


def edge_basis(t0, t1, order):
    return EdgeBasis(t_mid=0.5 * (float(t0) + float(t1)),
                     half_span=0.5 * (float(t1) - float(t0)), order=int(order))


def eval_edge_basis(basis, t):
    """Values of the edge basis at parameters t, shape (n, order + 1)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u = (t - basis.t_mid) / basis.half_span
    vander = np.polynomial.legendre.legvander(u, basis.order)
    return vander * np.sqrt(2.0 * np.arange(basis.order + 1) + 1.0)[None, :]
