"""Certified quadrature on parametrized edges and star-shaped cells.

Straight-edge rules are exact by Gauss-Legendre degree counting.  Rules that
touch a curved edge carry extra points and are certified against a rule with
twice the points: the certificate compares all monomial moments up to the
target degree and must agree to 1e-12 relative.  Cell rules come from the
star-sector decomposition anchored at the cell star center, so no geometric
approximation of the curved boundary ever enters the solver.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .basis import cell_basis, edge_basis, eval_cell_basis, eval_edge_basis
from .errors import QuadratureError

DEFAULT_CURVE_EXCESS = 4
_CERT_RTOL = 1e-12
_CERT_ATTEMPTS = 3


def curve_excess():
    """Extra node count for curved-edge rules (env VEM_QUAD_EXCESS overrides)."""
    value = os.environ.get("VEM_QUAD_EXCESS")
    return DEFAULT_CURVE_EXCESS if value is None else max(0, int(value))


def gauss_legendre(n_points):
    """Nodes and weights on [-1, 1], exact for degree <= 2 n - 1.

    ``n_points`` is limited to 1..30; internal refinement uses
    ``numpy.polynomial.legendre.leggauss`` directly.
    """
    if not 1 <= n_points <= 30:
        raise ValueError("n_points must be between 1 and 30")
    x, w = roots_legendre(n_points)
    return x, w


@dataclass(frozen=True, eq=False)
class EdgeRule:
    """Quadrature nodes along one edge, with arclength weights and unit
    normals pointing out of the requesting cell."""

    t: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    exactness_degree: int

    @property
    def arclength(self):
        return float(self.weights.sum())


@dataclass(frozen=True, eq=False)
class CellRule:
    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    @property
    def area(self):
        return float(self.weights.sum())


def _edge_nodes(mesh, ei, n_points):
    """Raw nodes/arc-weights/velocities for n_points Gauss points on an edge."""
    xi, w = np.polynomial.legendre.leggauss(int(n_points))
    t0, t1 = mesh.edge_interval(ei)
    span = t1 - t0
    t = 0.5 * (t0 + t1) + 0.5 * span * xi
    p = mesh.edge_points(ei, t)
    v = mesh.edge_velocity(ei, t)
    speed = np.linalg.norm(v, axis=1)
    w_arc = w * speed * abs(0.5 * span)
    return t, p, v, w_arc


def _outward_sign(mesh, ei, cell_index, v_mid):
    """Sign s so that s * rot(velocity) points out of the requesting cell."""
    e = mesh.edges[ei]
    d = mesh.cell_edge_sign(cell_index, ei)
    chord = (mesh.vertices[e.v1] - mesh.vertices[e.v0]) * d
    outward = np.array([chord[1], -chord[0]])
    s = float(np.sign(v_mid[1] * outward[0] - v_mid[0] * outward[1]))
    # rot(v) = (v_y, -v_x); dot(rot(v), outward) = v_y*out_x - v_x*out_y
    if s == 0.0:
        raise QuadratureError(f"cannot orient normal of edge {ei}")
    return s


def edge_rule(mesh, edge_index, cell_index, degree, excess=None):
    """Arclength quadrature on an edge with outward normals for one cell.

    Straight edges get the minimal Gauss rule (analytically exact for the
    requested degree); curved edges get ``excess`` extra points and a
    refinement certificate.

    Raises
    ------
    QuadratureError
        If the certificate still fails after doubling the points twice.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    e = mesh.edges[edge_index]
    base = max(1, math.ceil((degree + 1) / 2))
    if not e.is_curved:
        t, p, v, w = _edge_nodes(mesh, edge_index, base)
        return _finish_edge_rule(mesh, edge_index, cell_index, degree, t, p, v, w)

    n = base + (curve_excess() if excess is None else excess)
    t0, t1 = mesh.edge_interval(edge_index)
    ebasis = edge_basis(t0, t1, degree)
    for _ in range(_CERT_ATTEMPTS):
        t, p, v, w = _edge_nodes(mesh, edge_index, n)
        t2, _, _, w2 = _edge_nodes(mesh, edge_index, 2 * n)
        m1 = eval_edge_basis(ebasis, t).T @ w
        m2 = eval_edge_basis(ebasis, t2).T @ w2
        scale = np.maximum(np.abs(m2), w2.sum())
        if np.max(np.abs(m1 - m2) / scale) < _CERT_RTOL:
            return _finish_edge_rule(mesh, edge_index, cell_index, degree, t, p, v, w)
        n *= 2
    raise QuadratureError(
        f"edge {edge_index}: rule not certified at degree {degree} with {n} points")


def _finish_edge_rule(mesh, edge_index, cell_index, degree, t, p, v, w):
    mid = v[len(v) // 2]
    s = _outward_sign(mesh, edge_index, cell_index, mid)
    speed = np.linalg.norm(v, axis=1)
    normals = s * np.column_stack([v[:, 1], -v[:, 0]]) / speed[:, None]
    return EdgeRule(t=t, points=p, weights=w, normals=normals,
                    exactness_degree=degree)


def _sector_nodes(mesh, cell_index, degree, t_extra, refine=1):
    """Tensor Gauss nodes of the star-sector decomposition."""
    cell = mesh.cells[cell_index]
    xk = np.asarray(cell.star_center)
    n_s = max(1, math.ceil((degree + 2) / 2)) * refine
    xi_s, w_s = np.polynomial.legendre.leggauss(n_s)
    s = 0.5 * (xi_s + 1.0)
    ws = 0.5 * w_s
    pts = []
    wts = []
    for ei, sign in zip(cell.edges, cell.signs):
        n_t = max(1, math.ceil((degree + 1) / 2))
        if mesh.edges[ei].is_curved:
            n_t += t_extra
        n_t *= refine
        t0, t1 = mesh.edge_interval(ei)
        span = t1 - t0
        xi_t, w_t = np.polynomial.legendre.leggauss(n_t)
        t = 0.5 * (t0 + t1) + 0.5 * span * xi_t
        g = mesh.edge_points(ei, t)
        dg = mesh.edge_velocity(ei, t)
        rel = g - xk[None, :]
        cross = rel[:, 0] * dg[:, 1] - rel[:, 1] * dg[:, 0]
        factor_t = w_t * (0.5 * span) * sign * cross
        p = xk[None, None, :] + s[:, None, None] * rel[None, :, :]
        w = (ws * s)[:, None] * factor_t[None, :]
        pts.append(p.reshape(-1, 2))
        wts.append(w.reshape(-1))
    return np.vstack(pts), np.concatenate(wts)


def cell_rule(mesh, cell_index, degree, excess=None):
    """Quadrature on a (possibly curved) star-shaped cell.

    The sector Jacobian must be positive at every node; a nonpositive value
    means the star-shapedness assumption failed.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    cell = mesh.cells[cell_index]
    curved = any(mesh.edges[ei].is_curved for ei in cell.edges)
    t_extra = (curve_excess() if excess is None else excess) if curved else 0

    if not curved:
        p, w = _sector_nodes(mesh, cell_index, degree, 0)
        _check_positive(w, cell_index)
        return CellRule(points=p, weights=w, exactness_degree=degree)

    cb = cell_basis(cell.star_center, cell.diameter, degree)
    for _ in range(_CERT_ATTEMPTS):
        p, w = _sector_nodes(mesh, cell_index, degree, t_extra)
        _check_positive(w, cell_index)
        p2, w2 = _sector_nodes(mesh, cell_index, degree, t_extra, refine=2)
        m1 = eval_cell_basis(cb, p).T @ w
        m2 = eval_cell_basis(cb, p2).T @ w2
        scale = np.maximum(np.abs(m2), abs(w2.sum()))
        if np.max(np.abs(m1 - m2) / scale) < _CERT_RTOL:
            return CellRule(points=p, weights=w, exactness_degree=degree)
        t_extra = 2 * max(t_extra, 1)
    raise QuadratureError(
        f"cell {cell_index}: rule not certified at degree {degree}")


def _check_positive(w, cell_index):
    if np.any(w <= 0.0):
        raise QuadratureError(
            f"cell {cell_index}: nonpositive sector Jacobian "
            "(star-shapedness violated)")
