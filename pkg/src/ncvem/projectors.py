"""Per-cell projection matrices computed from the degrees of freedom.

The local virtual functions are never evaluated; every operator that the
discrete forms need is realized as a dense matrix from the local DoF vector
to monomial coefficients:

* ``p_nabla``  -- energy (Ritz-Galerkin) projection onto degree-k polynomials,
  defined through integration by parts with edge-projected normal fluxes on
  curved edges, with the constant fixed by a boundary (k = 1) or cell
  (k >= 2) average;
* ``p_grad``   -- L2 projection of the gradient onto degree-(k-1) vector
  polynomials;
* ``p_l2``     -- L2 projection onto degree-k polynomials, computable thanks
  to the enhancement constraint (moments of degree k-1 and k are read from
  the energy projection);
* ``p_l2_lower`` -- L2 projection onto degree-(k-1) polynomials, used by the
  advection/reaction forms and the load term;
* ``dofs_of_poly`` -- DoF vector of each monomial (the reproduction and
  stabilization bookkeeping matrix).

The local DoFs are, per edge, the ``k`` moments against the mapped edge
monomials scaled by 1/arclength, in cell-loop order, followed by the bulk
moments against the degree-(k-2) cell monomials scaled by 1/area.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import (cell_basis, dx_coefficient_map, dy_coefficient_map,
                    edge_basis, eval_cell_basis, eval_edge_basis,
                    grad_cell_basis, laplacian_coefficient_map, monomial_count)
from .errors import NumericError
from .quadrature import cell_rule, edge_rule


@dataclass(frozen=True)
class LocalDofLayout:
    """Index bookkeeping for the local DoF vector of one cell."""

    k: int
    n_edges: int

    @property
    def n_bulk(self):
        return monomial_count(self.k - 2)

    @property
    def n_dof(self):
        return self.k * self.n_edges + self.n_bulk

    def edge_slice(self, j):
        return slice(j * self.k, (j + 1) * self.k)

    @property
    def bulk_slice(self):
        return slice(self.k * self.n_edges, self.n_dof)


class EdgeProjection:
    """L2 projection onto mapped edge polynomials of one order on one edge."""

    def __init__(self, basis, rule, arclength=None):
        self.basis = basis
        self.rule = rule
        E = eval_edge_basis(basis, rule.t)
        self._E = E
        self.gram = E.T @ (rule.weights[:, None] * E)
        self.arclength = rule.arclength if arclength is None else arclength

    def moments(self, values):
        """Integrals of the edge monomials against pointwise values."""
        return self._E.T @ (self.rule.weights * np.asarray(values, dtype=float))

    def project(self, values):
        """Coefficients of the projection of edge-sampled values."""
        return _solve(self.gram, self.moments(values), "edge Gram")

    def project_moments(self, moments):
        return _solve(self.gram, moments, "edge Gram")


def edge_l2_projection(mesh, edge_index, cell_index, order, degree=None):
    """Projection operator onto the mapped edge polynomials of ``order``."""
    if degree is None:
        degree = 2 * order + 2
    rule = edge_rule(mesh, edge_index, cell_index, degree)
    t0, t1 = mesh.edge_interval(edge_index)
    return EdgeProjection(edge_basis(t0, t1, order), rule)


def _solve(A, b, what):
    """Equilibrated LU solve with extended-precision iterative refinement.

    The k = 4 monomial Gram matrices reach condition numbers ~1e7 on skewed
    cells; plain LU then loses the last digits the reproduction invariants
    are asserted at.  Symmetric diagonal equilibration plus two refinement
    sweeps with long-double residuals recover them.
    """
    try:
        d = np.sqrt(np.abs(np.diag(A)))
        d[d == 0.0] = 1.0
        As = A / np.outer(d, d)
        lu, piv = scipy.linalg.lu_factor(As)

        def solve_scaled(rhs):
            scale = d if rhs.ndim == 1 else d[:, None]
            return scipy.linalg.lu_solve((lu, piv), rhs / scale) / scale

        x = solve_scaled(np.asarray(b, dtype=float))
        A_hi = A.astype(np.longdouble)
        b_hi = np.asarray(b, dtype=np.longdouble)
        for _ in range(2):
            r = np.asarray(b_hi - A_hi @ x.astype(np.longdouble), dtype=float)
            x = x + solve_scaled(r)
        return x
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"singular {what}: {exc}") from None


@dataclass(eq=False)
class ProjectorPack:
    """All projector matrices of one cell, in monomial coordinates."""

    cell_index: int
    k: int
    basis: object
    layout: LocalDofLayout
    cell_rule: object
    edge_rules: tuple
    edge_projections: tuple
    edge_lengths: np.ndarray
    mass: np.ndarray
    stiffness: np.ndarray
    p_nabla: np.ndarray
    p_grad: np.ndarray
    p_l2: np.ndarray
    p_l2_lower: np.ndarray
    dofs_of_poly: np.ndarray
    cond: dict

    @property
    def n_dof(self):
        return self.layout.n_dof

    @property
    def area(self):
        return float(self.cell_rule.weights.sum())


def build_projector_pack(mesh, cell_index, k, degree=None):
    """Assemble every projector matrix for one cell.

    Parameters
    ----------
    mesh : Mesh
    cell_index : int
    k : int
        Method order (>= 1).
    degree : int, optional
        Quadrature exactness target; defaults to 2k + 2.
    """
    if k < 1:
        raise ValueError("order k must be >= 1")
    if degree is None:
        degree = 2 * k + 2
    cell = mesh.cells[cell_index]
    cb = cell_basis(cell.star_center, cell.diameter, k)
    npk = cb.dim
    np1 = monomial_count(k - 1)
    npb = monomial_count(k - 2)
    layout = LocalDofLayout(k=k, n_edges=len(cell.edges))
    n_dof = layout.n_dof

    crule = cell_rule(mesh, cell_index, degree)
    W = crule.weights
    V = eval_cell_basis(cb, crule.points)
    G = grad_cell_basis(cb, crule.points)
    mass = V.T @ (W[:, None] * V)
    stiffness = G[:, :, 0].T @ (W[:, None] * G[:, :, 0]) \
        + G[:, :, 1].T @ (W[:, None] * G[:, :, 1])
    area = float(W.sum())

    erules = []
    eprojs = []
    for ei in cell.edges:
        rule = edge_rule(mesh, ei, cell_index, degree)
        t0, t1 = mesh.edge_interval(ei)
        erules.append(rule)
        eprojs.append(EdgeProjection(edge_basis(t0, t1, k - 1), rule))
    lengths = np.array([r.arclength for r in erules])

    # DoFs of every cell monomial.
    D = np.zeros((n_dof, npk))
    edge_V = []
    for j, (rule, proj) in enumerate(zip(erules, eprojs)):
        Vq = eval_cell_basis(cb, rule.points)
        edge_V.append(Vq)
        D[layout.edge_slice(j), :] = proj._E.T @ (rule.weights[:, None] * Vq) / lengths[j]
    if npb:
        D[layout.bulk_slice, :] = mass[:npb, :] / area

    # Energy projection: stiffness rows for the nonconstant monomials, an
    # averaging row for the constant.
    Ghat = stiffness.copy()
    B = np.zeros((npk, n_dof))
    if npb:
        lap = laplacian_coefficient_map(cb)
        B[:, layout.bulk_slice] -= area * lap.T
    for j, (rule, proj) in enumerate(zip(erules, eprojs)):
        Ge = grad_cell_basis(cb, rule.points)
        flux = Ge[:, :, 0] * rule.normals[:, 0:1] + Ge[:, :, 1] * rule.normals[:, 1:2]
        mom = proj._E.T @ (rule.weights[:, None] * flux)
        coeff = _solve(proj.gram, mom, "edge Gram")
        B[:, layout.edge_slice(j)] += lengths[j] * coeff.T

    if k == 1:
        row = np.zeros(npk)
        for rule, Vq in zip(erules, edge_V):
            row += rule.weights @ Vq
        Ghat[0, :] = row
        B[0, :] = 0.0
        for j in range(layout.n_edges):
            B[0, layout.edge_slice(j).start] = lengths[j]
    else:
        Ghat[0, :] = mass[0, :]
        B[0, :] = 0.0
        B[0, layout.bulk_slice.start] = area
    p_nabla = _solve(Ghat, B, "energy-projection system")

    # Gradient projection, x- and y-components against the degree-(k-1) basis.
    cb1 = cell_basis(cell.star_center, cell.diameter, k - 1)
    M1 = mass[:np1, :np1]
    Bx = np.zeros((np1, n_dof))
    By = np.zeros((np1, n_dof))
    if npb and k >= 2:
        Bx[:, layout.bulk_slice] -= area * dx_coefficient_map(cb1).T
        By[:, layout.bulk_slice] -= area * dy_coefficient_map(cb1).T
    for j, (rule, proj) in enumerate(zip(erules, eprojs)):
        V1 = edge_V[j][:, :np1]
        for B_comp, comp in ((Bx, 0), (By, 1)):
            mom = proj._E.T @ ((rule.weights * rule.normals[:, comp])[:, None] * V1)
            coeff = _solve(proj.gram, mom, "edge Gram")
            B_comp[:, layout.edge_slice(j)] += lengths[j] * coeff.T
    p_grad = np.vstack([_solve(M1, Bx, "gradient mass system"),
                        _solve(M1, By, "gradient mass system")])

    # Scalar L2 projections via the enhancement constraint.
    mu = np.zeros((npk, n_dof))
    if npb:
        mu[:npb, layout.bulk_slice] = area * np.eye(npb)
    mu[npb:, :] = mass[npb:, :] @ p_nabla
    p_l2 = _solve(mass, mu, "mass system")
    p_l2_lower = _solve(M1, mu[:np1, :], "mass system")

    cond = {
        "mass": float(np.linalg.cond(mass)),
        "energy": float(np.linalg.cond(Ghat)),
    }
    return ProjectorPack(
        cell_index=cell_index, k=k, basis=cb, layout=layout,
        cell_rule=crule, edge_rules=tuple(erules), edge_projections=tuple(eprojs),
        edge_lengths=lengths, mass=mass, stiffness=stiffness,
        p_nabla=p_nabla, p_grad=p_grad, p_l2=p_l2, p_l2_lower=p_l2_lower,
        dofs_of_poly=D, cond=cond)


def build_all_packs(mesh, k, degree=None):
    """Projector packs for every cell (pure per-cell work)."""
    return [build_projector_pack(mesh, ci, k, degree=degree)
            for ci in range(len(mesh.cells))]


def ritz_galerkin_projector(mesh, cell_index, k):
    return build_projector_pack(mesh, cell_index, k).p_nabla


def gradient_l2_projector(mesh, cell_index, k):
    return build_projector_pack(mesh, cell_index, k).p_grad


def scalar_l2_projector(mesh, cell_index, k):
    return build_projector_pack(mesh, cell_index, k).p_l2


def dofs_of_polynomial(mesh, cell_index, k):
    return build_projector_pack(mesh, cell_index, k).dofs_of_poly
