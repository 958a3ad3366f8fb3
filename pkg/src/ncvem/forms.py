"""Per-cell discrete bilinear forms and load vectors.

For DoF vectors u, v of one cell the assembled blocks realize

* diffusion:  (a grad_proj u) . (grad_proj v) integrated by the cell rule,
  plus the dofi-dofi stabilization of the energy-projection remainders;
* advection:  -(value_proj u) (b . grad_proj v);
* reaction:   c (value_proj u) (value_proj v);
* load:       f (value_proj v);

where grad_proj/value_proj are the degree-(k-1) projections from the
projector pack.  Coefficients are evaluated at physical quadrature nodes;
for region-tagged meshes the coefficient branch is selected per cell, so
quadrature never crosses the interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
import scipy.linalg

from .basis import eval_cell_basis, monomial_count
from .errors import CoefficientError


@dataclass(frozen=True)
class CoefficientField:
    """Variable coefficients of the operator -div(a grad u) + div(b u) + c u = f.

    All entries are vectorized callables of (x, y) arrays: ``a`` returns
    (n, 2, 2) symmetric matrices, ``b`` returns (n, 2), ``c`` and ``f`` return
    (n,).  ``regions`` optionally maps a material label to a full coefficient
    set (used by the interface problem).
    """

    a: Callable
    b: Callable
    c: Callable
    f: Callable
    regions: Optional[Mapping[int, "CoefficientField"]] = None

    def for_region(self, region):
        if self.regions is not None and region in self.regions:
            return self.regions[region]
        return self


def constant_coefficients(a=((1.0, 0.0), (0.0, 1.0)), b=(0.0, 0.0), c=0.0, f=0.0):
    """Convenience constructor for constant-coefficient problems."""
    a_mat = np.array(a, dtype=float)
    b_vec = np.array(b, dtype=float)

    def a_fn(x, y):
        return np.broadcast_to(a_mat, np.shape(x) + (2, 2)).copy()

    def b_fn(x, y):
        return np.broadcast_to(b_vec, np.shape(x) + (2,)).copy()

    return CoefficientField(
        a=a_fn, b=b_fn,
        c=lambda x, y: np.full_like(np.asarray(x, dtype=float), float(c)),
        f=lambda x, y: np.full_like(np.asarray(x, dtype=float), float(f)))


def coefficient_field(name, kappa1=1.0, kappa2=1e5):
    """Registry of the built-in test-problem coefficients.

    Keys: ``case1``, ``case2``, ``case3`` (the latter takes the two
    diffusion scalings).  User-defined problems pass their own
    :class:`CoefficientField` instead.
    """
    from . import cases

    if name == "case1":
        return cases.case1().coefficients
    if name == "case2":
        return cases.case2().coefficients
    if name == "case3":
        return cases.case3(kappa1=kappa1, kappa2=kappa2).coefficients
    raise KeyError(f"unknown coefficient set {name!r}")


@dataclass(eq=False)
class LocalSystem:
    """Blocks of the discrete bilinear form of one cell."""

    a_mat: np.ndarray
    s_mat: np.ndarray
    b_mat: np.ndarray
    c_mat: np.ndarray
    f_vec: np.ndarray

    @property
    def full(self):
        return self.a_mat + self.s_mat + self.b_mat + self.c_mat


def _check_elliptic(a_vals):
    a11, a22 = a_vals[:, 0, 0], a_vals[:, 1, 1]
    a12, a21 = a_vals[:, 0, 1], a_vals[:, 1, 0]
    if np.max(np.abs(a12 - a21)) > 1e-12 * max(1.0, float(np.max(np.abs(a_vals)))):
        raise CoefficientError("diffusion matrix is not symmetric")
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    eig_min = 0.5 * (tr - np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0)))
    if np.min(eig_min) <= 0.0:
        raise CoefficientError(
            f"diffusion matrix loses ellipticity (min eigenvalue {np.min(eig_min):.3e})")


def assemble_local(mesh, cell_index, pack, coeff):
    """Assemble the local system blocks for one cell.

    Raises
    ------
    CoefficientError
        If the diffusion matrix is nonsymmetric or loses ellipticity at a
        quadrature node.
    """
    cf = coeff.for_region(int(mesh.region_of_cell[cell_index]))
    rule = pack.cell_rule
    x, y = rule.points[:, 0], rule.points[:, 1]
    w = rule.weights
    np1 = monomial_count(pack.k - 1)

    E1 = eval_cell_basis(pack.basis, rule.points)[:, :np1]
    GX = E1 @ pack.p_grad[:np1, :]
    GY = E1 @ pack.p_grad[np1:, :]
    P0 = E1 @ pack.p_l2_lower

    a_vals = np.asarray(cf.a(x, y), dtype=float)
    _check_elliptic(a_vals)
    a_cons = GX.T @ ((w * a_vals[:, 0, 0])[:, None] * GX) \
        + GX.T @ ((w * a_vals[:, 0, 1])[:, None] * GY) \
        + GY.T @ ((w * a_vals[:, 1, 0])[:, None] * GX) \
        + GY.T @ ((w * a_vals[:, 1, 1])[:, None] * GY)

    Q = np.eye(pack.n_dof) - pack.dofs_of_poly @ pack.p_nabla
    s_mat = Q.T @ Q

    b_vals = np.asarray(cf.b(x, y), dtype=float)
    T = (w * b_vals[:, 0])[:, None] * GX + (w * b_vals[:, 1])[:, None] * GY
    b_mat = -T.T @ P0

    c_vals = np.asarray(cf.c(x, y), dtype=float)
    c_mat = P0.T @ ((w * c_vals)[:, None] * P0)

    f_vals = np.asarray(cf.f(x, y), dtype=float)
    f_vec = P0.T @ (w * f_vals)

    return LocalSystem(a_mat=a_cons, s_mat=s_mat, b_mat=b_mat, c_mat=c_mat,
                       f_vec=f_vec)


def reference_h1_gram(mesh, cell_index, pack):
    """Computable surrogate H1 Gram: identity-coefficient consistency part
    plus the plain dofi-dofi inner product."""
    rule = pack.cell_rule
    w = rule.weights
    np1 = monomial_count(pack.k - 1)
    E1 = eval_cell_basis(pack.basis, rule.points)[:, :np1]
    GX = E1 @ pack.p_grad[:np1, :]
    GY = E1 @ pack.p_grad[np1:, :]
    cons = GX.T @ (w[:, None] * GX) + GY.T @ (w[:, None] * GY)
    return cons + np.eye(pack.n_dof)


def stability_ratio(mesh, cell_index, pack, system):
    """Generalized eigenvalue bracket of the diffusion block against the
    reference H1 Gram, excluding the constant kernel direction."""
    A = system.a_mat + system.s_mat
    A = 0.5 * (A + A.T)
    H = reference_h1_gram(mesh, cell_index, pack)
    vals = scipy.linalg.eigh(A, H, eigvals_only=True)
    cutoff = 1e-12 * max(vals.max(), 1.0)
    positive = vals[vals > cutoff]
    if positive.size == 0:
        return 0.0, 0.0
    return float(positive.min()), float(positive.max())
