"""Monomial bases: dimensions, derivatives, coefficient maps."""

import numpy as np
import pytest

from ncvem import (cell_basis, divergence_vector_basis, dx_coefficient_map,
                   dy_coefficient_map, edge_basis, eval_cell_basis,
                   eval_edge_basis, grad_cell_basis, laplacian_cell_basis,
                   laplacian_coefficient_map, monomial_count,
                   monomial_exponents)

RNG = np.random.default_rng(20240311)


def random_points(n, center, scale):
    return np.asarray(center) + scale * RNG.uniform(-0.5, 0.5, size=(n, 2))


@pytest.mark.parametrize("order", [0, 1, 2, 3, 4])
def test_dimensions(order):
    assert monomial_count(order) == (order + 1) * (order + 2) // 2
    assert edge_basis(0.0, 1.0, order).dim == order + 1


def test_graded_lex_ordering():
    ex = monomial_exponents(2)
    assert [tuple(e) for e in ex] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_first_monomial_is_one():
    cb = cell_basis((0.3, 0.4), 0.7, 3)
    pts = random_points(20, cb.center, cb.scale)
    assert np.allclose(eval_cell_basis(cb, pts)[:, 0], 1.0)


def test_linear_monomial_value_at_offset():
    cb = cell_basis((0.5, 0.5), np.sqrt(2.0), 1)
    vals = eval_cell_basis(cb, [[0.5 + np.sqrt(2.0), 0.5]])
    assert abs(vals[0, 1] - 1.0) < 1e-15


def test_projection_reproduces_polynomial():
    """Least-squares fit of a degree-n polynomial in the basis reproduces its
    values (exact linear-algebra identity checked numerically)."""
    cb = cell_basis((0.2, -0.1), 1.3, 3)
    pts = random_points(60, cb.center, cb.scale)
    V = eval_cell_basis(cb, pts)
    target = (1.7 - 0.3 * pts[:, 0] + pts[:, 1] ** 2
              + 0.25 * pts[:, 0] * pts[:, 1] ** 2)
    coeff, *_ = np.linalg.lstsq(V, target, rcond=None)
    check = eval_cell_basis(cb, random_points(40, cb.center, cb.scale))
    pts2 = random_points(40, cb.center, cb.scale)
    vals = eval_cell_basis(cb, pts2) @ coeff
    exact = (1.7 - 0.3 * pts2[:, 0] + pts2[:, 1] ** 2
             + 0.25 * pts2[:, 0] * pts2[:, 1] ** 2)
    assert np.max(np.abs(vals - exact)) < 1e-12


def test_gradient_matches_finite_differences():
    cb = cell_basis((0.1, 0.9), 0.8, 4)
    pts = random_points(15, cb.center, cb.scale)
    step = 1e-7 * cb.scale
    g = grad_cell_basis(cb, pts)
    for d, offset in ((0, np.array([step, 0.0])), (1, np.array([0.0, step]))):
        fd = (eval_cell_basis(cb, pts + offset) - eval_cell_basis(cb, pts - offset)) \
            / (2.0 * step)
        assert np.max(np.abs(g[:, :, d] - fd)) < 1e-6


def test_gradient_of_constant_vanishes():
    cb = cell_basis((0.0, 0.0), 1.0, 2)
    g = grad_cell_basis(cb, random_points(5, cb.center, cb.scale))
    assert np.allclose(g[:, 0, :], 0.0)


def test_laplacian_coefficient_map_quadratic():
    cb = cell_basis((0.0, 0.0), 0.5, 2)
    L = laplacian_coefficient_map(cb)
    # alpha = (2, 0) sits at index 3; its laplacian is 2/h^2 times the constant
    assert abs(L[0, 3] - 2.0 / 0.25) < 1e-14
    assert np.allclose(L[:, :3], 0.0)


def test_laplacian_map_agrees_with_pointwise():
    cb = cell_basis((0.4, 0.6), 1.1, 4)
    pts = random_points(25, cb.center, cb.scale)
    L = laplacian_coefficient_map(cb)
    lower = cell_basis(cb.center, cb.scale, 2)
    via_map = eval_cell_basis(lower, pts) @ L
    pointwise = laplacian_cell_basis(cb, pts)
    assert np.max(np.abs(via_map - pointwise)) < 1e-12


def test_derivative_maps_match_pointwise():
    cb = cell_basis((0.0, 0.0), 2.0, 3)
    pts = random_points(20, cb.center, cb.scale)
    lower = cell_basis(cb.center, cb.scale, 2)
    E = eval_cell_basis(lower, pts)
    g = grad_cell_basis(cb, pts)
    assert np.max(np.abs(E @ dx_coefficient_map(cb) - g[:, :, 0])) < 1e-13
    assert np.max(np.abs(E @ dy_coefficient_map(cb) - g[:, :, 1])) < 1e-13


def test_divergence_vector_basis():
    cb = cell_basis((0.0, 0.0), 1.0, 2)
    pts = random_points(10, cb.center, cb.scale)
    div = divergence_vector_basis(cb, pts)
    g = grad_cell_basis(cb, pts)
    assert np.allclose(div[:, :cb.dim], g[:, :, 0])
    assert np.allclose(div[:, cb.dim:], g[:, :, 1])


# -- edge basis ---------------------------------------------------------------

def test_edge_basis_first_member_is_one():
    eb = edge_basis(0.25, 0.75, 3)
    t = np.linspace(0.25, 0.75, 7)
    assert np.allclose(eval_edge_basis(eb, t)[:, 0], 1.0)


def test_edge_basis_spans_polynomials():
    # the Vandermonde against plain monomials is square and well conditioned:
    # same span as the scaled monomial family
    eb = edge_basis(-1.0, 3.0, 4)
    t = np.linspace(-1.0, 3.0, 5)
    V = eval_edge_basis(eb, t)
    assert np.linalg.matrix_rank(V) == 5


def test_edge_basis_orthonormal_in_mean():
    """On a straight edge the basis is orthonormal for the averaged measure
    (this is what keeps the stabilization equilibrated across moments)."""
    eb = edge_basis(0.0, 2.0, 3)
    xi, w = np.polynomial.legendre.leggauss(8)
    t = 1.0 + xi
    V = eval_edge_basis(eb, t)
    gram = V.T @ (w[:, None] * V) / 2.0
    assert np.max(np.abs(gram - np.eye(4))) < 1e-13


def test_edge_basis_orientation_flip():
    """Reversing the parameter interval flips odd members only."""
    fwd = edge_basis(0.0, 1.0, 3)
    rev = edge_basis(1.0, 0.0, 3)
    t = np.linspace(0.0, 1.0, 9)
    vf = eval_edge_basis(fwd, t)
    vr = eval_edge_basis(rev, t)
    assert np.allclose(vf[:, 0::2], vr[:, 0::2])
    assert np.allclose(vf[:, 1::2], -vr[:, 1::2])


def test_edge_gram_on_unit_edge_matches_analytic():
    # 3-point Gauss integrates the degree-2 basis Gram exactly
    eb = edge_basis(0.0, 1.0, 1)
    xi, w = np.polynomial.legendre.leggauss(3)
    t = 0.5 + 0.5 * xi
    V = eval_edge_basis(eb, t)
    gram = V.T @ ((0.5 * w)[:, None] * V)
    assert np.allclose(gram, np.diag([1.0, 1.0]), atol=1e-14)
