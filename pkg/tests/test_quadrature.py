"""Quadrature exactness, certification and divergence-theorem closure."""

import numpy as np
import pytest

from ncvem import (cell_basis, cell_rule, edge_rule, eval_cell_basis,
                   gauss_legendre, generate_concave_mesh,
                   generate_interface_mesh, generate_square_quad_mesh,
                   generate_voronoi_mesh, make_curve,
                   map_mesh_to_curved_domain)

# frozen oracle: scipy.integrate.quad of sqrt(1 + (pi/20 cos(pi x))^2) on [0,1]
SIN_PI_OVER20_ARCLENGTH = 1.006140254425331


def curved_case2_mesh(n=4):
    return map_mesh_to_curved_domain(generate_square_quad_mesh(n),
                                     make_curve("sin_pi_over20"),
                                     make_curve("sin_3pi_over20"))


# -- Gauss-Legendre -----------------------------------------------------------

def test_gl_one_point():
    x, w = gauss_legendre(1)
    assert np.allclose(x, [0.0]) and np.allclose(w, [2.0])


def test_gl_two_points():
    x, w = gauss_legendre(2)
    assert np.allclose(sorted(x), [-1 / np.sqrt(3), 1 / np.sqrt(3)])
    assert np.allclose(w, [1.0, 1.0])


def test_gl_five_points_degree_eight():
    x, w = gauss_legendre(5)
    assert abs(np.dot(w, x ** 8) - 2.0 / 9.0) < 1e-14


def test_gl_exactness_sweep():
    for n in (1, 3, 7, 15, 30):
        x, w = gauss_legendre(n)
        for p in range(2 * n - 1):
            exact = 2.0 / (p + 1) if p % 2 == 0 else 0.0
            assert abs(np.dot(w, x ** p) - exact) < 1e-13


def test_gl_out_of_range():
    for bad in (0, 31, -2):
        with pytest.raises(ValueError):
            gauss_legendre(bad)


# -- edge rules ---------------------------------------------------------------

def test_straight_edge_rule_arclength():
    m = generate_square_quad_mesh(1)
    bottom = next(ei for ei, e in enumerate(m.edges)
                  if np.allclose(m.vertices[[e.v0, e.v1], 1], 0.0))
    rule = edge_rule(m, bottom, 0, degree=3)
    assert abs(rule.arclength - 1.0) < 1e-14


def test_straight_bottom_edge_normal():
    m = generate_square_quad_mesh(1)
    bottom = next(ei for ei, e in enumerate(m.edges)
                  if np.allclose(m.vertices[[e.v0, e.v1], 1], 0.0))
    rule = edge_rule(m, bottom, 0, degree=2)
    assert np.allclose(rule.normals, [0.0, -1.0])


def test_curved_edge_arclength_matches_oracle():
    # single curved edge spanning the whole bottom graph y = sin(pi x)/20
    m = curved_case2_mesh(1)
    curved = [ei for ei, e in enumerate(m.edges) if e.is_curved
              and m.curves[e.curve].name == "sin_pi_over20"]
    assert len(curved) == 1
    rule = edge_rule(m, curved[0], m.edge_cells[curved[0]][0], degree=6)
    assert abs(rule.arclength - SIN_PI_OVER20_ARCLENGTH) < 1e-12


def test_edge_rule_weight_sum_matches_mesh_length():
    m = curved_case2_mesh(4)
    for ei in range(len(m.edges)):
        ci = m.edge_cells[ei][0]
        rule = edge_rule(m, ei, ci, degree=8)
        assert abs(rule.arclength - m.edge_lengths[ei]) < 1e-13 * m.edge_lengths[ei]


def test_edge_normals_unit_and_outward():
    m = curved_case2_mesh(3)
    for ci, cell in enumerate(m.cells):
        center = cell.star_center
        for ei in cell.edges:
            rule = edge_rule(m, ei, ci, degree=4)
            assert np.allclose(np.linalg.norm(rule.normals, axis=1), 1.0, atol=1e-13)
            outward = np.sum((rule.points - center) * rule.normals, axis=1)
            assert np.all(outward > 0.0)


def test_edge_rule_refinement_stability():
    # doubling the excess点 changes certified integrals below 1e-12 relative
    m = curved_case2_mesh(2)
    ei = next(i for i, e in enumerate(m.edges) if e.is_curved)
    ci = m.edge_cells[ei][0]
    r1 = edge_rule(m, ei, ci, degree=6)
    r2 = edge_rule(m, ei, ci, degree=6, excess=12)
    assert abs(r1.arclength - r2.arclength) < 1e-12 * r1.arclength


# -- cell rules ---------------------------------------------------------------

def test_unit_square_cell_rule_area():
    m = generate_square_quad_mesh(1)
    rule = cell_rule(m, 0, 2)
    assert abs(rule.area - 1.0) < 1e-14


def test_triangle_first_moment():
    from ncvem import Cell, Edge, Mesh
    mesh = Mesh([[0, 0], [1, 0], [0, 1]],
                [Edge(0, 1), Edge(1, 2), Edge(0, 2)], [[0, 1, 2]])
    rule = cell_rule(mesh, 0, 3)
    assert abs(rule.weights @ rule.points[:, 0] - 1.0 / 6.0) < 1e-14


def test_cell_rule_positive_weights():
    for mesh in (generate_concave_mesh(2), curved_case2_mesh(3),
                 generate_voronoi_mesh(9, 2, 0)):
        for ci in range(len(mesh.cells)):
            assert np.all(cell_rule(mesh, ci, 6).weights > 0.0)


def test_curved_cell_area_against_refined_oracle():
    m = curved_case2_mesh(4)
    for ci, cell in enumerate(m.cells):
        if not any(m.edges[ei].is_curved for ei in cell.edges):
            continue
        coarse = cell_rule(m, ci, 4)
        fine = cell_rule(m, ci, 12, excess=10)
        assert abs(coarse.area - fine.area) < 1e-12 * fine.area


def test_monomial_exactness_all_shapes():
    meshes = [generate_square_quad_mesh(2), generate_voronoi_mesh(6, 2, 1),
              generate_concave_mesh(2), curved_case2_mesh(3)]
    degree = 6
    for mesh in meshes:
        for ci in (0, len(mesh.cells) - 1):
            cell = mesh.cells[ci]
            rule = cell_rule(mesh, ci, degree)
            fine = cell_rule(mesh, ci, 2 * degree + 2, excess=8)
            cb = cell_basis(cell.star_center, cell.diameter, degree)
            m1 = eval_cell_basis(cb, rule.points).T @ rule.weights
            m2 = eval_cell_basis(cb, fine.points).T @ fine.weights
            assert np.max(np.abs(m1 - m2)) < 1e-12 * max(fine.area, np.max(np.abs(m2)))


def test_divergence_theorem_closure():
    """Boundary flux of a linear field equals the bulk integral of its
    divergence on every cell shape, including curved ones."""
    meshes = [generate_square_quad_mesh(2), generate_voronoi_mesh(8, 2, 2),
              generate_concave_mesh(2), curved_case2_mesh(3),
              generate_interface_mesh(4)]
    for mesh in meshes:
        for ci, cell in enumerate(mesh.cells):
            vol = 2.0 * cell_rule(mesh, ci, 3).area   # div (x, y) = 2
            surf = 0.0
            for ei in cell.edges:
                rule = edge_rule(mesh, ei, ci, degree=3)
                surf += np.sum(rule.weights * np.sum(rule.points * rule.normals, axis=1))
            assert abs(vol - surf) < 1e-11 * max(1.0, abs(vol))
