"""Projector matrices: reproduction, idempotence, enhancement, orientation."""

import numpy as np
import pytest

from ncvem import (Cell, Edge, Mesh, build_projector_pack, cell_basis,
                   dofs_of_polynomial, dx_coefficient_map, dy_coefficient_map,
                   edge_l2_projection, eval_cell_basis, eval_edge_basis,
                   generate_square_quad_mesh, generate_voronoi_mesh,
                   gradient_l2_projector, monomial_count,
                   ritz_galerkin_projector, scalar_l2_projector)
from conftest import curved_quad_mesh, sample_cells


# -- edge L2 projection -------------------------------------------------------

def test_edge_projection_idempotent_on_own_range():
    mesh = curved_quad_mesh(3)
    for ei in (0, 5, len(mesh.edges) - 1):
        ci = mesh.edge_cells[ei][0]
        proj = edge_l2_projection(mesh, ei, ci, order=2)
        V = eval_edge_basis(proj.basis, proj.rule.t)
        for j in range(3):
            coeff = proj.project(V[:, j])
            target = np.zeros(3)
            target[j] = 1.0
            assert np.max(np.abs(coeff - target)) < 1e-12


def test_edge_projection_order_zero_is_mean():
    mesh = generate_square_quad_mesh(1)
    bottom = next(ei for ei, e in enumerate(mesh.edges)
                  if np.allclose(mesh.vertices[[e.v0, e.v1], 1], 0.0))
    proj = edge_l2_projection(mesh, bottom, 0, order=0)
    values = proj.rule.t  # v = t on the arclength-parametrized edge
    coeff = proj.project(values)
    assert abs(coeff[0] - 0.5) < 1e-14


def test_curved_edge_projection_matches_dense_lsq():
    """Projection residual on a curved edge against a dense least-squares
    oracle in the arclength measure."""
    mesh = curved_quad_mesh(2)
    ei = next(i for i, e in enumerate(mesh.edges) if e.is_curved)
    ci = mesh.edge_cells[ei][0]
    order = 2
    proj = edge_l2_projection(mesh, ei, ci, order=order)

    def fun(p):
        return np.sin(3.0 * p[:, 0]) + p[:, 1] ** 2

    coeff = proj.project(fun(proj.rule.points))
    # dense oracle: weighted least squares on a refined rule
    from ncvem import edge_rule
    fine = edge_rule(mesh, ei, ci, degree=24, excess=20)
    Vf = eval_edge_basis(proj.basis, fine.t)
    sw = np.sqrt(fine.weights)
    oracle, *_ = np.linalg.lstsq(sw[:, None] * Vf, sw * fun(fine.points), rcond=None)
    assert np.max(np.abs(coeff - oracle)) < 1e-10


# -- reproduction on straight cells -------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_reproduction_straight_cells(k, mesh_zoo):
    for name in ("quad", "voronoi", "concave"):
        mesh = mesh_zoo[name]
        pack = build_projector_pack(mesh, 0, k)
        I = np.eye(pack.basis.dim)
        assert np.max(np.abs(pack.p_nabla @ pack.dofs_of_poly - I)) < 1e-11
        assert np.max(np.abs(pack.p_l2 @ pack.dofs_of_poly - I)) < 1e-11
        np1 = monomial_count(k - 1)
        G = pack.p_grad @ pack.dofs_of_poly
        assert np.max(np.abs(G[:np1] - dx_coefficient_map(pack.basis))) < 1e-11
        assert np.max(np.abs(G[np1:] - dy_coefficient_map(pack.basis))) < 1e-11


def test_constants_are_fixed_points_everywhere(mesh_zoo):
    for mesh in mesh_zoo.values():
        pack = build_projector_pack(mesh, 0, 2)
        e0 = np.zeros(pack.basis.dim)
        e0[0] = 1.0
        got = pack.p_nabla @ pack.dofs_of_poly[:, 0]
        assert np.max(np.abs(got - e0)) < 1e-12


def test_linear_reproduction_square_k1():
    mesh = generate_square_quad_mesh(1)
    pack = build_projector_pack(mesh, 0, 1)
    # v = x: second column of dofs_of_poly is the scaled monomial (x-cx)/h
    got = pack.p_nabla @ pack.dofs_of_poly[:, 1]
    want = np.zeros(3)
    want[1] = 1.0
    assert np.max(np.abs(got - want)) < 1e-12


def test_curved_cells_near_identity_improves_with_h():
    devs = []
    for n in (4, 8):
        mesh = curved_quad_mesh(n)
        ci = next(i for i, c in enumerate(mesh.cells)
                  if any(mesh.edges[e].is_curved for e in c.edges))
        pack = build_projector_pack(mesh, ci, 2)
        R = pack.p_nabla @ pack.dofs_of_poly
        devs.append(np.max(np.abs(R - np.eye(pack.basis.dim))))
    assert devs[1] < devs[0]  # qualitative O(h) statement


# -- scalar L2 projector ------------------------------------------------------

@pytest.mark.parametrize("k", [2, 3, 4])
def test_low_degree_polynomials_reproduced_from_moments(k):
    mesh = generate_voronoi_mesh(8, lloyd_iters=2, rng_seed=6)
    pack = build_projector_pack(mesh, 3, k)
    nb = monomial_count(k - 2)
    R = pack.p_l2 @ pack.dofs_of_poly
    assert np.max(np.abs(R[:, :nb] - np.eye(pack.basis.dim)[:, :nb])) < 1e-12


def test_enhancement_consistency(mesh_zoo):
    """Low-order moments of the order-k L2 projection of every DoF basis
    vector agree with the bulk DoFs themselves."""
    for mesh in mesh_zoo.values():
        for k in (2, 3):
            pack = build_projector_pack(mesh, 0, k)
            nb = pack.layout.n_bulk
            moments = pack.mass[:nb, :] @ pack.p_l2 / pack.area
            target = np.zeros((nb, pack.n_dof))
            target[:, pack.layout.bulk_slice] = np.eye(nb)
            assert np.max(np.abs(moments - target)) < 1e-12


# -- gradient projector -------------------------------------------------------

def test_gradient_of_constant_is_zero(mesh_zoo):
    for mesh in mesh_zoo.values():
        pack = build_projector_pack(mesh, 0, 3)
        g = pack.p_grad @ pack.dofs_of_poly[:, 0]
        assert np.max(np.abs(g)) < 1e-12


def test_gradient_projection_stable_on_polynomials():
    """L2 norm of the projected gradient of a polynomial never exceeds the
    norm of its true gradient (projection property, straight cells)."""
    rng = np.random.default_rng(11)
    mesh = generate_voronoi_mesh(10, lloyd_iters=2, rng_seed=2)
    k = 3
    for ci in range(0, len(mesh.cells), 3):
        pack = build_projector_pack(mesh, ci, k)
        np1 = monomial_count(k - 1)
        M1 = pack.mass[:np1, :np1]
        dx = dx_coefficient_map(pack.basis)
        dy = dy_coefficient_map(pack.basis)
        for _ in range(5):
            c = rng.standard_normal(pack.basis.dim)
            g = pack.p_grad @ (pack.dofs_of_poly @ c)
            lhs = g[:np1] @ M1 @ g[:np1] + g[np1:] @ M1 @ g[np1:]
            gx, gy = dx @ c, dy @ c
            rhs = gx @ M1 @ gx + gy @ M1 @ gy
            assert lhs <= rhs * (1.0 + 1e-9)


# -- DoFs of polynomials ------------------------------------------------------

def test_dofs_of_constant():
    mesh = generate_square_quad_mesh(2)
    for k in (1, 2, 3):
        pack = build_projector_pack(mesh, 0, k)
        col = pack.dofs_of_poly[:, 0]
        for j in range(pack.layout.n_edges):
            sl = pack.layout.edge_slice(j)
            assert abs(col[sl.start] - 1.0) < 1e-13      # zeroth edge moment
        if pack.layout.n_bulk:
            assert abs(col[pack.layout.bulk_slice.start] - 1.0) < 1e-13


def test_pentagon_dof_count():
    verts = [[0, 0], [1, 0], [1.2, 0.8], [0.5, 1.3], [-0.2, 0.7]]
    edges = [Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(3, 4), Edge(0, 4)]
    mesh = Mesh(verts, edges, [[0, 1, 2, 3, 4]])
    pack = build_projector_pack(mesh, 0, 2)
    assert pack.dofs_of_poly.shape == (11, 6)


def test_op_wrappers_consistent():
    mesh = generate_square_quad_mesh(2)
    k = 2
    pack = build_projector_pack(mesh, 1, k)
    assert np.allclose(ritz_galerkin_projector(mesh, 1, k), pack.p_nabla)
    assert np.allclose(gradient_l2_projector(mesh, 1, k), pack.p_grad)
    assert np.allclose(scalar_l2_projector(mesh, 1, k), pack.p_l2)
    assert np.allclose(dofs_of_polynomial(mesh, 1, k), pack.dofs_of_poly)


# -- orientation neutrality ---------------------------------------------------

def test_shared_edge_functionals_agree(mesh_zoo):
    """The edge-moment rows of the DoF matrix of a global polynomial agree
    when computed from either incident cell."""
    for mesh in mesh_zoo.values():
        k = 3
        ei = next(i for i, e in enumerate(mesh.edges)
                  if len(mesh.edge_cells[i]) == 2)
        ca, cb = mesh.edge_cells[ei]
        pa = build_projector_pack(mesh, ca, k)
        pb = build_projector_pack(mesh, cb, k)
        # global polynomial: express in each cell's own basis via sampling
        rng = np.random.default_rng(5)
        pts = mesh.vertices[[mesh.edges[ei].v0, mesh.edges[ei].v1]].mean(axis=0) \
            + 0.3 * rng.standard_normal((40, 2))

        def poly(p):
            return 0.3 + p[:, 0] - 2.0 * p[:, 1] + p[:, 0] * p[:, 1] + p[:, 1] ** 3

        rows = []
        for pack in (pa, pb):
            V = eval_cell_basis(pack.basis, pts)
            coeff, *_ = np.linalg.lstsq(V, poly(pts), rcond=None)
            j = list(mesh.cells[pack.cell_index].edges).index(ei)
            rows.append(pack.dofs_of_poly[pack.layout.edge_slice(j), :] @ coeff)
        assert np.max(np.abs(rows[0] - rows[1])) < 1e-12


# -- randomized suite over the zoo ---------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3])
def test_randomized_cells_invariants(k, mesh_zoo):
    for name, mesh, ci, curved in sample_cells(mesh_zoo, 25, rng_seed=k):
        pack = build_projector_pack(mesh, ci, k)
        I = np.eye(pack.basis.dim)
        R = pack.p_nabla @ pack.dofs_of_poly
        if curved:
            assert np.max(np.abs(R[:, 0] - I[:, 0])) < 1e-12
        else:
            assert np.max(np.abs(R - I)) < 1e-11
        # edge projection idempotence on its range
        proj = pack.edge_projections[0]
        V = eval_edge_basis(proj.basis, proj.rule.t)
        coeff = proj.project(V[:, -1])
        tgt = np.zeros(proj.basis.dim)
        tgt[-1] = 1.0
        assert np.max(np.abs(coeff - tgt)) < 1e-12
