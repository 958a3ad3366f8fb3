"""Shared fixtures: mesh menagerie for the operator-level suites."""

import numpy as np
import pytest

from ncvem import (generate_concave_mesh, generate_square_quad_mesh,
                   generate_voronoi_mesh, make_curve,
                   map_mesh_to_curved_domain)


def curved_quad_mesh(n):
    return map_mesh_to_curved_domain(generate_square_quad_mesh(n),
                                     make_curve("sin_pi_over20"),
                                     make_curve("sin_3pi_over20"))


def curved_voronoi_mesh(n_seeds, seed):
    return map_mesh_to_curved_domain(
        generate_voronoi_mesh(n_seeds, lloyd_iters=3, rng_seed=seed),
        make_curve("sin_pi_over20"), make_curve("sin_3pi_over20"))


@pytest.fixture(scope="session")
def mesh_zoo():
    """A mix of straight and curved meshes covering every generator."""
    return {
        "quad": generate_square_quad_mesh(3),
        "voronoi": generate_voronoi_mesh(12, lloyd_iters=2, rng_seed=4),
        "concave": generate_concave_mesh(2),
        "curved_quad": curved_quad_mesh(4),
        "curved_voronoi": curved_voronoi_mesh(16, 9),
    }


def sample_cells(mesh_zoo, count, rng_seed=0, curved_only=False):
    """Deterministic sample of (mesh, cell index) pairs across the zoo."""
    rng = np.random.default_rng(rng_seed)
    pool = []
    for name, mesh in mesh_zoo.items():
        for ci in range(len(mesh.cells)):
            curved = any(mesh.edges[ei].is_curved for ei in mesh.cells[ci].edges)
            if curved_only and not curved:
                continue
            pool.append((name, mesh, ci, curved))
    idx = rng.choice(len(pool), size=min(count, len(pool)), replace=False)
    return [pool[i] for i in sorted(idx)]
