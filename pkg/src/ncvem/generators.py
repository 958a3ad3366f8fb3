"""Mesh generators for the built-in experiment geometries.

All generators are deterministic for fixed inputs (including the RNG seed)
and produce counterclockwise cells with canonical edges.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Voronoi

from .curves import CurveParam, graph_curve, make_curve
from .errors import GenerationError, MeshError
from .mesh import BOUNDARY, INTERFACE, Cell, Edge, Mesh


class _Builder:
    """Accumulates deduplicated vertices/edges and cell loops."""

    def __init__(self, decimals=12):
        self.decimals = decimals
        self._vkey = {}
        self.vertices = []
        self._ekey = {}
        self.edges = []
        self.cells = []
        self.regions = []

    def vertex(self, x, y):
        key = (round(float(x), self.decimals), round(float(y), self.decimals))
        idx = self._vkey.get(key)
        if idx is None:
            idx = len(self.vertices)
            self._vkey[key] = idx
            self.vertices.append((float(x), float(y)))
        return idx

    def edge(self, va, vb, **kw):
        key = (min(va, vb), max(va, vb))
        idx = self._ekey.get(key)
        if idx is None:
            idx = len(self.edges)
            self._ekey[key] = idx
            self.edges.append(Edge(va, vb, **kw))
        return idx

    def cell(self, vertex_ids, region=1):
        eids = [self.edge(vertex_ids[i], vertex_ids[(i + 1) % len(vertex_ids)])
                for i in range(len(vertex_ids))]
        self.cells.append(Cell(eids))
        self.regions.append(region)

    def build(self, curves=()):
        return Mesh(np.array(self.vertices), self.edges, self.cells,
                    curves=curves, region_of_cell=self.regions)


def generate_square_quad_mesh(n):
    """n-by-n grid of axis-aligned quads on the unit square."""
    if n < 1:
        raise ValueError("n must be at least 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    b = _Builder()
    for j in range(n):
        for i in range(n):
            v = [b.vertex(xs[i], xs[j]), b.vertex(xs[i + 1], xs[j]),
                 b.vertex(xs[i + 1], xs[j + 1]), b.vertex(xs[i], xs[j + 1])]
            b.cell(v)
    return b.build()


def generate_concave_mesh(n):
    """Tiling of the unit square by nonconvex hexagons.

    Each quad of an n-by-n grid is split into two congruent hexagons by a
    two-kink zigzag through the quad's mid-height; every hexagon has one
    reflex vertex but stays star-shaped with respect to its centroid.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    ym = 0.5 * (xs[:-1] + xs[1:])
    d = 1.0 / (4.0 * n)
    b = _Builder()
    for j in range(n):
        y0, y1, yc = xs[j], xs[j + 1], ym[j]
        for i in range(n):
            x0, x1 = xs[i], xs[i + 1]
            xa = x0 + (x1 - x0) / 3.0
            xb = x0 + 2.0 * (x1 - x0) / 3.0
            bl = b.vertex(x0, y0)
            br = b.vertex(x1, y0)
            rm = b.vertex(x1, yc)
            k2 = b.vertex(xb, yc - d)
            k1 = b.vertex(xa, yc + d)
            lm = b.vertex(x0, yc)
            tr = b.vertex(x1, y1)
            tl = b.vertex(x0, y1)
            b.cell([bl, br, rm, k2, k1, lm])
            b.cell([lm, k1, k2, rm, tr, tl])
    return b.build()


def _clipped_voronoi(points):
    """Voronoi cells of points in the unit square, clipped exactly to it by
    mirroring the seeds across the four walls."""
    pts = np.asarray(points, dtype=float)
    mirrored = np.vstack([
        pts,
        np.column_stack([-pts[:, 0], pts[:, 1]]),
        np.column_stack([2.0 - pts[:, 0], pts[:, 1]]),
        np.column_stack([pts[:, 0], -pts[:, 1]]),
        np.column_stack([pts[:, 0], 2.0 - pts[:, 1]]),
    ])
    vor = Voronoi(mirrored)
    polys = []
    for i in range(len(pts)):
        region = vor.regions[vor.point_region[i]]
        if len(region) < 3 or -1 in region:
            raise GenerationError(f"unbounded or degenerate Voronoi cell for seed {i}")
        verts = vor.vertices[region]
        center = verts.mean(axis=0)
        order = np.argsort(np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0]))
        polys.append(verts[order])
    return polys


def _polygon_centroid(poly):
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    return np.array([np.sum((x + xn) * cross), np.sum((y + yn) * cross)]) / (6.0 * a)


def generate_voronoi_mesh(n_seeds, lloyd_iters=0, rng_seed=0, seed_points=None):
    """Voronoi mesh of Lloyd-relaxed random seeds clipped to the unit square.

    Parameters
    ----------
    n_seeds : int
        Number of seeds (cells); at least 2.
    lloyd_iters : int
        Centroid-relaxation sweeps before the final diagram.
    rng_seed : int
        Seed for the initial uniform points; fixed seed means a bit-identical
        mesh.
    seed_points : (n, 2) array, optional
        Explicit seeds (overrides the RNG).
    """
    if n_seeds < 2:
        raise ValueError("n_seeds must be at least 2")
    if seed_points is None:
        rng = np.random.default_rng(rng_seed)
        seeds = rng.uniform(0.0, 1.0, size=(n_seeds, 2))
    else:
        seeds = np.array(seed_points, dtype=float)
        if seeds.shape != (n_seeds, 2):
            raise ValueError("seed_points shape must be (n_seeds, 2)")

    def _check_separation(p):
        d2 = np.sum((p[:, None, :] - p[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        if d2.min() < 1e-24:
            raise GenerationError("duplicate seeds (after relaxation)")

    _check_separation(seeds)
    for _ in range(lloyd_iters):
        polys = _clipped_voronoi(seeds)
        seeds = np.array([_polygon_centroid(p) for p in polys])
        _check_separation(seeds)
    polys = _clipped_voronoi(seeds)

    snap = 1e-9
    b = _Builder(decimals=9)
    for poly in polys:
        p = poly.copy()
        for col, wall in ((0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)):
            hit = np.abs(p[:, col] - wall) < snap
            p[hit, col] = wall
        ids = [b.vertex(x, y) for x, y in p]
        loop = [v for i, v in enumerate(ids) if v != ids[(i - 1) % len(ids)]]
        if len(loop) < 3:
            raise GenerationError("Voronoi cell collapsed during deduplication")
        b.cell(loop)
    return b.build()


def _graph_values(curve, x):
    """y-values of a graph-shaped CurveParam; validates the x-component."""
    pts = curve.points(np.asarray(x, dtype=float))
    if np.max(np.abs(pts[:, 0] - np.asarray(x))) > 1e-12:
        raise ValueError(f"curve {curve.name!r} is not a graph y = g(x)")
    return pts[:, 1]


def _is_zero_graph(curve, samples=64):
    x = np.linspace(0.0, 1.0, samples)
    return np.max(np.abs(_graph_values(curve, x))) < 1e-15


def _one_plus(curve):
    if curve.name == "sin_3pi_over20":
        return make_curve("one_plus_sin_3pi_over20")
    return graph_curve("", lambda t: 1.0 + _graph_values(curve, t),
                       lambda t: curve.velocity(t)[:, 1])


def map_mesh_to_curved_domain(mesh, g1, g2):
    """Blend a unit-square mesh onto the domain g1(x) < y < 1 + g2(x).

    Nodes move by ``y -> y + g1(x) (1 - 2y)`` in the lower half and
    ``y -> y + g2(x) (2y - 1)`` in the upper half (both branches agree at
    y = 1/2).  Boundary edges on y = 0 / y = 1 become curve segments on the
    two graphs; all other edges stay straight with mapped endpoints.

    Parameters
    ----------
    mesh : Mesh
        Mesh of the unit square.
    g1, g2 : CurveParam
        Graph-shaped perturbation curves with ``|g| < 1/4``.
    """
    V = mesh.vertices
    if V.min() < -1e-12 or V.max() > 1.0 + 1e-12:
        raise ValueError("input mesh must live on the unit square")
    for g in (g1, g2):
        if np.max(np.abs(_graph_values(g, np.linspace(0, 1, 257)))) >= 0.25:
            raise ValueError("perturbation must satisfy |g| < 1/4")

    x, y = V[:, 0], V[:, 1]
    g1v = _graph_values(g1, x)
    g2v = _graph_values(g2, x)
    new_y = np.where(y <= 0.5, y + g1v * (1.0 - 2.0 * y), y + g2v * (2.0 * y - 1.0))
    new_v = np.column_stack([x, new_y])

    curve_bottom = None if _is_zero_graph(g1) else g1
    curve_top = None if _is_zero_graph(g2) else _one_plus(g2)
    if curve_bottom is None and curve_top is None:
        return mesh

    curves = [c for c in (curve_bottom, curve_top) if c is not None]
    idx_bottom = 0 if curve_bottom is not None else None
    idx_top = len(curves) - 1 if curve_top is not None else None

    on_bottom = np.abs(y) < 1e-12
    on_top = np.abs(y - 1.0) < 1e-12
    edges = []
    for e in mesh.edges:
        if e.is_curved:
            raise ValueError("input mesh already has curved edges")
        if e.tag == BOUNDARY and on_bottom[e.v0] and on_bottom[e.v1] \
                and idx_bottom is not None:
            edges.append(Edge(e.v0, e.v1, curve=idx_bottom,
                              t0=x[e.v0], t1=x[e.v1], tag=e.tag))
        elif e.tag == BOUNDARY and on_top[e.v0] and on_top[e.v1] \
                and idx_top is not None:
            edges.append(Edge(e.v0, e.v1, curve=idx_top,
                              t0=x[e.v0], t1=x[e.v1], tag=e.tag))
        else:
            edges.append(Edge(e.v0, e.v1, tag=e.tag))
    try:
        return Mesh(new_v, edges, [Cell(c.edges) for c in mesh.cells],
                    curves=curves, region_of_cell=mesh.region_of_cell)
    except MeshError as exc:
        raise GenerationError(f"curved mapping folded a cell: {exc}") from None


def generate_interface_mesh(n, g3=None, kappa1=1.0, kappa2=1.0):
    """Quad grid on (0,1) x (-1/2,1/2) fitted to the interface y = g3(x).

    Vertices move by ``y -> y + g3(x) (1 - 2|y|)``; the grid edges on y = 0
    become curve segments on the interface and are tagged as such.  Cells
    below the interface get region label 1, cells above get 2 (the labels
    select the coefficient branch downstream; ``kappa1``/``kappa2`` are
    accepted for signature compatibility and do not affect the geometry).

    ``n`` must be even so that y = 0 is a grid line.
    """
    del kappa1, kappa2
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be an even integer >= 2")
    if g3 is None:
        g3 = make_curve("sin_3pi_over20")
    xs = np.linspace(0.0, 1.0, n + 1)
    ys = np.linspace(-0.5, 0.5, n + 1)
    gvals = _graph_values(g3, xs)
    curved = not _is_zero_graph(g3)

    b = _Builder()
    vid = {}
    for j, yj in enumerate(ys):
        blend = 1.0 - 2.0 * abs(yj)
        for i, xi in enumerate(xs):
            vid[i, j] = b.vertex(xi, yj + gvals[i] * blend)
    half = n // 2
    for j in range(n):
        region = 1 if j < half else 2
        for i in range(n):
            b.cell([vid[i, j], vid[i + 1, j], vid[i + 1, j + 1], vid[i, j + 1]],
                   region=region)
    mesh = b.build(curves=[g3] if curved else [])

    # Retag/re-geometrize the row of edges on the interface.
    edges = list(mesh.edges)
    iface_vertices = {vid[i, half] for i in range(n + 1)}
    for ei, e in enumerate(edges):
        if e.v0 in iface_vertices and e.v1 in iface_vertices:
            x0 = mesh.vertices[e.v0][0]
            x1 = mesh.vertices[e.v1][0]
            if abs(x1 - x0) < 0.5 / n:  # vertical edge touching the interface
                continue
            if curved:
                edges[ei] = Edge(e.v0, e.v1, curve=0, t0=x0, t1=x1, tag=INTERFACE)
            else:
                edges[ei] = Edge(e.v0, e.v1, tag=INTERFACE)
    try:
        return Mesh(mesh.vertices, edges, [Cell(c.edges) for c in mesh.cells],
                    curves=mesh.curves, region_of_cell=mesh.region_of_cell)
    except MeshError as exc:
        raise GenerationError(f"interface mapping folded a cell: {exc}") from None
