"""Polygonal meshes with straight and curved edges.

A mesh stores vertices, edges, counterclockwise cell loops and a list of
shared :class:`~ncvem.curves.CurveParam` objects.  Curved edges reference a
curve plus a parameter sub-interval; the parameter value ``t0`` corresponds
to the edge's first vertex.  Edges are normalized so that ``v0 < v1``, which
fixes one canonical parametrization per edge: the two cells sharing an edge
therefore see identical edge-moment functionals and only the outward normal
flips between them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .curves import CurveParam, make_curve
from .errors import MeshError, MeshFormatError

STRAIGHT = "straight"

INTERIOR = "interior"
BOUNDARY = "boundary"
INTERFACE = "interface"
_TAGS = (INTERIOR, BOUNDARY, INTERFACE)

# Gauss nodes used for the cheap per-edge geometry integrals (area,
# arclength).  Exact for straight edges, ~1e-16 for the gentle registry
# curves over one edge.
_GEOM_GL_POINTS = 24


@dataclass(frozen=True)
class Edge:
    """Mesh edge between vertices ``v0 < v1``.

    ``curve is None`` means a straight segment, parametrized by arclength
    ``t in [0, |v1 - v0|]``.  Otherwise ``t0``/``t1`` are curve parameters at
    ``v0``/``v1`` (in either order along the curve).
    """

    v0: int
    v1: int
    curve: int | None = None
    t0: float = 0.0
    t1: float = 0.0
    tag: str = INTERIOR

    @property
    def is_curved(self):
        return self.curve is not None


class Cell:
    """Counterclockwise loop of edge indices plus derived geometry."""

    __slots__ = ("edges", "signs", "vertex_loop", "star_center", "diameter",
                 "area", "star_margin")

    def __init__(self, edges):
        self.edges = tuple(int(e) for e in edges)
        self.signs = None
        self.vertex_loop = None
        self.star_center = None
        self.diameter = 0.0
        self.area = 0.0
        self.star_margin = 0.0

    def __repr__(self):
        return f"Cell(edges={self.edges})"


class Mesh:
    """Immutable polygonal mesh; derived geometry is computed on build.

    Parameters
    ----------
    vertices : (n, 2) array
    edges : sequence of Edge
    cells : sequence of Cell or edge-index sequences
    curves : sequence of CurveParam
    region_of_cell : sequence of int, optional
        Material label per cell (defaults to 1).
    auto_tag : bool
        Promote interior-tagged edges with a single incident cell to
        boundary.  Generators rely on this; the file reader runs strict.
    """

    def __init__(self, vertices, edges, cells, curves=(), region_of_cell=None,
                 auto_tag=True):
        self.vertices = np.array(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshError("vertices must be an (n, 2) array")
        self.curves = list(curves)
        self.edges = [self._normalize_edge(e) for e in edges]
        self.cells = [c if isinstance(c, Cell) else Cell(c) for c in cells]
        if region_of_cell is None:
            self.region_of_cell = np.ones(len(self.cells), dtype=int)
        else:
            self.region_of_cell = np.asarray(region_of_cell, dtype=int).copy()
            if self.region_of_cell.shape != (len(self.cells),):
                raise MeshError("region_of_cell length does not match cells")
        self._finalize(auto_tag)
        self.vertices.setflags(write=False)

    # -- canonical form ----------------------------------------------------

    def _normalize_edge(self, e):
        if e.v0 == e.v1:
            raise MeshError(f"degenerate edge ({e.v0}, {e.v1})")
        if not (0 <= e.v0 < len(self.vertices) and 0 <= e.v1 < len(self.vertices)):
            raise MeshError(f"edge ({e.v0}, {e.v1}) references missing vertex")
        if e.curve is not None and not 0 <= e.curve < len(self.curves):
            raise MeshError(f"edge ({e.v0}, {e.v1}) references missing curve {e.curve}")
        if e.tag not in _TAGS:
            raise MeshError(f"unknown edge tag {e.tag!r}")
        if e.v0 > e.v1:
            e = replace(e, v0=e.v1, v1=e.v0, t0=e.t1, t1=e.t0)
        return e

    # -- edge parametrization ----------------------------------------------

    def edge_interval(self, ei):
        """Parameter values (at v0, at v1); straight edges use arclength."""
        e = self.edges[ei]
        if e.is_curved:
            return e.t0, e.t1
        length = float(np.linalg.norm(self.vertices[e.v1] - self.vertices[e.v0]))
        return 0.0, length

    def edge_points(self, ei, t):
        e = self.edges[ei]
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if e.is_curved:
            return self.curves[e.curve].points(t)
        p0, p1 = self.vertices[e.v0], self.vertices[e.v1]
        length = np.linalg.norm(p1 - p0)
        return p0[None, :] + (t / length)[:, None] * (p1 - p0)[None, :]

    def edge_velocity(self, ei, t):
        e = self.edges[ei]
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if e.is_curved:
            return self.curves[e.curve].velocity(t)
        p0, p1 = self.vertices[e.v0], self.vertices[e.v1]
        length = np.linalg.norm(p1 - p0)
        return np.broadcast_to((p1 - p0) / length, (t.size, 2)).copy()

    # -- build -------------------------------------------------------------

    def _finalize(self, auto_tag):
        if not self.cells:
            raise MeshError("empty mesh")
        n_edges = len(self.edges)
        self.edge_cells = [[] for _ in range(n_edges)]
        for ci, cell in enumerate(self.cells):
            if len(cell.edges) < 3:
                raise MeshError(f"cell {ci} has fewer than 3 edges")
            if len(set(cell.edges)) != len(cell.edges):
                raise MeshError(f"cell {ci} repeats an edge")
            for ei in cell.edges:
                if not 0 <= ei < n_edges:
                    raise MeshError(f"cell {ci} references missing edge {ei}")
                self.edge_cells[ei].append(ci)

        if auto_tag:
            for ei, owners in enumerate(self.edge_cells):
                if len(owners) == 1 and self.edges[ei].tag == INTERIOR:
                    self.edges[ei] = replace(self.edges[ei], tag=BOUNDARY)
        for ei, owners in enumerate(self.edge_cells):
            tag = self.edges[ei].tag
            want = 1 if tag == BOUNDARY else 2
            if len(owners) != want:
                raise MeshError(
                    f"edge {ei} tagged {tag} is referenced by {len(owners)} cells")

        self.edge_lengths = np.array([self._arclength(ei) for ei in range(n_edges)])
        if np.any(self.edge_lengths <= 0.0):
            raise MeshError("edge with nonpositive arclength")
        self._check_curved_endpoints()

        for ci, cell in enumerate(self.cells):
            self._orient_cell(ci, cell)
            self._cell_geometry(ci, cell)

        # Shared edges must be traversed in opposite directions.
        for ei, owners in enumerate(self.edge_cells):
            if len(owners) == 2:
                s = [self.cells[c].signs[self.cells[c].edges.index(ei)] for c in owners]
                if s[0] * s[1] != -1:
                    raise MeshError(f"edge {ei} traversed twice in the same direction")

        self.h = max(c.diameter for c in self.cells)
        if not np.isfinite(self.h) or self.h <= 0.0:
            raise MeshError("mesh size is not finite and positive")

    def _check_curved_endpoints(self):
        for ei, e in enumerate(self.edges):
            if not e.is_curved:
                continue
            ends = self.curves[e.curve].points(np.array([e.t0, e.t1]))
            gap = max(np.linalg.norm(ends[0] - self.vertices[e.v0]),
                      np.linalg.norm(ends[1] - self.vertices[e.v1]))
            if gap > 1e-12 * self.edge_lengths[ei] + 1e-15:
                raise MeshError(
                    f"curved edge {ei}: curve endpoints do not match vertices "
                    f"(gap {gap:.3e})")

    def _arclength(self, ei):
        e = self.edges[ei]
        if not e.is_curved:
            return float(np.linalg.norm(self.vertices[e.v1] - self.vertices[e.v0]))
        xi, w = np.polynomial.legendre.leggauss(_GEOM_GL_POINTS)
        t0, t1 = e.t0, e.t1
        t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * xi
        speed = np.linalg.norm(self.edge_velocity(ei, t), axis=1)
        return float(abs(0.5 * (t1 - t0)) * np.dot(w, speed))

    def _orient_cell(self, ci, cell):
        """Resolve traversal signs and the CCW vertex loop by chaining."""
        eids = cell.edges
        first = self.edges[eids[0]]
        nxt = self.edges[eids[1]]
        nxt_vs = {nxt.v0, nxt.v1}
        if first.v1 in nxt_vs and first.v0 not in nxt_vs:
            signs = [1]
        elif first.v0 in nxt_vs and first.v1 not in nxt_vs:
            signs = [-1]
        else:
            raise MeshError(f"cell {ci}: cannot chain edges {eids[0]}, {eids[1]}")
        loop = [first.v0 if signs[0] == 1 else first.v1]
        current = first.v1 if signs[0] == 1 else first.v0
        for ei in eids[1:]:
            e = self.edges[ei]
            loop.append(current)
            if e.v0 == current:
                signs.append(1)
                current = e.v1
            elif e.v1 == current:
                signs.append(-1)
                current = e.v0
            else:
                raise MeshError(f"cell {ci}: edge loop is not connected")
        if current != loop[0]:
            raise MeshError(f"cell {ci}: edge loop does not close")
        cell.signs = tuple(signs)
        cell.vertex_loop = tuple(loop)

    def _cell_geometry(self, ci, cell):
        area = self._signed_area(cell)
        if area <= 0.0:
            raise MeshError(f"cell {ci}: loop is not counterclockwise "
                            f"(signed area {area:.3e})")
        cell.area = area

        poly = self.vertices[list(cell.vertex_loop)]
        pts = [poly]
        for ei in cell.edges:
            if self.edges[ei].is_curved:
                t0, t1 = self.edge_interval(ei)
                pts.append(self.edge_points(ei, np.linspace(t0, t1, 7)))
        sample = np.vstack(pts)
        d2 = np.sum((sample[:, None, :] - sample[None, :, :]) ** 2, axis=-1)
        cell.diameter = float(np.sqrt(d2.max()))

        center = _polygon_centroid(poly)
        margin = self._star_margin(cell, center)
        if margin <= 0.0:
            center, margin = self._fallback_center(cell, sample)
        cell.star_center = center
        cell.star_margin = margin

    def _signed_area(self, cell):
        """Signed area by the boundary integral of x dy along the loop."""
        xi, w = np.polynomial.legendre.leggauss(_GEOM_GL_POINTS)
        total = 0.0
        for ei, sign in zip(cell.edges, cell.signs):
            t0, t1 = self.edge_interval(ei)
            t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * xi
            p = self.edge_points(ei, t)
            v = self.edge_velocity(ei, t)
            total += sign * 0.5 * (t1 - t0) * np.dot(w, p[:, 0] * v[:, 1])
        return float(total)

    def _star_margin(self, cell, point, samples=17):
        """min over the boundary of the signed distance to the local
        supporting line; positive iff ``point`` sees the whole boundary."""
        margin = np.inf
        for ei, sign in zip(cell.edges, cell.signs):
            e = self.edges[ei]
            t0, t1 = self.edge_interval(ei)
            if e.is_curved:
                t = np.linspace(t0, t1, samples)
            else:
                t = np.array([0.5 * (t0 + t1)])
            p = self.edge_points(ei, t)
            # Traversal tangent: velocity is d(point)/d(parameter); flip it
            # when the parameter runs against the canonical vertex order.
            v = self.edge_velocity(ei, t) * (sign * np.sign(t1 - t0))
            rel = p - np.asarray(point)[None, :]
            cross = rel[:, 0] * v[:, 1] - rel[:, 1] * v[:, 0]
            margin = min(margin, float(np.min(cross / np.linalg.norm(v, axis=1))))
        return margin

    def _fallback_center(self, cell, sample, grid=25):
        """Chebyshev-like interior point: maximize the sampled margin."""
        lo = sample.min(axis=0)
        hi = sample.max(axis=0)
        xs = np.linspace(lo[0], hi[0], grid + 2)[1:-1]
        ys = np.linspace(lo[1], hi[1], grid + 2)[1:-1]
        best, best_margin = None, -np.inf
        for x in xs:
            for y in ys:
                m = self._star_margin(cell, (x, y))
                if m > best_margin:
                    best, best_margin = np.array([x, y]), m
        if best_margin <= 0.0:
            raise MeshError("cell is not star-shaped at sample resolution")
        return best, best_margin

    # -- queries -------------------------------------------------------------

    def cell_edge_sign(self, ci, ei):
        cell = self.cells[ci]
        return cell.signs[cell.edges.index(ei)]

    def boundary_edges(self):
        return [i for i, e in enumerate(self.edges) if e.tag == BOUNDARY]

    def total_area(self):
        return float(sum(c.area for c in self.cells))


def _polygon_centroid(poly):
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if abs(a) < 1e-300:
        return poly.mean(axis=0)
    cx = np.sum((x + xn) * cross) / (6.0 * a)
    cy = np.sum((y + yn) * cross) / (6.0 * a)
    return np.array([cx, cy])


# -- shape-regularity report -------------------------------------------------

@dataclass
class CellQuality:
    star_ok: bool
    edge_ok: bool
    star_margin: float
    min_edge_ratio: float


@dataclass
class MeshQualityReport:
    rho: float
    cells: list
    n_star_fail: int
    n_edge_fail: int

    @property
    def all_ok(self):
        return self.n_star_fail == 0 and self.n_edge_fail == 0


def validate_mesh(mesh, rho=0.05):
    """Report per-cell shape-regularity: star-shapedness with respect to a
    ball of radius ``rho * h_K`` around the star center, and the shortest
    edge against ``rho * h_K``.  Violations are reported, never raised.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    rows = []
    for ci, cell in enumerate(mesh.cells):
        hk = cell.diameter
        margin = mesh._star_margin(cell, cell.star_center)
        min_edge = min(mesh.edge_lengths[ei] for ei in cell.edges)
        rows.append(CellQuality(
            star_ok=bool(margin >= rho * hk),
            edge_ok=bool(min_edge >= rho * hk),
            star_margin=float(margin / hk),
            min_edge_ratio=float(min_edge / hk),
        ))
    return MeshQualityReport(
        rho=rho,
        cells=rows,
        n_star_fail=sum(not r.star_ok for r in rows),
        n_edge_fail=sum(not r.edge_ok for r in rows),
    )


# -- mesh file format ----------------------------------------------------------

def _fmt(x):
    return format(float(x), ".17g")


def write_mesh(mesh, path):
    """Write a mesh as JSON text with 17-significant-digit numbers.

    Only registry curves can be serialized; ad-hoc curves raise ValueError.
    """
    lines = ["{"]
    lines.append('"vertices": [')
    lines.append(",\n".join(f"[{_fmt(x)}, {_fmt(y)}]" for x, y in mesh.vertices))
    lines.append('],')
    lines.append('"curves": [')
    crv = []
    for c in mesh.curves:
        if not c.name:
            raise ValueError("cannot serialize unnamed (ad-hoc) curve")
        params = ", ".join(_fmt(p) for p in c.params)
        crv.append(f'{{"name": "{c.name}", "params": [{params}]}}')
    lines.append(",\n".join(crv))
    lines.append('],')
    lines.append('"edges": [')
    eds = []
    for e in mesh.edges:
        if e.is_curved:
            geom = f'{{"curve": {e.curve}, "t": [{_fmt(e.t0)}, {_fmt(e.t1)}]}}'
        else:
            geom = f'"{STRAIGHT}"'
        eds.append(f'{{"v": [{e.v0}, {e.v1}], "geometry": {geom}, "tag": "{e.tag}"}}')
    lines.append(",\n".join(eds))
    lines.append('],')
    lines.append('"cells": [')
    lines.append(",\n".join("[" + ", ".join(str(ei) for ei in c.edges) + "]"
                            for c in mesh.cells))
    lines.append('],')
    lines.append('"regions": [' + ", ".join(str(int(r)) for r in mesh.region_of_cell) + "]")
    lines.append("}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path):
    """Read a mesh file written by :func:`write_mesh`.

    Raises
    ------
    MeshFormatError
        On malformed JSON, missing fields, bad references or inconsistent
        topology; the message carries a location hint.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshFormatError(f"invalid JSON: {exc.msg}",
                              where=f"line {exc.lineno}, column {exc.colno}") from None

    def need(key, typ):
        if key not in doc:
            raise MeshFormatError(f"missing section {key!r}", where=path)
        if not isinstance(doc[key], typ):
            raise MeshFormatError(f"section {key!r} has wrong type", where=path)
        return doc[key]

    raw_vertices = need("vertices", list)
    raw_curves = doc.get("curves", [])
    raw_edges = need("edges", list)
    raw_cells = need("cells", list)
    raw_regions = doc.get("regions", None)

    if len(raw_cells) == 0:
        raise MeshFormatError("empty mesh", where=f"{path}: cells")

    curves = []
    for i, c in enumerate(raw_curves):
        try:
            curves.append(make_curve(c["name"], c.get("params", ())))
        except (KeyError, TypeError) as exc:
            raise MeshFormatError(f"bad curve entry: {exc}",
                                  where=f"{path}: curves[{i}]") from None

    edges = []
    for i, e in enumerate(raw_edges):
        where = f"{path}: edges[{i}]"
        try:
            v0, v1 = int(e["v"][0]), int(e["v"][1])
            tag = e.get("tag", INTERIOR)
            geom = e["geometry"]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise MeshFormatError(f"bad edge entry: {exc}", where=where) from None
        if geom == STRAIGHT:
            edges.append(Edge(v0, v1, tag=tag))
        elif isinstance(geom, dict):
            try:
                ci = int(geom["curve"])
                t0, t1 = float(geom["t"][0]), float(geom["t"][1])
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise MeshFormatError(f"bad curved geometry: {exc}", where=where) from None
            if not 0 <= ci < len(curves):
                raise MeshFormatError(f"edge references missing curve {ci}", where=where)
            edges.append(Edge(v0, v1, curve=ci, t0=t0, t1=t1, tag=tag))
        else:
            raise MeshFormatError(f"unknown geometry {geom!r}", where=where)

    try:
        mesh = Mesh(raw_vertices, edges, raw_cells, curves,
                    region_of_cell=raw_regions, auto_tag=False)
    except MeshError as exc:
        if isinstance(exc, MeshFormatError):
            raise
        raise MeshFormatError(str(exc), where=path) from None
    return mesh


def meshes_equal(a, b, tol=0.0):
    """Field-by-field equality (used by round-trip tests)."""
    if a.vertices.shape != b.vertices.shape or len(a.edges) != len(b.edges) \
            or len(a.cells) != len(b.cells) or len(a.curves) != len(b.curves):
        return False
    if tol == 0.0:
        if not np.array_equal(a.vertices, b.vertices):
            return False
    elif not np.allclose(a.vertices, b.vertices, atol=tol, rtol=0.0):
        return False
    for ea, eb in zip(a.edges, b.edges):
        if (ea.v0, ea.v1, ea.curve, ea.tag) != (eb.v0, eb.v1, eb.curve, eb.tag):
            return False
        if ea.is_curved and (ea.t0 != eb.t0 or ea.t1 != eb.t1):
            return False
    for ca, cb in zip(a.cells, b.cells):
        if ca.edges != cb.edges:
            return False
    for ca, cb in zip(a.curves, b.curves):
        if ca.name != cb.name or tuple(ca.params) != tuple(cb.params):
            return False
    return bool(np.array_equal(a.region_of_cell, b.region_of_cell))
