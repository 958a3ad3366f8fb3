"""Global DoF numbering, assembly, weak Dirichlet data and sparse solve.

Numbering is deterministic: edge moments first (edge index major, moment
minor), then cell bulk moments.  Interior and interface edges carry a single
global index per moment, shared by both incident cells; this is the whole
nonconforming coupling -- jumps of the discrete solution have zero moments
against the mapped edge polynomials by construction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .basis import edge_basis, eval_edge_basis, monomial_count
from .errors import SolverError
from .forms import assemble_local
from .mesh import BOUNDARY
from .projectors import build_all_packs
from .quadrature import edge_rule


@dataclass(eq=False)
class DofMap:
    """Global numbering of edge-moment and bulk-moment DoFs."""

    k: int
    n_edges: int
    n_cells: int
    boundary_mask: np.ndarray

    @property
    def n_bulk(self):
        return monomial_count(self.k - 2)

    @property
    def n(self):
        return self.k * self.n_edges + self.n_bulk * self.n_cells

    def edge_dofs(self, ei):
        return np.arange(self.k * ei, self.k * (ei + 1))

    def cell_dofs(self, mesh, ci):
        cell = mesh.cells[ci]
        idx = np.empty(self.k * len(cell.edges) + self.n_bulk, dtype=int)
        for j, ei in enumerate(cell.edges):
            idx[self.k * j:self.k * (j + 1)] = self.edge_dofs(ei)
        offset = self.k * self.n_edges + self.n_bulk * ci
        idx[self.k * len(cell.edges):] = np.arange(offset, offset + self.n_bulk)
        return idx


def build_dof_map(mesh, k):
    n_edges = len(mesh.edges)
    n_cells = len(mesh.cells)
    mask = np.zeros(k * n_edges + monomial_count(k - 2) * n_cells, dtype=bool)
    for ei, e in enumerate(mesh.edges):
        if e.tag == BOUNDARY:
            mask[k * ei:k * (ei + 1)] = True
    return DofMap(k=k, n_edges=n_edges, n_cells=n_cells, boundary_mask=mask)


def _resolve_region(fn, region):
    if hasattr(fn, "for_region"):
        fn = fn.for_region(region)
    if not callable(fn) and hasattr(fn, "u"):
        fn = fn.u  # exact-solution objects: the Dirichlet datum is the trace
    return fn


def apply_dirichlet(dofmap, mesh, g, k, degree=None):
    """Boundary DoF values: edge moments of the Dirichlet datum.

    ``g`` is a callable ``(x, y) -> values``; objects with a ``for_region``
    method are resolved with the incident cell's region (interface problems
    have region-dependent traces).  Returns a full-length vector that is
    zero on free DoFs.
    """
    if degree is None:
        degree = 2 * k + 2
    values = np.zeros(dofmap.n)
    for ei, e in enumerate(mesh.edges):
        if e.tag != BOUNDARY:
            continue
        ci = mesh.edge_cells[ei][0]
        g_fn = _resolve_region(g, int(mesh.region_of_cell[ci]))
        rule = edge_rule(mesh, ei, ci, degree)
        t0, t1 = mesh.edge_interval(ei)
        E = eval_edge_basis(edge_basis(t0, t1, k - 1), rule.t)
        gv = np.asarray(g_fn(rule.points[:, 0], rule.points[:, 1]), dtype=float)
        values[dofmap.edge_dofs(ei)] = E.T @ (rule.weights * gv) / rule.arclength
    return values


def assemble_global(mesh, k, coeff, packs=None):
    """Scatter the local systems into the full (unreduced) sparse matrix."""
    if packs is None:
        packs = build_all_packs(mesh, k)
    dofmap = build_dof_map(mesh, k)
    rows, cols, vals = [], [], []
    rhs = np.zeros(dofmap.n)
    for ci, pack in enumerate(packs):
        local = assemble_local(mesh, ci, pack, coeff)
        idx = dofmap.cell_dofs(mesh, ci)
        mat = local.full
        rows.append(np.repeat(idx, idx.size))
        cols.append(np.tile(idx, idx.size))
        vals.append(mat.reshape(-1))
        np.add.at(rhs, idx, local.f_vec)
    matrix = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n, dofmap.n)).tocsr()
    return matrix, rhs, dofmap, packs


@dataclass(eq=False)
class SolveResult:
    dofs: np.ndarray
    residual: float
    dofmap: DofMap
    packs: list
    matrix: scipy.sparse.csr_matrix
    rhs: np.ndarray
    timings: dict


def assemble_and_solve(mesh, k, coeff, g, packs=None):
    """Assemble, eliminate Dirichlet DoFs by substitution, and solve with a
    sparse direct factorization.

    Raises
    ------
    SolverError
        If the factorization fails or produces non-finite values; the error
        carries mesh-size/order/conditioning diagnostics.
    """
    t0 = time.perf_counter()
    matrix, rhs, dofmap, packs = assemble_global(mesh, k, coeff, packs)
    t1 = time.perf_counter()
    boundary_values = apply_dirichlet(dofmap, mesh, g, k)
    free = ~dofmap.boundary_mask
    u = boundary_values.copy()
    n_free = int(free.sum())
    residual = 0.0
    if n_free:
        A_ff = matrix[free][:, free].tocsc()
        reduced_rhs = rhs[free] - matrix[free][:, ~free] @ boundary_values[~free]
        try:
            x = scipy.sparse.linalg.spsolve(A_ff, reduced_rhs)
        except RuntimeError as exc:
            raise SolverError(f"sparse factorization failed: {exc}", details={
                "h": mesh.h, "k": k,
                "worst_cell_cond": max(p.cond["energy"] for p in packs),
            }) from None
        if not np.all(np.isfinite(x)):
            raise SolverError("sparse solve produced non-finite values", details={
                "h": mesh.h, "k": k,
                "worst_cell_cond": max(p.cond["energy"] for p in packs),
            })
        u[free] = x
        norm = np.linalg.norm(reduced_rhs)
        residual = float(np.linalg.norm(A_ff @ x - reduced_rhs) / (norm if norm > 0 else 1.0))
    t2 = time.perf_counter()
    return SolveResult(dofs=u, residual=residual, dofmap=dofmap, packs=packs,
                       matrix=matrix, rhs=rhs,
                       timings={"assemble": t1 - t0, "solve": t2 - t1})


def dump_system(matrix, rhs, path):
    """Write the sparse system in coordinate text format for external checks.

    One ``row col value`` line per stored entry, then one ``rhs row value``
    line per right-hand-side entry.
    """
    coo = matrix.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"% coordinate format, {coo.shape[0]} x {coo.shape[1]}, "
                 f"{coo.nnz} entries\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {format(v, '.17g')}\n")
        for i, v in enumerate(rhs):
            fh.write(f"rhs {i} {format(v, '.17g')}\n")
