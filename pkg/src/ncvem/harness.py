"""Error evaluation, convergence studies and reporting.

The error quantities are the computable relative errors

    E_H1 = sqrt( sum_K |u - proj_k u_h|^2_{H1(K)} ) / ||u||_{H1}
    E_L2 = sqrt( sum_K ||u - proj_k u_h||^2_{L2(K)} ) / ||u||_{L2}

with ``proj_k`` the order-k scalar L2 projection of the discrete solution
(numerators use the H1 seminorm per cell; denominators the full norms by
quadrature of the exact solution).
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import eval_cell_basis, grad_cell_basis
from .cases import get_case
from .projectors import build_all_packs
from .solve import assemble_and_solve, build_dof_map


def compute_errors(mesh, k, dofs, exact, packs=None):
    """Relative H1(broken, seminorm) and L2 errors of the projected solution."""
    if packs is None:
        packs = build_all_packs(mesh, k)
    dofmap = build_dof_map(mesh, k)
    num_h1 = num_l2 = den_h1 = den_l2 = 0.0
    for ci, pack in enumerate(packs):
        ex = exact.for_region(int(mesh.region_of_cell[ci]))
        rule = pack.cell_rule
        x, y = rule.points[:, 0], rule.points[:, 1]
        w = rule.weights
        coeffs = pack.p_l2 @ dofs[dofmap.cell_dofs(mesh, ci)]
        vals = eval_cell_basis(pack.basis, rule.points) @ coeffs
        grads = np.einsum("nbd,b->nd", grad_cell_basis(pack.basis, rule.points), coeffs)
        u = np.asarray(ex.u(x, y), dtype=float)
        gu = np.asarray(ex.grad_u(x, y), dtype=float)
        num_l2 += float(w @ (u - vals) ** 2)
        num_h1 += float(w @ np.sum((gu - grads) ** 2, axis=1))
        den_l2 += float(w @ u ** 2)
        den_h1 += float(w @ (u ** 2 + np.sum(gu ** 2, axis=1)))
    return float(np.sqrt(num_h1 / den_h1)), float(np.sqrt(num_l2 / den_l2))


def fit_slope(hs, errors, window=3):
    """Least-squares slope of log(error) against log(h) over the last
    ``window`` levels (fewer if the record is shorter)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.size < 2:
        return None
    n = min(window, hs.size)
    return float(np.polyfit(np.log(hs[-n:]), np.log(errors[-n:]), 1)[0])


@dataclass(frozen=True)
class LevelResult:
    n: int
    h: float
    n_dof: int
    e_h1: float
    e_l2: float
    residual: float
    runtime: float


@dataclass
class ConvergenceRecord:
    case: str
    family: str
    k: int
    levels: list = field(default_factory=list)

    @property
    def hs(self):
        return [lv.h for lv in self.levels]

    @property
    def slope_h1(self):
        return fit_slope(self.hs, [lv.e_h1 for lv in self.levels])

    @property
    def slope_l2(self):
        return fit_slope(self.hs, [lv.e_l2 for lv in self.levels])


def manufactured_residual(coeff, exact, points, region=1, step=1e-5):
    """Finite-difference application of the strong operator to the exact
    solution, compared with the manufactured right-hand side.

    Independent of every closed-form derivative: only ``exact.u`` and the
    coefficient callables are evaluated.  Returns the max absolute mismatch.
    """
    cf = coeff.for_region(region)
    ex = exact.for_region(region)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    h = step

    def flux(px, py):
        ux = (ex.u(px + h, py) - ex.u(px - h, py)) / (2 * h)
        uy = (ex.u(px, py + h) - ex.u(px, py - h)) / (2 * h)
        a = np.asarray(cf.a(px, py), dtype=float)
        return (a[..., 0, 0] * ux + a[..., 0, 1] * uy,
                a[..., 1, 0] * ux + a[..., 1, 1] * uy)

    div_flux = (flux(x + h, y)[0] - flux(x - h, y)[0]) / (2 * h) \
        + (flux(x, y + h)[1] - flux(x, y - h)[1]) / (2 * h)

    def bu(px, py):
        b = np.asarray(cf.b(px, py), dtype=float)
        u = np.asarray(ex.u(px, py), dtype=float)
        return b[..., 0] * u, b[..., 1] * u

    div_bu = (bu(x + h, y)[0] - bu(x - h, y)[0]) / (2 * h) \
        + (bu(x, y + h)[1] - bu(x, y - h)[1]) / (2 * h)

    op = -div_flux + div_bu + np.asarray(cf.c(x, y)) * np.asarray(ex.u(x, y))
    return float(np.max(np.abs(op - np.asarray(cf.f(x, y), dtype=float))))


def default_levels(count, base=4):
    return [base * 2 ** i for i in range(count)]


def run_case(case_id, family, k, levels, kappa1=1.0, kappa2=1e5, seed=0,
             lloyd_iters=3, verbose=False):
    """Full refinement study for one case/family/order combination.

    Parameters
    ----------
    case_id : 1 | 2 | 3 (or "caseN")
    family : "quad" | "voronoi" | "concave"
        Must be supported by the case (the interface case runs on quad only).
    k : method order, 1..4
    levels : int or sequence of int
        Level count (subdivisions 4, 8, 16, ...) or explicit subdivision list.
    """
    if not 1 <= k <= 4:
        raise ValueError("k must be between 1 and 4")
    setup = get_case(case_id, kappa1=kappa1, kappa2=kappa2)
    ns = default_levels(levels) if isinstance(levels, int) else list(levels)
    record = ConvergenceRecord(case=setup.name, family=family, k=k)
    for n in ns:
        t0 = time.perf_counter()
        mesh = setup.mesh(family, n, rng_seed=seed, lloyd_iters=lloyd_iters)
        result = assemble_and_solve(mesh, k, setup.coefficients, setup.boundary_data())
        e_h1, e_l2 = compute_errors(mesh, k, result.dofs, setup.exact,
                                    packs=result.packs)
        runtime = time.perf_counter() - t0
        level = LevelResult(n=n, h=mesh.h, n_dof=result.dofmap.n, e_h1=e_h1,
                            e_l2=e_l2, residual=result.residual, runtime=runtime)
        if record.levels and level.h >= record.levels[-1].h:
            raise RuntimeError("mesh size did not decrease across levels")
        record.levels.append(level)
        if verbose:
            print(f"  n={n:4d}  h={level.h:.4f}  N={level.n_dof:6d}  "
                  f"E_H1={e_h1:.3e}  E_L2={e_l2:.3e}  ({runtime:.2f}s)")
    return record


# ---------------------------------------------------------------------------
# reporting


def _running_slopes(record):
    hs = record.hs
    h1 = [lv.e_h1 for lv in record.levels]
    l2 = [lv.e_l2 for lv in record.levels]
    rows = []
    for i in range(len(hs)):
        if i == 0:
            rows.append(("", ""))
        else:
            lo = max(0, i - 2)
            s1 = fit_slope(hs[lo:i + 1], h1[lo:i + 1])
            s2 = fit_slope(hs[lo:i + 1], l2[lo:i + 1])
            rows.append((format(s1, ".6f"), format(s2, ".6f")))
    return rows


def record_to_csv(record):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["level", "h", "n_dof", "e_h1", "e_l2", "slope_h1", "slope_l2"])
    slopes = _running_slopes(record)
    for lv, (s1, s2) in zip(record.levels, slopes):
        writer.writerow([lv.n, format(lv.h, ".17g"), lv.n_dof,
                         format(lv.e_h1, ".17g"), format(lv.e_l2, ".17g"), s1, s2])
    return buf.getvalue()


def rates_table(record):
    lines = [f"{record.case} family={record.family} k={record.k}",
             f"{'n':>6} {'h':>12} {'N_dof':>8} {'E_H1':>12} {'E_L2':>12}"]
    for lv in record.levels:
        lines.append(f"{lv.n:>6} {lv.h:>12.5e} {lv.n_dof:>8} "
                     f"{lv.e_h1:>12.5e} {lv.e_l2:>12.5e}")
    s1, s2 = record.slope_h1, record.slope_l2
    lines.append(f"fitted slopes (last 3 levels): H1 = {s1:.3f}, L2 = {s2:.3f}"
                 if s1 is not None else "fitted slopes: n/a (single level)")
    return "\n".join(lines) + "\n"


def _reference_triangle(ax, hs, es, slope, label):
    h1, h0 = hs[-1], hs[-2]
    e_anchor = es[-2] * 0.5
    ax.loglog([h0, h1, h0, h0], [e_anchor, e_anchor * (h1 / h0) ** slope,
                                 e_anchor * (h1 / h0) ** slope, e_anchor],
              "k--", linewidth=0.7)
    ax.annotate(label, (h0 * 1.05, e_anchor * (h1 / h0) ** (slope / 2)), fontsize=8)


def write_svg(record, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    hs = record.hs
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(hs, [lv.e_h1 for lv in record.levels], "o-", label="E_H1")
    ax.loglog(hs, [lv.e_l2 for lv in record.levels], "s-", label="E_L2")
    if len(hs) >= 2:
        _reference_triangle(ax, hs, [lv.e_h1 for lv in record.levels],
                            record.k, f"h^{record.k}")
        _reference_triangle(ax, hs, [lv.e_l2 for lv in record.levels],
                            record.k + 1, f"h^{record.k + 1}")
    ax.set_xlabel("h")
    ax.set_ylabel("relative error")
    ax.set_title(f"{record.case} / {record.family} / k={record.k}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def report(record, out_dir):
    """Write CSV, SVG log-log plot and a plain-text rates table.

    Returns the mapping of artifact kind to path.
    """
    import os

    if not record.levels:
        raise ValueError("cannot report an empty record")
    os.makedirs(out_dir, exist_ok=True)
    stem = f"{record.case}_{record.family}_k{record.k}"
    paths = {
        "csv": os.path.join(out_dir, stem + ".csv"),
        "svg": os.path.join(out_dir, stem + ".svg"),
        "table": os.path.join(out_dir, stem + ".txt"),
    }
    try:
        with open(paths["csv"], "w", encoding="utf-8") as fh:
            fh.write(record_to_csv(record))
        with open(paths["table"], "w", encoding="utf-8") as fh:
            fh.write(rates_table(record))
        write_svg(record, paths["svg"])
    except OSError as exc:
        raise OSError(f"cannot write report to {out_dir}: {exc}") from exc
    return paths


# acceptance brackets for the fitted slopes
H1_SLOPE_BRACKET = (-0.2, 0.5)
L2_SLOPE_BRACKET = (-0.25, 0.5)


def slopes_pass(record):
    """True iff the fitted slopes sit inside the acceptance brackets
    [k - 0.2, k + 0.5] for H1 and [k + 0.75, k + 1.5] for L2."""
    s1, s2 = record.slope_h1, record.slope_l2
    if s1 is None or s2 is None:
        return False
    k = record.k
    lo1, hi1 = k + H1_SLOPE_BRACKET[0], k + H1_SLOPE_BRACKET[1]
    lo2, hi2 = k + 1 + L2_SLOPE_BRACKET[0], k + 1 + L2_SLOPE_BRACKET[1]
    return lo1 <= s1 <= hi1 and lo2 <= s2 <= hi2
