"""Command-line driver: convergence runs, mesh generation/checks, patch test.

Exit code 0 means every checked threshold passed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import generators
from .cases import get_case, polynomial_case
from .curves import make_curve
from .harness import (compute_errors, default_levels, rates_table, report,
                      run_case, slopes_pass)
from .mesh import read_mesh, validate_mesh, write_mesh
from .solve import assemble_and_solve


def _cmd_run(args):
    levels = default_levels(args.levels)
    record = run_case(args.case, args.family, args.k, levels,
                      kappa1=args.kappa1, kappa2=args.kappa2,
                      seed=args.seed, verbose=True)
    print(rates_table(record))
    if args.out:
        paths = report(record, args.out)
        for kind, path in paths.items():
            print(f"wrote {kind}: {path}")
    ok = slopes_pass(record)
    print("slope check:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def _build_mesh(args):
    if args.family == "quad":
        return generators.generate_square_quad_mesh(args.n)
    if args.family == "concave":
        return generators.generate_concave_mesh(args.n)
    if args.family == "voronoi":
        return generators.generate_voronoi_mesh(
            args.seeds or args.n * args.n, lloyd_iters=args.lloyd, rng_seed=args.seed)
    if args.family == "interface":
        return generators.generate_interface_mesh(args.n)
    raise ValueError(args.family)


def _cmd_mesh_gen(args):
    mesh = _build_mesh(args)
    if args.curved:
        mesh = generators.map_mesh_to_curved_domain(
            mesh, make_curve("sin_pi_over20"), make_curve("sin_3pi_over20"))
    write_mesh(mesh, args.out)
    print(f"wrote {args.out}: {len(mesh.cells)} cells, {len(mesh.edges)} edges, "
          f"h = {mesh.h:.4g}")
    return 0


def _cmd_mesh_check(args):
    mesh = read_mesh(args.path)
    rep = validate_mesh(mesh, rho=args.rho)
    worst_star = min(r.star_margin for r in rep.cells)
    worst_edge = min(r.min_edge_ratio for r in rep.cells)
    print(f"{args.path}: {len(mesh.cells)} cells, h = {mesh.h:.4g}")
    print(f"star-shape failures (rho={args.rho}): {rep.n_star_fail}  "
          f"(worst margin/h_K = {worst_star:.4f})")
    print(f"short-edge failures: {rep.n_edge_fail}  "
          f"(worst h_e/h_K = {worst_edge:.4f})")
    print("mesh check:", "PASS" if rep.all_ok else "FAIL")
    return 0 if rep.all_ok else 1


def _cmd_patch_test(args):
    threshold = 1e-9
    ok = True
    for family in ("quad", "voronoi"):
        setup = polynomial_case(args.k)
        mesh = setup.mesh(family, 4, rng_seed=11, lloyd_iters=3)
        result = assemble_and_solve(mesh, args.k, setup.coefficients,
                                    setup.boundary_data())
        e_h1, e_l2 = compute_errors(mesh, args.k, result.dofs, setup.exact,
                                    packs=result.packs)
        passed = e_h1 <= threshold and e_l2 <= threshold
        ok = ok and passed
        print(f"patch test {family} k={args.k}: E_H1={e_h1:.3e} E_L2={e_l2:.3e} "
              f"{'PASS' if passed else 'FAIL'}")
    return 0 if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="vem",
        description="Nonconforming virtual element solver for second-order "
                    "elliptic problems on polygonal meshes with curved edges.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="convergence study for a built-in case")
    run.add_argument("--case", type=int, choices=(1, 2, 3), required=True)
    run.add_argument("--family", choices=("quad", "voronoi", "concave"),
                     default="quad")
    run.add_argument("--k", type=int, choices=(1, 2, 3, 4), required=True)
    run.add_argument("--levels", type=int, default=4,
                     help="number of refinement levels (subdivisions 4, 8, ...)")
    run.add_argument("--kappa1", type=float, default=1.0)
    run.add_argument("--kappa2", type=float, default=1e5)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default=None, help="directory for CSV/SVG/table")
    run.set_defaults(fn=_cmd_run)

    mesh = sub.add_parser("mesh", help="mesh utilities")
    mesh_sub = mesh.add_subparsers(dest="mesh_command", required=True)
    gen = mesh_sub.add_parser("gen", help="generate a mesh file")
    gen.add_argument("--family", choices=("quad", "voronoi", "concave", "interface"),
                     default="quad")
    gen.add_argument("--n", type=int, default=8)
    gen.add_argument("--seeds", type=int, default=None,
                     help="seed count for the Voronoi family (default n^2)")
    gen.add_argument("--lloyd", type=int, default=3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--curved", action="store_true",
                     help="map onto the curved quadrilateral domain")
    gen.add_argument("--out", required=True)
    gen.set_defaults(fn=_cmd_mesh_gen)
    chk = mesh_sub.add_parser("check", help="shape-regularity report")
    chk.add_argument("--path", required=True)
    chk.add_argument("--rho", type=float, default=0.05)
    chk.set_defaults(fn=_cmd_mesh_check)

    patch = sub.add_parser("patch-test", help="polynomial reproduction check")
    patch.add_argument("--k", type=int, choices=(1, 2, 3, 4), required=True)
    patch.set_defaults(fn=_cmd_patch_test)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # surface errors as messages, not tracebacks
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
