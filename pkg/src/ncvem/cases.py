"""Built-in test problems: coefficients, exact solutions, mesh families.

The closed-form first and second derivatives of the curved-domain solutions
were generated symbolically (see tools/gen_exact_derivatives.py) and are
embedded here so the library has no runtime symbolic dependency.  Every
right-hand side is manufactured from the strong form; the finite-difference
consistency check in the harness guards the embedded expressions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from .curves import make_curve
from .forms import CoefficientField
from .generators import (generate_concave_mesh, generate_interface_mesh,
                         generate_square_quad_mesh, generate_voronoi_mesh,
                         map_mesh_to_curved_domain)


@dataclass(frozen=True)
class ExactSolution:
    """Manufactured solution with its gradient (per material region when the
    problem has an interface)."""

    u: Callable
    grad_u: Callable
    regions: Optional[Mapping[int, "ExactSolution"]] = None

    def for_region(self, region):
        if self.regions is not None and region in self.regions:
            return self.regions[region]
        return self


@dataclass(frozen=True)
class CaseSetup:
    """One runnable experiment: coefficients, exact solution, mesh families."""

    name: str
    coefficients: CoefficientField
    exact: ExactSolution
    families: tuple
    mesh_factory: Callable = None

    def boundary_data(self):
        """Dirichlet datum (the trace of the exact solution)."""
        return self.exact

    def mesh(self, family, n, rng_seed=0, lloyd_iters=3):
        if family not in self.families:
            raise ValueError(
                f"{self.name} supports families {self.families}, not {family!r}")
        return self.mesh_factory(family, n, rng_seed, lloyd_iters)


# ---------------------------------------------------------------------------
# shared variable coefficients


def _a1(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.empty(x.shape + (2, 2))
    out[..., 0, 0] = y * y + 1.0
    out[..., 0, 1] = -x * y
    out[..., 1, 0] = -x * y
    out[..., 1, 1] = x * x + 1.0
    return out


def _b1(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.stack([x, y], axis=-1)


def _c1(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x * x + y ** 3


def _a1_operator(x, y, ux, uy, uxx, uxy, uyy):
    """div(a1 grad u) for the shared diffusion matrix a1."""
    return (y * y + 1.0) * uxx - 2.0 * x * y * uxy + (x * x + 1.0) * uyy \
        - x * ux - y * uy


def _advection_reaction(x, y, u, ux, uy):
    """div(b1 u) + c1 u  with b1 = (x, y), div b1 = 2."""
    return 2.0 * u + x * ux + y * uy + _c1(x, y) * u


# ---------------------------------------------------------------------------
# case 1: smooth problem on the unit square


def _u1(x, y):
    return x * x * y + np.sin(2.0 * np.pi * x) * np.sin(2.0 * np.pi * y) + 2.0


def _u1_x(x, y):
    return 2.0 * x * y + 2.0 * np.pi * np.cos(2.0 * np.pi * x) * np.sin(2.0 * np.pi * y)


def _u1_y(x, y):
    return x * x + 2.0 * np.pi * np.sin(2.0 * np.pi * x) * np.cos(2.0 * np.pi * y)


def _u1_xx(x, y):
    return 2.0 * y - 4.0 * np.pi ** 2 * np.sin(2.0 * np.pi * x) * np.sin(2.0 * np.pi * y)


def _u1_xy(x, y):
    return 2.0 * x + 4.0 * np.pi ** 2 * np.cos(2.0 * np.pi * x) * np.cos(2.0 * np.pi * y)


def _u1_yy(x, y):
    return -4.0 * np.pi ** 2 * np.sin(2.0 * np.pi * x) * np.sin(2.0 * np.pi * y)


# ---------------------------------------------------------------------------
# case 2: curved quadrilateral domain (generated derivatives)


def _u2(x, y):
    return -1 / 400 * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20)


def _u2_x(x, y):
    return -3 / 400 * np.pi * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(3 * np.pi * x) - 1 / 80 * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(7 * y) * np.cos(5 * x) + (1 / 400) * np.pi * x * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.cos(np.pi * x) - 1 / 400 * x * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20) - 1 / 400 * (x - 1) * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20)


def _u2_y(x, y):
    return (1 / 400) * x * (x - 1) * (20 * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) - 7 * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(5 * x) * np.cos(7 * y) - 20 * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20))


def _u2_xx(x, y):
    return (9 / 400) * np.pi ** 2 * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.sin(3 * np.pi * x) + (1 / 16) * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(5 * x) * np.sin(7 * y) - 3 / 40 * np.pi * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * np.sin(7 * y) * np.cos(5 * x) * np.cos(3 * np.pi * x) - 1 / 400 * np.pi ** 2 * x * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(np.pi * x) + (3 / 200) * np.pi ** 2 * x * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(np.pi * x) * np.cos(3 * np.pi * x) + (1 / 40) * np.pi * x * (x - 1) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(7 * y) * np.cos(5 * x) * np.cos(np.pi * x) - 3 / 200 * np.pi * x * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(3 * np.pi * x) - 1 / 40 * x * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(7 * y) * np.cos(5 * x) + (1 / 200) * np.pi * x * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.cos(np.pi * x) + (1 / 40) * (1 - x) * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(7 * y) * np.cos(5 * x) - 3 / 200 * np.pi * (x - 1) * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(3 * np.pi * x) + (1 / 200) * np.pi * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.cos(np.pi * x) - 1 / 200 * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20)


def _u2_xy(x, y):
    return -7 / 80 * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.cos(5 * x) * np.cos(7 * y) - 21 / 400 * np.pi * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * np.sin(5 * x) * np.cos(7 * y) * np.cos(3 * np.pi * x) + (1 / 4) * x * (x - 1) * (20 * y - np.sin(np.pi * x)) * np.sin(7 * y) * np.cos(5 * x) - 1 / 20 * np.pi * x * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(np.pi * x) - 3 / 20 * np.pi * x * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(3 * np.pi * x) + (7 / 400) * np.pi * x * (x - 1) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(5 * x) * np.cos(7 * y) * np.cos(np.pi * x) - 1 / 4 * x * (x - 1) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(7 * y) * np.cos(5 * x) + (1 / 20) * x * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) - 7 / 400 * x * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(5 * x) * np.cos(7 * y) - 1 / 20 * x * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20) + (1 / 20) * (x - 1) * (20 * y - np.sin(np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) - 7 / 400 * (x - 1) * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(5 * x) * np.cos(7 * y) - 1 / 20 * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * (-20 * y + np.sin(3 * np.pi * x) + 20)


def _u2_yy(x, y):
    return (1 / 400) * x * (x - 1) * (49 * (20 * y - np.sin(np.pi * x)) * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(5 * x) * np.sin(7 * y) + 280 * (20 * y - np.sin(np.pi * x)) * np.sin(5 * x) * np.cos(7 * y) - 280 * (-20 * y + np.sin(3 * np.pi * x) + 20) * np.sin(5 * x) * np.cos(7 * y) + 800 * np.sin(5 * x) * np.sin(7 * y) + 2400)


# ---------------------------------------------------------------------------
# case 3: interface-problem numerator, shared by both regions (generated)


def _w3(x, y):
    return -1 / 20 * x * (x - 1) * (20 * y - np.sin(3 * np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3)


def _w3_x(x, y):
    return -1 / 4 * x * (x - 1) * (20 * y - np.sin(3 * np.pi * x)) * np.sin(7 * y) * np.cos(5 * x) + (3 / 20) * np.pi * x * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(3 * np.pi * x) - 1 / 20 * x * (20 * y - np.sin(3 * np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3) - 1 / 20 * (x - 1) * (20 * y - np.sin(3 * np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3)


def _w3_y(x, y):
    return (1 / 20) * x * (x - 1) * (-7 * (20 * y - np.sin(3 * np.pi * x)) * np.sin(5 * x) * np.cos(7 * y) - 20 * np.sin(5 * x) * np.sin(7 * y) - 60)


def _w3_xx(x, y):
    return (5 / 4) * x * (x - 1) * (20 * y - np.sin(3 * np.pi * x)) * np.sin(5 * x) * np.sin(7 * y) - 9 / 20 * np.pi ** 2 * x * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.sin(3 * np.pi * x) + (3 / 2) * np.pi * x * (x - 1) * np.sin(7 * y) * np.cos(5 * x) * np.cos(3 * np.pi * x) - 1 / 2 * x * (20 * y - np.sin(3 * np.pi * x)) * np.sin(7 * y) * np.cos(5 * x) + (3 / 10) * np.pi * x * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(3 * np.pi * x) + (1 / 2) * (1 - x) * (20 * y - np.sin(3 * np.pi * x)) * np.sin(7 * y) * np.cos(5 * x) + (3 / 10) * np.pi * (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3) * np.cos(3 * np.pi * x) - 1 / 10 * (20 * y - np.sin(3 * np.pi * x)) * (np.sin(5 * x) * np.sin(7 * y) + 3)


def _w3_xy(x, y):
    return -7 / 4 * x * (x - 1) * (20 * y - np.sin(3 * np.pi * x)) * np.cos(5 * x) * np.cos(7 * y) + (21 / 20) * np.pi * x * (x - 1) * np.sin(5 * x) * np.cos(7 * y) * np.cos(3 * np.pi * x) - 5 * x * (x - 1) * np.sin(7 * y) * np.cos(5 * x) - 7 / 20 * x * (20 * y - np.sin(3 * np.pi * x)) * np.sin(5 * x) * np.cos(7 * y) - x * (np.sin(5 * x) * np.sin(7 * y) + 3) - 7 / 20 * (x - 1) * (20 * y - np.sin(3 * np.pi * x)) * np.sin(5 * x) * np.cos(7 * y) - (x - 1) * (np.sin(5 * x) * np.sin(7 * y) + 3)


def _w3_yy(x, y):
    return (7 / 20) * x * (x - 1) * (7 * (20 * y - np.sin(3 * np.pi * x)) * np.sin(7 * y) - 40 * np.cos(7 * y)) * np.sin(5 * x)


# ---------------------------------------------------------------------------
# case setups


def _smooth_case(name, u, ux, uy, uxx, uxy, uyy):
    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return -_a1_operator(x, y, ux(x, y), uy(x, y), uxx(x, y), uxy(x, y), uyy(x, y)) \
            + _advection_reaction(x, y, u(x, y), ux(x, y), uy(x, y))

    coeff = CoefficientField(a=_a1, b=_b1, c=_c1, f=f)
    exact = ExactSolution(
        u=lambda x, y: u(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
        grad_u=lambda x, y: np.stack([ux(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
                                      uy(np.asarray(x, dtype=float), np.asarray(y, dtype=float))],
                                     axis=-1))
    families = ("quad", "voronoi", "concave") if name == "case1" else ("quad", "voronoi")
    factory = _case1_mesh if name == "case1" else _case2_mesh
    return CaseSetup(name=name, coefficients=coeff, exact=exact, families=families,
                     mesh_factory=factory)


def case1():
    """Variable-coefficient problem on the unit square."""
    return _smooth_case("case1", _u1, _u1_x, _u1_y, _u1_xx, _u1_xy, _u1_yy)


def case2():
    """Same operator on the curved quadrilateral domain; the exact solution
    vanishes on the whole curved boundary."""
    return _smooth_case("case2", _u2, _u2_x, _u2_y, _u2_xx, _u2_xy, _u2_yy)


def case3(kappa1=1.0, kappa2=1e5):
    """Interface problem: diffusion scaled by kappa below/above the curved
    interface, solution scaled by 1/kappa so the diffusive flux matches."""

    def region_setup(kappa):
        inv = 1.0 / float(kappa)

        def f(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            w, wx, wy = _w3(x, y), _w3_x(x, y), _w3_y(x, y)
            return -_a1_operator(x, y, wx, wy, _w3_xx(x, y), _w3_xy(x, y), _w3_yy(x, y)) \
                + inv * _advection_reaction(x, y, w, wx, wy)

        def a(x, y):
            return float(kappa) * _a1(x, y)

        coeff = CoefficientField(a=a, b=_b1, c=_c1, f=f)
        exact = ExactSolution(
            u=lambda x, y: inv * _w3(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
            grad_u=lambda x, y: inv * np.stack(
                [_w3_x(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
                 _w3_y(np.asarray(x, dtype=float), np.asarray(y, dtype=float))], axis=-1))
        return coeff, exact

    coeff1, exact1 = region_setup(kappa1)
    coeff2, exact2 = region_setup(kappa2)
    coeff = CoefficientField(a=coeff1.a, b=_b1, c=_c1, f=coeff1.f,
                             regions={1: coeff1, 2: coeff2})
    exact = ExactSolution(u=exact1.u, grad_u=exact1.grad_u,
                          regions={1: exact1, 2: exact2})
    return CaseSetup(name="case3", coefficients=coeff, exact=exact,
                     families=("quad",), mesh_factory=_case3_mesh)


def _case1_mesh(family, n, rng_seed, lloyd_iters):
    if family == "quad":
        return generate_square_quad_mesh(n)
    if family == "voronoi":
        return generate_voronoi_mesh(n * n, lloyd_iters=lloyd_iters, rng_seed=rng_seed)
    if family == "concave":
        return generate_concave_mesh(n)
    raise ValueError(f"unknown family {family!r}")


def _case2_mesh(family, n, rng_seed, lloyd_iters):
    base = _case1_mesh(family, n, rng_seed, lloyd_iters)
    return map_mesh_to_curved_domain(base, make_curve("sin_pi_over20"),
                                     make_curve("sin_3pi_over20"))


def _case3_mesh(family, n, rng_seed, lloyd_iters):
    del rng_seed, lloyd_iters
    if family != "quad":
        raise ValueError("the interface problem runs on mapped quad meshes")
    return generate_interface_mesh(n)


def get_case(case_id, kappa1=1.0, kappa2=1e5):
    """Case registry; ``case_id`` is 1, 2, 3 or the 'caseN' string."""
    key = f"case{case_id}" if isinstance(case_id, int) else str(case_id)
    if key == "case1":
        return case1()
    if key == "case2":
        return case2()
    if key == "case3":
        return case3(kappa1=kappa1, kappa2=kappa2)
    raise KeyError(f"unknown case {case_id!r}")


# ---------------------------------------------------------------------------
# polynomial solutions for the patch test


def polynomial_case(k):
    """Patch-test problem: a generic degree-k polynomial solution with
    identity diffusion, no advection, no reaction; f = -laplacian(u)."""
    terms = []
    for d in range(k + 1):
        for i in range(d, -1, -1):
            j = d - i
            c = ((-1.0) ** (i + 2 * j)) * (1.0 + i + 2.0 * j) / (2.0 + i + j)
            terms.append((i, j, c))

    def u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return sum(c * x ** i * y ** j for i, j, c in terms)

    def grad(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        gx = sum(c * i * x ** max(i - 1, 0) * y ** j for i, j, c in terms if i > 0)
        gy = sum(c * j * x ** i * y ** max(j - 1, 0) for i, j, c in terms if j > 0)
        gx = gx if np.ndim(gx) else np.zeros_like(x)
        gy = gy if np.ndim(gy) else np.zeros_like(x)
        return np.stack([np.broadcast_to(gx, x.shape), np.broadcast_to(gy, x.shape)],
                        axis=-1)

    def minus_laplacian(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        lap = sum(c * i * (i - 1) * x ** max(i - 2, 0) * y ** j
                  for i, j, c in terms if i > 1)
        lap = lap + sum(c * j * (j - 1) * x ** i * y ** max(j - 2, 0)
                        for i, j, c in terms if j > 1)
        return -np.broadcast_to(lap, x.shape).astype(float)

    def identity(x, y):
        return np.broadcast_to(np.eye(2), np.shape(np.asarray(x)) + (2, 2)).copy()

    def zero_vec(x, y):
        return np.zeros(np.shape(np.asarray(x)) + (2,))

    def zero(x, y):
        return np.zeros_like(np.asarray(x, dtype=float))

    coeff = CoefficientField(a=identity, b=zero_vec, c=zero, f=minus_laplacian)
    exact = ExactSolution(u=u, grad_u=grad)
    return CaseSetup(name=f"patch_k{k}", coefficients=coeff, exact=exact,
                     families=("quad", "voronoi", "concave"),
                     mesh_factory=_case1_mesh)
