#!/usr/bin/env python3
"""Regenerate the closed-form derivative expressions embedded in ncvem.cases.

The built-in test problems need first and second derivatives of their exact
solutions in closed form (the right-hand sides are manufactured from the
strong form).  Differentiating the curved-domain solutions by hand is
error-prone, so this script does it symbolically and prints python source
ready to paste into ncvem/cases.py.  It is a development utility only; the
library itself never imports sympy.
"""

import sympy as sp

x, y = sp.symbols("x y")


def emit(name, expr):
    code = sp.pycode(sp.simplify(expr))
    code = code.replace("math.sin", "np.sin").replace("math.cos", "np.cos")
    code = code.replace("math.pi", "np.pi")
    print(f"def {name}(x, y):")
    print(f"    return {code}")
    print()


def emit_family(prefix, u):
    emit(f"_{prefix}", u)
    emit(f"_{prefix}_x", sp.diff(u, x))
    emit(f"_{prefix}_y", sp.diff(u, y))
    emit(f"_{prefix}_xx", sp.diff(u, x, 2))
    emit(f"_{prefix}_xy", sp.diff(u, x, y))
    emit(f"_{prefix}_yy", sp.diff(u, y, 2))


g1 = sp.sin(sp.pi * x) / 20
g2 = 1 + sp.sin(3 * sp.pi * x) / 20
u2 = -(y - g1) * (y - g2) * (1 - x) * x * (3 + sp.sin(5 * x) * sp.sin(7 * y))
print("# ---- curved quadrilateral domain solution " + "-" * 30)
emit_family("u2", u2)

g3 = sp.sin(3 * sp.pi * x) / 20
w3 = x * (1 - x) * (y - g3) * (3 + sp.sin(5 * x) * sp.sin(7 * y))
print("# ---- interface-problem numerator (shared by both regions) " + "-" * 14)
emit_family("w3", w3)
