"""Independent oracles shared by the tests."""

from itertools import product

import numpy as np

from skewmirror.freealg import NcPoly


def ideal_membership_residual(gens, p: NcPoly, d: int) -> float:
    """Relative distance of the degree-d part of p from the two-sided ideal
    spanned by ``u g v`` with u, v words, solved by plain least squares."""
    cols = []
    for g in gens:
        gd = len(next(iter(g.terms)))
        for i in range(d - gd + 1):
            for u in product("xyz", repeat=i):
                for v in product("xyz", repeat=d - gd - i):
                    cols.append((NcPoly({"".join(u): 1}) * g * NcPoly({"".join(v): 1})).to_vector(d))
    target = p.to_vector(d)
    nb = np.linalg.norm(target)
    if nb == 0:
        return 0.0
    mat = np.column_stack(cols)
    x, *_ = np.linalg.lstsq(mat, target, rcond=None)
    return float(np.linalg.norm(mat @ x - target) / nb)


def sympy_det_coefficients(a, b, c):
    """det M by symbolic expansion; exponent triple -> complex coefficient."""
    import sympy as sp

    x, y, z = sp.symbols("x y z")
    A, B, C = sp.symbols("A B C")
    M = sp.Matrix([[C * x, B * z, A * y], [A * z, C * y, B * x], [B * y, A * x, C * z]])
    poly = sp.Poly(sp.expand(M.det()), x, y, z)
    out = {}
    for mon, coef in poly.terms():
        out[mon] = complex(coef.subs({A: a, B: b, C: c}).evalf())
    return out
