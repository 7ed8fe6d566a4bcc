"""Graded free modules, the Koszul resolution and matrix factorizations of W.

Conventions.  A free module is a list of shifts ``e`` for summands ``A(e)``
(so ``A(-3)`` has shift -3).  Matrices act on column vectors and an entry
acts by left multiplication, hence composition is the ordinary matrix
product with entries multiplied in order.  Entry ``(i, j)`` of a map of
degree ``m`` is homogeneous of degree ``target[i] - source[j] + m``.

Every identity is checked in a :class:`SklyaninAlgebra` (A itself or
``B = A/(W)``) through orthonormal quotient coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .freealg import GENERATORS, NcPoly, parse
from .sklyanin import CentralCubic, SklyaninAlgebra

MF_TOL = 1e-9
COMPOSITE_TOL = 1e-10


class VerificationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TwistedFreeModule:
    shifts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "shifts", tuple(int(e) for e in self.shifts))

    @property
    def rank(self) -> int:
        return len(self.shifts)

    @property
    def twists(self) -> tuple[int, ...]:
        """The ``t_i`` of summands ``A(-t_i)``."""
        return tuple(-e for e in self.shifts)

    def shift(self, k: int) -> "TwistedFreeModule":
        return TwistedFreeModule(tuple(e + k for e in self.shifts))

    def __str__(self):
        return " + ".join(f"A({e})" for e in self.shifts) or "0"


class GradedMatrix:
    """Map between twisted free modules with homogeneous NcPoly entries."""

    def __init__(self, source, target, entries, map_degree: int = 0):
        self.source = source if isinstance(source, TwistedFreeModule) else TwistedFreeModule(source)
        self.target = target if isinstance(target, TwistedFreeModule) else TwistedFreeModule(target)
        self.map_degree = int(map_degree)
        rows = [[e if isinstance(e, NcPoly) else NcPoly.scalar(e) if e else NcPoly() for e in row]
                for row in entries]
        if len(rows) != self.target.rank or any(len(r) != self.source.rank for r in rows):
            raise ValueError("entry shape does not match the modules")
        self.entries = rows
        self.check_homogeneous()

    @property
    def shape(self):
        return (self.target.rank, self.source.rank)

    def entry_degree(self, i: int, j: int) -> int:
        return self.target.shifts[i] - self.source.shifts[j] + self.map_degree

    def check_homogeneous(self):
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                if not e.is_zero() and not e.is_homogeneous(self.entry_degree(i, j)):
                    raise ValueError(
                        f"entry ({i},{j}) = {e} is not homogeneous of degree {self.entry_degree(i, j)}"
                    )

    def __matmul__(self, other: "GradedMatrix") -> "GradedMatrix":
        if other.target.shifts != self.source.shifts:
            raise ValueError(f"cannot compose: {other.target} vs {self.source}")
        n, m = self.target.rank, other.source.rank
        out = [[NcPoly() for _ in range(m)] for _ in range(n)]
        for i in range(n):
            for k in range(m):
                acc = NcPoly()
                for j in range(self.source.rank):
                    if not self.entries[i][j].is_zero() and not other.entries[j][k].is_zero():
                        acc = acc + self.entries[i][j] * other.entries[j][k]
                out[i][k] = acc
        return GradedMatrix(other.source, self.target, out, self.map_degree + other.map_degree)

    def shifted(self, k: int) -> "GradedMatrix":
        return GradedMatrix(self.source.shift(k), self.target.shift(k), self.entries, self.map_degree)

    def with_modules(self, source, target) -> "GradedMatrix":
        return GradedMatrix(source, target, self.entries, self.map_degree)

    def coords(self, A: SklyaninAlgebra) -> list[list[np.ndarray]]:
        return [[A.coords(e, self.entry_degree(i, j)) for j, e in enumerate(row)]
                for i, row in enumerate(self.entries)]

    def max_residual(self, A: SklyaninAlgebra) -> float:
        """Largest entry norm in the quotient."""
        return max((A.residual(e) for row in self.entries for e in row), default=0.0)

    def to_json(self) -> dict:
        return {
            "source_twists": list(self.source.shifts),
            "target_twists": list(self.target.shifts),
            "degree": self.map_degree,
            "entries": [[str(e) for e in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GradedMatrix":
        entries = [[parse(s) for s in row] for row in data["entries"]]
        return cls(data["source_twists"], data["target_twists"], entries, data.get("degree", 0))

    def __str__(self):
        width = max(len(str(e)) for row in self.entries for e in row)
        lines = [" ".join(str(e).rjust(width) for e in row) for row in self.entries]
        return f"{self.source} -> {self.target}\n" + "\n".join(lines)


def identity_minus_w(mat: GradedMatrix, W: NcPoly) -> GradedMatrix:
    """``mat - W I`` for a square composite."""
    n = mat.shape[0]
    rows = [[mat.entries[i][j] - (W if i == j else 0) for j in range(n)] for i in range(n)]
    return GradedMatrix(mat.source, mat.target, rows, mat.map_degree)


# --- numeric helpers ----------------------------------------------------------


class _Slots:
    """Unknown homogeneous entries, stacked as orthonormal coordinates."""

    def __init__(self, A: SklyaninAlgebra):
        self.A = A
        self.slots = []  # (key, degree, offset, dim)
        self.size = 0

    def add(self, key, degree: int) -> None:
        dim = self.A.dim(degree) if degree >= 0 else 0
        self.slots.append((key, degree, self.size, dim))
        self.size += dim

    def polys(self, x: np.ndarray) -> dict:
        out = {}
        for key, d, off, dim in self.slots:
            out[key] = self.A.from_coords(x[off : off + dim], d) if dim else NcPoly()
        return out


def _stack(A: SklyaninAlgebra, mats) -> np.ndarray:
    parts = []
    for m in mats:
        for i, row in enumerate(m.entries):
            for j, e in enumerate(row):
                parts.append(A.coords(e, m.entry_degree(i, j)))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)


def solve_affine(A: SklyaninAlgebra, slots: _Slots, build, what: str):
    """Solve ``build(polys) = 0`` where build returns GradedMatrices whose
    entries depend affinely on the unknowns.  Returns (lstsq result, polys)."""
    r0 = _stack(A, build(slots.polys(np.zeros(slots.size, dtype=complex))))
    cols = []
    for k in range(slots.size):
        e = np.zeros(slots.size, dtype=complex)
        e[k] = 1
        cols.append(_stack(A, build(slots.polys(e))) - r0)
    mat = np.column_stack(cols) if cols else np.zeros((len(r0), 0), dtype=complex)
    res = linalg.lstsq(mat, -r0, what)
    return res, slots.polys(res.x)


# --- Koszul complex and the homotopy ---------------------------------------------


def _gens():
    return [NcPoly.gen(v) for v in GENERATORS]


def relation_matrix(a, b, c) -> list[list[NcPoly]]:
    x, y, z = _gens()
    return [
        [x * c, z * b, y * a],
        [z * a, y * c, x * b],
        [y * b, x * a, z * c],
    ]


@dataclass
class KoszulComplex:
    row: GradedMatrix  # A(-1)^3 -> A
    M: GradedMatrix  # A(-2)^3 -> A(-1)^3
    col: GradedMatrix  # A(-3) -> A(-2)^3
    residuals: dict = field(default_factory=dict)

    @property
    def maps(self):
        return [self.row, self.M, self.col]


def koszul_s0(A: SklyaninAlgebra, params=None) -> KoszulComplex:
    """The linear resolution ``A(-3) -> A(-2)^3 -> A(-1)^3 -> A`` of the
    trivial module; ``params`` overrides the coefficients of M."""
    if A.degree_cap < 3:
        raise ValueError("need degree cap >= 3")
    a, b, c = params if params is not None else A.params
    neg = [-g for g in _gens()]
    row = GradedMatrix((-1, -1, -1), (0,), [neg])
    M = GradedMatrix((-2, -2, -2), (-1, -1, -1), relation_matrix(a, b, c))
    col = GradedMatrix((-3,), (-2, -2, -2), [[g] for g in neg])
    out = KoszulComplex(row, M, col)
    scale = max(abs(p) for p in (a, b, c))
    out.residuals = {
        "row*M": (row @ M).max_residual(A) / scale,
        "M*col": (M @ col).max_residual(A) / scale,
    }
    worst = max(out.residuals.values())
    if worst > COMPOSITE_TOL:
        raise VerificationError(f"Koszul composites do not vanish (residual {worst:.2e})")
    return out


@dataclass
class Homotopy:
    """The quadratic homotopy s1 with ``s0 s1 + s1 s0 = W`` and ``s1^2 = 0``."""

    p: GradedMatrix  # A -> A(-1)^3, map degree 3
    Qp: GradedMatrix  # A(-1)^3 -> A(-2)^3, the block Q'
    q: GradedMatrix  # A(-2)^3 -> A(-3)
    W: CentralCubic
    residual: float  # all s1 equations incl. s1^2 = 0, relative to |W|
    solution_dim: int  # of the linear system with an s2 term allowed
    general_residual: float  # unconstrained 90-unknown system
    general_dim: int
    general: dict = field(default_factory=dict)  # minimal-norm p, Q', q of that system
    s2_norm: float = 0.0  # |s2| / |W| before the change of basis removed it
    newton_steps: int = 0


def _w_norm(A: SklyaninAlgebra, W: NcPoly) -> float:
    return float(np.linalg.norm(A.coords(W, 3)))


K0, K1, K2, K3 = (0,), (-1, -1, -1), (-2, -2, -2), (-3,)


def _s1_equations(s0: KoszulComplex, w: NcPoly, p, Qp, q):
    row, M, col = s0.row, s0.M, s0.col
    return [
        identity_minus_w(row @ p, w),
        identity_minus_w(_add(p @ row, M @ Qp), w),
        identity_minus_w(_add(Qp @ M, col @ q), w),
        identity_minus_w(q @ col, w),
    ]


def _column(ent, src, tgt, deg):
    return GradedMatrix(src, tgt, [[e] for e in ent], deg)


def _row(ent, src, tgt, deg):
    return GradedMatrix(src, tgt, [list(ent)], deg)


def solve_homotopy_s1(A: SklyaninAlgebra, s0: KoszulComplex, W: CentralCubic,
                      seed: int = 0, max_steps: int = 50) -> Homotopy:
    """Solve for the quadratic entries of s1 (map degree 3 on the Koszul
    terms ``K0 = A, K1 = A(-1)^3, K2 = A(-2)^3, K3 = A(-3)``).

    1. The general system ``s0 s1 + s1 s0 = W`` in all 15 quadratic entries
       is solved for its residual floor, dimension and minimal-norm solution.
    2. With ``p = -g``, ``q = -g^T`` (where ``W = sum v g_v = sum g_v v``) the
       system for Q' together with ``s1^2 + s0 s2 + s2 s0 = 0`` is linear in
       Q' and a cubic ``t = s2``; t is in general nonzero.
    3. A change of basis of the folded factorization by
       ``[[1, 0], [v, I]]`` and ``[[1, w], [0, I]]`` (v, w linear) keeps the
       linear entries and sends t to ``t - q v + w p - w M v``; Newton's
       method on (v, w) drives it to zero, leaving ``s1^2 = 0``.
    """
    if A.degree_cap < 4:
        raise ValueError("need degree cap >= 4")
    w = W.element
    wn = _w_norm(A, w)
    if wn == 0:
        raise VerificationError("W vanishes in A")
    M, col = s0.M, s0.col

    def qp_matrix(polys):
        return GradedMatrix(K1, K2, [[polys[("Q", i, j)] for j in range(3)] for i in range(3)], 3)

    # 1. general system
    slots = _Slots(A)
    for i in range(3):
        slots.add(("p", i), 2)
        slots.add(("q", i), 2)
        for j in range(3):
            slots.add(("Q", i, j), 2)

    def general_mats(polys):
        p = _column([polys[("p", i)] for i in range(3)], K0, K1, 3)
        q = _row([polys[("q", i)] for i in range(3)], K2, K3, 3)
        return p, qp_matrix(polys), q

    gen_res, gen_polys = solve_affine(
        A, slots, lambda polys: _s1_equations(s0, w, *general_mats(polys)), "general homotopy system"
    )
    general = dict(zip(("p", "Qp", "q"), general_mats(gen_polys)))

    # 2. gauge p = -g, q = -g^T with an s2 term
    g = W.factors()
    p = _column([-gv for gv in g], K0, K1, 3)
    q = _row([-gv for gv in g], K2, K3, 3)
    slots = _Slots(A)
    for i in range(3):
        for j in range(3):
            slots.add(("Q", i, j), 2)
    slots.add("t", 3)

    def build(polys):
        Qp = qp_matrix(polys)
        t = GradedMatrix(K0, K3, [[polys["t"]]], 6)
        return _s1_equations(s0, w, p, Qp, q) + [_add(Qp @ p, col @ t), _add(q @ Qp, t @ s0.row)]

    res, polys = _solve_min_t(A, slots, build)
    Qp = qp_matrix(polys)
    t = polys["t"]
    s2_norm = A.residual(t) / wn

    # 3. remove t by a change of basis
    steps = 0
    if s2_norm > 1e-12:
        v, wrow, steps = _kill_s2(A, s0, p, q, t, seed, max_steps)
        vcol = _column(v, K0, K2, 3)
        Mv = M @ vcol
        vr = vcol @ s0.row
        cw = col @ _row(wrow, K1, K3, 3)
        wM = _row(wrow, K1, K3, 3) @ M
        p = _column([p.entries[i][0] - Mv.entries[i][0] for i in range(3)], K0, K1, 3)
        q = _row([q.entries[0][j] + wM.entries[0][j] for j in range(3)], K2, K3, 3)
        Qp = GradedMatrix(K1, K2, [[Qp.entries[i][j] + vr.entries[i][j] - cw.entries[i][j]
                                    for j in range(3)] for i in range(3)], 3)

    eqs = _s1_equations(s0, w, p, Qp, q) + [Qp @ p, q @ Qp]
    final = max(m.max_residual(A) for m in eqs) / wn
    return Homotopy(
        p=p, Qp=Qp, q=q, W=W, residual=final, solution_dim=res.nullity,
        general_residual=gen_res.residual / wn, general_dim=gen_res.nullity,
        general=general, s2_norm=s2_norm, newton_steps=steps,
    )


def _solve_min_t(A, slots, build):
    """Minimal-norm solution, then the member of the solution family with
    the smallest s2 term."""
    res, polys = solve_affine(A, slots, build, "homotopy system with s2")
    if res.nullity == 0 or res.relative > 1e-6:
        return res, polys
    # columns of the system again, to get its kernel
    zero = np.zeros(slots.size, dtype=complex)
    r0 = _stack(A, build(slots.polys(zero)))
    cols = [_stack(A, build(slots.polys(e))) - r0 for e in np.eye(slots.size, dtype=complex)]
    ker = linalg.nullspace(np.column_stack(cols), None, "homotopy kernel")
    _, tdeg, off, dim = [s for s in slots.slots if s[0] == "t"][0]
    tk = ker[off : off + dim]
    kappa = np.linalg.lstsq(tk, -res.x[off : off + dim], rcond=None)[0]
    x = res.x + ker @ kappa
    return res, slots.polys(x)


def _kill_s2(A, s0, p, q, t, seed, max_steps):
    """Newton's method for linear v (column), w (row) with
    ``t - q v + w p - w M v = 0`` in A_3."""
    slots = _Slots(A)
    for i in range(3):
        slots.add(("v", i), 1)
    for i in range(3):
        slots.add(("w", i), 1)
    M = s0.M.entries
    pe = [p.entries[i][0] for i in range(3)]
    qe = q.entries[0]

    def value(x):
        pp = slots.polys(x)
        v = [pp[("v", i)] for i in range(3)]
        wr = [pp[("w", i)] for i in range(3)]
        out = t
        for i in range(3):
            out = out - qe[i] * v[i] + wr[i] * pe[i]
            for j in range(3):
                out = out - wr[i] * M[i][j] * v[j]
        return A.coords(out, 3), v, wr

    scale = float(np.linalg.norm(A.coords(t, 3)))
    rng = np.random.default_rng(seed)
    for attempt in range(5):
        x = 0.1 * (rng.standard_normal(slots.size) + 1j * rng.standard_normal(slots.size))
        for step in range(1, max_steps + 1):
            f, v, wr = value(x)
            # v and w enter bilinearly; unit steps in one of them are exact
            J = np.column_stack([value(x + e)[0] - f for e in np.eye(slots.size, dtype=complex)])
            x = x + np.linalg.lstsq(J, -f, rcond=None)[0]
            f, v, wr = value(x)
            if np.linalg.norm(f) <= 1e-14 * max(scale, 1.0):
                return v, wr, step
    raise VerificationError(f"could not remove the s2 term (residual {np.linalg.norm(f):.2e})")


# --- the 4x4 factorizations -------------------------------------------------------

MF_L_TWISTS = ((-3, -4, -4, -4), (-3, -2, -2, -2), (0, -1, -1, -1))
MF_LPRIME_TWISTS = ((-2, -3, -3, -3), (-2, -1, -1, -1), (1, 0, 0, 0))


@dataclass
class MatrixFactorization:
    D1: GradedMatrix  # X0 -> X1
    D0: GradedMatrix  # X1 -> X0(3)
    W: CentralCubic
    name: str = ""
    residuals: dict = field(default_factory=dict)
    pattern_ok: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "D1": self.D1.to_json(),
            "D0": self.D0.to_json(),
            "W": str(self.W.element),
            "residuals": self.residuals,
            "pattern_ok": self.pattern_ok,
        }


def _assemble(A, s0, s1: Homotopy, twists, name) -> MatrixFactorization:
    src, mid, top = twists
    x, y, z = _gens()
    zero = NcPoly()
    p = [s1.p.entries[i][0] for i in range(3)]
    q = s1.q.entries[0]
    Qp = s1.Qp.entries
    M = s0.M.entries
    D1 = GradedMatrix(src, mid, [
        [zero, -x, -y, -z],
        [-x] + list(Qp[0]),
        [-y] + list(Qp[1]),
        [-z] + list(Qp[2]),
    ])
    D0 = GradedMatrix(mid, top, [
        [zero] + list(q),
        [p[0]] + list(M[0]),
        [p[1]] + list(M[1]),
        [p[2]] + list(M[2]),
    ])
    mf = MatrixFactorization(D1, D0, s1.W, name)
    verify_mf(A, mf)
    mf.pattern_ok = check_linear_pattern(mf, A.params)
    return mf


def assemble_mf_L(A, s0: KoszulComplex, s1: Homotopy) -> MatrixFactorization:
    return _assemble(A, s0, s1, MF_L_TWISTS, "L")


def assemble_mf_Lprime(A, s0: KoszulComplex, s1: Homotopy) -> MatrixFactorization:
    return _assemble(A, s0, s1, MF_LPRIME_TWISTS, "Lprime")


def verify_mf(A: SklyaninAlgebra, mf: MatrixFactorization, tol: float | None = None) -> dict:
    """Entry-wise residuals of ``D0 D1 - W I`` and ``D1 D0 - W I`` relative
    to |W|, measured in A."""
    w = mf.W.element
    wn = _w_norm(A, w)
    d0d1 = identity_minus_w(mf.D0 @ mf.D1, w)
    d1d0 = identity_minus_w(mf.D1.shifted(3) @ mf.D0, w)
    mf.residuals = {
        "D0D1-W": d0d1.max_residual(A) / wn,
        "D1D0-W": d1d0.max_residual(A) / wn,
    }
    if tol is not None and max(mf.residuals.values()) > tol:
        raise VerificationError(f"matrix factorization residual {max(mf.residuals.values()):.2e}")
    return mf.residuals


def check_linear_pattern(mf: MatrixFactorization, params) -> bool:
    """Linear entries -x, -y, -z and M at their fixed positions and signs."""
    a, b, c = params
    x, y, z = _gens()
    zero = NcPoly()
    expect_d1 = {(0, 0): zero, (0, 1): -x, (0, 2): -y, (0, 3): -z, (1, 0): -x, (2, 0): -y, (3, 0): -z}
    M = relation_matrix(a, b, c)
    expect_d0 = {(0, 0): zero}
    for i in range(3):
        for j in range(3):
            expect_d0[(i + 1, j + 1)] = M[i][j]
    ok = all(mf.D1.entries[i][j].allclose(e) for (i, j), e in expect_d1.items())
    ok = ok and all(mf.D0.entries[i][j].allclose(e) for (i, j), e in expect_d0.items())
    # quadratic blocks
    for i in range(1, 4):
        for j in range(1, 4):
            ok = ok and mf.D1.entry_degree(i, j) == 2
        ok = ok and mf.D0.entry_degree(0, i) == 2 and mf.D0.entry_degree(i, 0) == 2
    return bool(ok)


def classical_Qprime(W: CentralCubic, a: complex) -> list[list[NcPoly]]:
    """Commutative closed form ``Q' = -(1/a) [g]_x`` when ``M = a [v]_x``."""
    gx, gy, gz = W.factors()
    zero = NcPoly()
    cross = [[zero, -gz, gy], [gz, zero, -gx], [-gy, gx, zero]]
    return [[e * (-1 / a) for e in row] for row in cross]


# --- complexes over B ----------------------------------------------------------------


def _block(B: SklyaninAlgebra, mat: GradedMatrix, d: int) -> np.ndarray:
    """Matrix of ``mat`` on internal degree d: sum_j B_{d+e_j} -> sum_k B_{d+f_k}."""
    src = [max(B.dim(d + e), 0) if d + e >= 0 else 0 for e in mat.source.shifts]
    tgt = [max(B.dim(d + f + mat.map_degree), 0) if d + f + mat.map_degree >= 0 else 0
           for f in mat.target.shifts]
    out = np.zeros((sum(tgt), sum(src)), dtype=complex)
    r0 = 0
    for k, f in enumerate(mat.target.shifts):
        c0 = 0
        for j, e in enumerate(mat.source.shifts):
            ent = mat.entries[k][j]
            if src[j] and tgt[k] and not ent.is_zero():
                deg = mat.entry_degree(k, j)
                out[r0 : r0 + tgt[k], c0 : c0 + src[j]] = B.left_mult(B.coords(ent, deg), deg, d + e)
            c0 += src[j]
        r0 += tgt[k]
    return out


def _dim(B: SklyaninAlgebra, module: TwistedFreeModule, d: int) -> int:
    return sum(B.dim(d + e) if d + e >= 0 else 0 for e in module.shifts)


@dataclass
class Resolution:
    """``C_0 <- C_1 <- ...`` with ``maps[n]: C_{n+1} -> C_n``."""

    modules: list[TwistedFreeModule]
    maps: list[GradedMatrix]
    composite_residuals: list[float] = field(default_factory=list)
    homology: dict = field(default_factory=dict)  # (position, degree) -> dim

    def twists(self):
        return [list(m.shifts) for m in self.modules]


def _composites(B, maps) -> list[float]:
    out = []
    for n in range(len(maps) - 1):
        prod = maps[n] @ maps[n + 1]
        out.append(prod.max_residual(B))
    return out


def homology_table(B: SklyaninAlgebra, res: Resolution, max_degree: int, augmented: GradedMatrix | None = None):
    """dim H_n in internal degrees 0..max_degree; the last position is
    dropped since its outgoing differential is truncated."""
    table = {}
    positions = len(res.modules) - 1
    for d in range(max_degree + 1):
        ranks = []
        for mat in res.maps:
            blk = _block(B, mat, d)
            ranks.append(linalg.rank(blk, None, f"differential in degree {d}") if blk.size else 0)
        for n in range(positions):
            dim = _dim(B, res.modules[n], d)
            out_rank = ranks[n - 1] if n > 0 else 0
            if n == 0 and augmented is not None:
                blk = _block(B, augmented, d)
                out_rank = linalg.rank(blk, None, "augmentation") if blk.size else 0
            table[(n, d)] = dim - out_rank - ranks[n]
    res.homology = table
    return table


def _unrolled(s0: KoszulComplex, s1: Homotopy, depth: int, start_shift: int = 0):
    """Differentials ``r, [p|M], D1, D0(-3), D1(-3), ...`` with modules."""
    x, y, z = _gens()
    zero = NcPoly()
    p = [s1.p.entries[i][0] for i in range(3)]
    M = s0.M.entries
    Qp = s1.Qp.entries
    q = s1.q.entries[0]
    d1_ent = [[zero, -x, -y, -z], [-x] + list(Qp[0]), [-y] + list(Qp[1]), [-z] + list(Qp[2])]
    d0_ent = [[zero] + list(q)] + [[p[i]] + list(M[i]) for i in range(3)]
    mods = [(0,), (-1, -1, -1), (-3, -2, -2, -2)]
    maps = [
        GradedMatrix(mods[1], mods[0], [[-x, -y, -z]]),
        GradedMatrix(mods[2], mods[1], [[p[i]] + list(M[i]) for i in range(3)]),
    ]
    k = 0
    while len(mods) < depth + 1:
        if len(mods) % 2 == 1:  # next is a D1 source
            src = (-3 - 3 * k, -4 - 3 * k, -4 - 3 * k, -4 - 3 * k)
            maps.append(GradedMatrix(src, mods[-1], d1_ent))
        else:
            k += 1
            src = (-3 - 3 * k, -2 - 3 * k, -2 - 3 * k, -2 - 3 * k)
            maps.append(GradedMatrix(src, mods[-1], d0_ent))
        mods.append(src)
    mods = [TwistedFreeModule(tuple(e + start_shift for e in m)) for m in mods[: depth + 1]]
    maps = [m.shifted(start_shift) for m in maps[:depth]]
    return mods, maps


def resolve_k_over_B(B: SklyaninAlgebra, s0: KoszulComplex, s1: Homotopy, depth: int = 6,
                     max_degree: int = 5) -> Resolution:
    """The 2-periodic resolution of the trivial module over B."""
    if B.degree_cap < max_degree:
        raise ValueError("degree cap too small for the requested degrees")
    mods, maps = _unrolled(s0, s1, depth)
    res = Resolution(mods, maps)
    res.composite_residuals = _composites(B, maps)
    homology_table(B, res, max_degree)
    return res


@dataclass
class ConeReport:
    complex: Resolution
    phi: GradedMatrix
    chain_residual: float
    row_residuals: list[float]  # relative least-squares floor per row of D0


def cone_phi(B: SklyaninAlgebra, s0: KoszulComplex, s1: Homotopy, depth: int = 5) -> ConeReport:
    """``Cone(phi)`` with phi the first row of D0, plus nullhomotopy tests.

    Row i of D0 is a cocycle on the resolution of k[-2]; it is a coboundary
    iff it factors as ``h [p|M]`` with ``h`` defined on ``B(-1)^3``.
    """
    mods, maps = _unrolled(s0, s1, depth + 1)
    # cone: B + B(-1)^3 in position 0, B in position 1
    top = GradedMatrix(TwistedFreeModule((0, -1, -1, -1)), TwistedFreeModule((0,)),
                       [[NcPoly()] + list(maps[0].entries[0])])
    d0 = maps[3].shifted(3)  # B(-3)+B(-2)^3 -> B+B(-1)^3
    cone_maps = [top, d0] + [m.shifted(3) for m in maps[4:]]
    cone_mods = [TwistedFreeModule((0,)), top.source] + [m.source for m in cone_maps[1:]]
    cone = Resolution(cone_mods, cone_maps)
    cone.composite_residuals = _composites(B, cone_maps)

    phi = GradedMatrix(mods[2], TwistedFreeModule((0,)), [d0.entries[0]])
    chain = (phi @ maps[2]).max_residual(B) / s1.W.element.norm()

    d2 = maps[1]  # B(-3)+B(-2)^3 -> B(-1)^3
    rows = []
    for i in range(4):
        target = (0,) if i == 0 else (-1,)
        row = GradedMatrix(mods[2], target, [d0.entries[i]])
        rows.append(_factor_through(B, row, d2))
    return ConeReport(cone, phi, chain, rows)


def _factor_through(B: SklyaninAlgebra, row: GradedMatrix, d2: GradedMatrix) -> float:
    """Relative least-squares floor of ``h d2 = row`` over h: d2.target -> row.target."""
    slots = _Slots(B)
    hdeg = [row.target.shifts[0] - e for e in d2.target.shifts]
    for j, deg in enumerate(hdeg):
        slots.add(j, deg)

    def build(polys):
        h = GradedMatrix(d2.target, row.target, [[polys[j] for j in range(d2.target.rank)]])
        diff = h @ d2
        ent = [[diff.entries[0][k] - row.entries[0][k] for k in range(row.source.rank)]]
        return [GradedMatrix(row.source, row.target, ent)]

    rhs = _stack(B, [row])
    res, _ = solve_affine(B, slots, build, "nullhomotopy")
    nb = float(np.linalg.norm(rhs))
    return res.residual / nb if nb else 0.0


@dataclass
class B1Report:
    complex: Resolution
    augmentation: GradedMatrix
    augmentation_ranks: dict  # degree -> rank
    expected: dict  # degree -> dim B_{d+1}


def resolve_B1(B: SklyaninAlgebra, s0: KoszulComplex, s1: Homotopy, depth: int = 4,
               max_degree: int = 3) -> B1Report:
    """Resolution of ``B(1)_{>=0}``: ``G_n = F_{n+1}(1)`` with augmentation (x y z)."""
    mods, maps = _unrolled(s0, s1, depth + 1)
    g_mods = [m.shift(1) for m in mods[1:]]
    g_maps = [m.shifted(1) for m in maps[1:]]
    res = Resolution(g_mods, g_maps)
    res.composite_residuals = _composites(B, g_maps)
    x, y, z = _gens()
    aug = GradedMatrix(g_mods[0], TwistedFreeModule((1,)), [[x, y, z]])
    ranks, expected = {}, {}
    for d in range(max_degree + 1):
        blk = _block(B, aug, d)
        ranks[d] = linalg.rank(blk, None, "augmentation") if blk.size else 0
        expected[d] = B.dim(d + 1)
    homology_table(B, res, max_degree, augmented=aug)
    return B1Report(res, aug, ranks, expected)


# --- chain maps ---------------------------------------------------------------------

# fixed entries for the named morphisms: {name: (degree, f0 fixed, f1 fixed)}
# f0 acts on the D1 source, f1 on the D0 source; None marks an unknown entry


def _pattern(col1=None, row1=None):
    fixed = [[None] * 4 for _ in range(4)]
    if col1 is not None:
        for i, v in enumerate(col1):
            fixed[i][0] = v
    if row1 is not None:
        for j, v in enumerate(row1):
            fixed[0][j] = v
    return fixed


def morphism_pattern(name: str):
    """Fixed 0/1 entries for p, q, r (degree 0) and p', q', r' (degree 1)."""
    base = name.rstrip("'")
    k = {"p": 1, "q": 2, "r": 3}[base]
    unit = [0, 0, 0, 0]
    unit[k] = 1
    if name.endswith("'"):
        return 1, _pattern(col1=unit, row1=unit), _pattern()
    return 0, _pattern(col1=unit), _pattern(row1=unit)


@dataclass
class ChainMap:
    f0: GradedMatrix
    f1: GradedMatrix
    degree: int
    name: str = ""
    residual: float = 0.0
    solution_dim: int = 0
    nontrivial: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name, "degree": self.degree,
            "f0": self.f0.to_json(), "f1": self.f1.to_json(),
            "residual": self.residual, "solution_dim": self.solution_dim,
            "not_nullhomotopic": self.nontrivial,
        }


def solve_chain_map(A: SklyaninAlgebra, src: MatrixFactorization, tgt: MatrixFactorization,
                    pattern, degree: int, name: str = "") -> ChainMap:
    """Solve for the unknown entries of a morphism with prescribed 0/1 entries.

    Degree 0 maps ``f0: X0 -> Y0``, ``f1: X1 -> Y1`` satisfy
    ``D1' f0 = f1 D1`` and ``D0' f1 = f0(3) D0``.  Degree 1 maps
    ``f0: X0 -> Y1``, ``f1: X1 -> Y0(3)`` satisfy ``D0' f0 + f1 D1 = 0`` and
    ``D1'(3) f1 + f0(3) D0 = 0``.
    """
    fix0, fix1 = pattern
    X0, X1 = src.D1.source, src.D1.target
    if degree == 0:
        Y0, Y1 = tgt.D1.source, tgt.D1.target
    elif degree == 1:
        Y0, Y1 = tgt.D1.target, tgt.D1.source.shift(3)
    else:
        raise ValueError("degree must be 0 or 1")
    slots = _Slots(A)
    for tag, fix, S, T in (("f0", fix0, X0, Y0), ("f1", fix1, X1, Y1)):
        for i in range(4):
            for j in range(4):
                deg = T.shifts[i] - S.shifts[j]
                if fix[i][j] is None and deg >= 0:
                    slots.add((tag, i, j), deg)

    def mats(polys):
        def one(tag, fix, S, T):
            ent = [[NcPoly.scalar(fix[i][j]) if fix[i][j] is not None else polys.get((tag, i, j), NcPoly())
                    for j in range(4)] for i in range(4)]
            return GradedMatrix(S, T, ent)
        return one("f0", fix0, X0, Y0), one("f1", fix1, X1, Y1)

    def build(polys):
        f0, f1 = mats(polys)
        if degree == 0:
            e1 = _sub(tgt.D1 @ f0, f1 @ src.D1)
            e2 = _sub(tgt.D0 @ f1, f0.shifted(3) @ src.D0)
        else:
            e1 = _add(tgt.D0 @ f0, f1 @ src.D1)
            e2 = _add(tgt.D1.shifted(3) @ f1, f0.shifted(3) @ src.D0)
        return [e1, e2]

    res, polys = solve_affine(A, slots, build, f"chain map {name}")
    f0, f1 = mats(polys)
    scale = max(1.0, float(np.linalg.norm(_stack(A, [f0, f1]))))
    cm = ChainMap(f0, f1, degree, name, res.residual / scale, res.nullity)
    cm.nontrivial = _has_unit_scalar(cm) and _no_scalar_entries(src) and _no_scalar_entries(tgt)
    return cm


def _sub(m1: GradedMatrix, m2: GradedMatrix) -> GradedMatrix:
    ent = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(m1.entries, m2.entries)]
    return GradedMatrix(m2.source, m2.target, ent, m2.map_degree)


def _add(m1: GradedMatrix, m2: GradedMatrix) -> GradedMatrix:
    ent = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(m1.entries, m2.entries)]
    return GradedMatrix(m2.source, m2.target, ent, m2.map_degree)


def _has_unit_scalar(cm: ChainMap) -> bool:
    for f in (cm.f0, cm.f1):
        for i, row in enumerate(f.entries):
            for j, e in enumerate(row):
                if f.entry_degree(i, j) == 0 and abs(e.coeff("")) > 0.5:
                    return True
    return False


def _no_scalar_entries(mf: MatrixFactorization) -> bool:
    """With no degree-0 entries in D, ``D h +- h D`` has none either, so a
    nonzero scalar entry rules out a nullhomotopy."""
    return all(
        m.entry_degree(i, j) > 0 or e.is_zero()
        for m in (mf.D0, mf.D1)
        for i, row in enumerate(m.entries)
        for j, e in enumerate(row)
    )
