"""Sklyanin algebras realized degree by degree.

For each degree ``d`` up to the cap, the ideal component ``I_d`` is spanned by
all ``u r v`` with ``r`` a defining relation (or an extra generator such as
the central cubic) and ``u, v`` words.  Two coordinate systems are kept on
the quotient ``A_d = V_d / I_d``:

* orthonormal coordinates ``N_d^H v`` where the columns of ``N_d`` span the
  orthogonal complement of ``I_d``; these are well conditioned and every
  residual in the package is measured in them;
* normal-form coordinates on ``basis_words(d)``, the earliest words (in the
  canonical order) whose classes are independent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import linalg
from .freealg import GENERATORS, NcPoly, commutator, cyclic_derivative, superpotential
from .freealg import symmetric_blocks, word_index, words

# a word joins the basis only if its class keeps this fraction of its norm
# after removing the span of earlier basis words; keeps normal forms well
# conditioned when c is small
GREEDY_MARGIN = 1e-3
CENTRAL_REL = 1e-10


class DegreeCapError(ValueError):
    pass


class CentralityError(ArithmeticError):
    pass


class SigmaUndefined(ArithmeticError):
    pass


def mc_relations(a: complex, b: complex, c: complex) -> tuple[NcPoly, NcPoly, NcPoly]:
    """The weak Maurer-Cartan relations ``h_X, h_Y, h_Z``."""
    return (
        NcPoly({"yz": a, "zy": b, "xx": c}),
        NcPoly({"zx": a, "xz": b, "yy": c}),
        NcPoly({"xy": a, "yx": b, "zz": c}),
    )


def _ideal_generators(gens: list[NcPoly], d: int) -> np.ndarray:
    cols = []
    for g in gens:
        e = g.degree()
        if e > d:
            continue
        gv = g.to_vector(e).reshape(-1, 1)
        for i in range(d - e + 1):
            j = d - e - i
            cols.append(np.kron(np.kron(np.eye(3**i), gv), np.eye(3**j)))
    if not cols:
        return np.zeros((3**d, 0), dtype=complex)
    return np.hstack(cols)


def _greedy_basis(comp: np.ndarray) -> list[int]:
    """Indices of the earliest words whose images are independent with margin."""
    dim = comp.shape[1]
    chosen: list[int] = []
    q = np.zeros((dim, 0), dtype=complex)
    for idx in range(comp.shape[0]):
        if len(chosen) == dim:
            break
        vec = comp[idx].conj()
        res = vec - q @ (q.conj().T @ vec)
        nrm = float(np.linalg.norm(res))
        if nrm > GREEDY_MARGIN * np.linalg.norm(vec):
            chosen.append(idx)
            q = np.hstack([q, (res / nrm).reshape(-1, 1)])
    if len(chosen) != dim:
        raise linalg.AmbiguityError("greedy basis incomplete", 0.0, GREEDY_MARGIN)
    return chosen


@dataclass
class DegreeTable:
    degree: int
    basis_words: list[str]
    projection: np.ndarray  # dim x 3^d, word vector -> normal-form coordinates
    complement: np.ndarray  # 3^d x dim, orthonormal complement of I_d

    @property
    def dim(self) -> int:
        return len(self.basis_words)

    @cached_property
    def change(self) -> np.ndarray:
        """Orthonormal coordinates of the basis words (dim x dim)."""
        idx = [word_index(w) for w in self.basis_words]
        return self.complement[idx].conj().T

    @cached_property
    def change_inv(self) -> np.ndarray:
        return np.linalg.inv(self.change)


class SklyaninAlgebra:
    """``C<x,y,z>`` modulo a homogeneous ideal, up to a degree cap.

    Built by :meth:`build`; immutable afterwards.
    """

    def __init__(self, params, degree_cap, relations, extra, tables):
        self.params = tuple(complex(p) for p in params)
        self.degree_cap = degree_cap
        self.relations = tuple(relations)
        self.extra = tuple(extra)
        self.tables: dict[int, DegreeTable] = tables
        self._mult: dict[tuple[int, int], np.ndarray] = {}

    @classmethod
    def build(cls, params, degree_cap: int, extra=(), relations=None, cache_dir=None):
        a, b, c = (complex(p) for p in params)
        if max(abs(a), abs(b), abs(c)) == 0:
            raise ValueError("parameters (a, b, c) are all zero")
        if degree_cap < 3:
            raise ValueError("degree cap must be at least 3")
        relations = tuple(relations) if relations is not None else mc_relations(a, b, c)
        extra = tuple(extra)
        key = cache_key((a, b, c), degree_cap, relations, extra)
        if cache_dir is not None:
            tables = load_tables(cache_dir, key)
            if tables is not None:
                return cls((a, b, c), degree_cap, relations, extra, tables)
        gens = list(relations) + list(extra)
        tables = {}
        for d in range(degree_cap + 1):
            gen_mat = _ideal_generators(gens, d)
            if gen_mat.shape[1] == 0:
                comp = np.eye(3**d, dtype=complex)
            else:
                u, sv, _ = np.linalg.svd(gen_mat, full_matrices=True)
                r = linalg.decide_rank(sv, None, f"ideal rank in degree {d}")
                comp = u[:, r:]
            chosen = _greedy_basis(comp)
            all_words = words(d)
            table = DegreeTable(d, [all_words[i] for i in chosen], None, comp)
            table.projection = table.change_inv @ comp.conj().T
            tables[d] = table
        if cache_dir is not None:
            save_tables(cache_dir, key, tables)
        return cls((a, b, c), degree_cap, relations, extra, tables)

    def quotient(self, element: NcPoly, degree_cap: int | None = None, cache_dir=None):
        """The algebra with ``element`` added to the ideal generators."""
        return SklyaninAlgebra.build(
            self.params,
            degree_cap or self.degree_cap,
            extra=self.extra + (element,),
            relations=self.relations,
            cache_dir=cache_dir,
        )

    # --- dimensions and coordinates ---------------------------------------

    def dim(self, d: int) -> int:
        if d < 0:
            return 0
        self._check(d)
        return self.tables[d].dim

    def hilbert(self) -> list[int]:
        return [self.dim(d) for d in range(self.degree_cap + 1)]

    def basis_words(self, d: int) -> list[str]:
        self._check(d)
        return list(self.tables[d].basis_words)

    def _check(self, d: int):
        if d > self.degree_cap:
            raise DegreeCapError(f"degree {d} above cap {self.degree_cap}")

    def coords(self, p: NcPoly, d: int) -> np.ndarray:
        """Orthonormal quotient coordinates of the degree-d part of p."""
        if d < 0:
            return np.zeros(0, dtype=complex)
        self._check(d)
        return self.tables[d].complement.conj().T @ p.to_vector(d)

    def from_coords(self, y: np.ndarray, d: int) -> NcPoly:
        """Normal-form polynomial for orthonormal coordinates ``y``."""
        if d < 0 or len(y) == 0:
            return NcPoly()
        t = self.tables[d]
        return NcPoly(dict(zip(t.basis_words, t.change_inv @ y)))

    def normal_form(self, p: NcPoly) -> NcPoly:
        """Canonical representative supported on the basis words."""
        out = NcPoly()
        for d in sorted(p.degrees()):
            self._check(d)
            t = self.tables[d]
            out = out + NcPoly(dict(zip(t.basis_words, t.projection @ p.to_vector(d))))
        return out

    def residual(self, p: NcPoly) -> float:
        """Distance from p to the ideal, all degrees combined."""
        return float(np.sqrt(sum(np.linalg.norm(self.coords(p, d)) ** 2 for d in p.degrees())))

    def generator(self, v: str) -> np.ndarray:
        y = np.zeros(3, dtype=complex)
        y[GENERATORS.index(v)] = 1
        return y

    # --- multiplication ----------------------------------------------------

    def mult_tensor(self, i: int, j: int) -> np.ndarray:
        """``T[k, p, q]``: product of orthonormal basis p of A_i and q of A_j."""
        key = (i, j)
        if key not in self._mult:
            self._check(i + j)
            ni = self.tables[i].complement
            nj = self.tables[j].complement
            nk = self.tables[i + j].complement
            lift = np.einsum("ua,vb->uvab", ni, nj).reshape(3 ** (i + j), ni.shape[1] * nj.shape[1])
            self._mult[key] = (nk.conj().T @ lift).reshape(nk.shape[1], ni.shape[1], nj.shape[1])
        return self._mult[key]

    def multiply(self, u: np.ndarray, i: int, v: np.ndarray, j: int) -> np.ndarray:
        if i < 0 or j < 0:
            return np.zeros(max(self.dim(i + j), 0), dtype=complex)
        return np.einsum("kab,a,b->k", self.mult_tensor(i, j), u, v)

    def left_mult(self, u: np.ndarray, i: int, j: int) -> np.ndarray:
        """Matrix of ``v -> u v`` from A_j to A_{i+j}."""
        return np.einsum("kab,a->kb", self.mult_tensor(i, j), u)

    def right_mult(self, v: np.ndarray, j: int, i: int) -> np.ndarray:
        """Matrix of ``u -> u v`` from A_i to A_{i+j}."""
        return np.einsum("kab,b->ka", self.mult_tensor(i, j), v)

    # --- serialization -----------------------------------------------------

    def tables_json(self) -> dict:
        return {str(d): _table_json(t) for d, t in self.tables.items()}


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _table_json(t: DegreeTable) -> dict:
    return {
        "words": t.basis_words,
        "projection": [[_cplx(z) for z in row] for row in t.projection],
        "complement": [[_cplx(z) for z in row] for row in t.complement],
    }


def _matrix_from_json(rows) -> np.ndarray:
    arr = np.array(rows, dtype=float)
    if arr.size == 0:
        return arr.reshape(arr.shape[:2]).astype(complex)
    return arr[..., 0] + 1j * arr[..., 1]


def cache_key(params, degree_cap, relations, extra) -> str:
    payload = {
        "params": [[round(z.real, 15), round(z.imag, 15)] for z in params],
        "D": degree_cap,
        "relations": [str(r) for r in relations],
        "extra": [str(e) for e in extra],
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:32]


def save_tables(cache_dir, key: str, tables: dict[int, DegreeTable]):
    path = Path(cache_dir)
    path.mkdir(parents=True, exist_ok=True)
    data = {str(d): _table_json(t) for d, t in tables.items()}
    (path / f"basis-{key}.json").write_text(json.dumps(data))


def load_tables(cache_dir, key: str) -> dict[int, DegreeTable] | None:
    f = Path(cache_dir) / f"basis-{key}.json"
    if not f.exists():
        return None
    data = json.loads(f.read_text())
    tables = {}
    for d, t in data.items():
        d = int(d)
        comp = _matrix_from_json(t["complement"]).reshape(3**d, len(t["words"]))
        proj = _matrix_from_json(t["projection"]).reshape(len(t["words"]), 3**d)
        tables[d] = DegreeTable(d, list(t["words"]), proj, comp)
    return tables


# --- central cubic -------------------------------------------------------------


@dataclass
class CentralCubic:
    element: NcPoly
    ratio: tuple[complex, complex, complex]
    nullity: int  # of the full degree-3 centrality system
    ansatz_nullity: int
    residual: float = 0.0
    flags: list[str] = field(default_factory=list)
    # ratios whose block combination already vanishes in A_3, e.g. (a, b, c)
    trivial: list[tuple[complex, complex, complex]] = field(default_factory=list)

    @classmethod
    def from_ratio(cls, ratio, nullity=-1, ansatz_nullity=-1):
        alpha, beta, gamma = (complex(r) for r in ratio)
        b1, b2, b3 = symmetric_blocks()
        return cls(b1 * alpha + b2 * beta + b3 * gamma, (alpha, beta, gamma), nullity, ansatz_nullity)

    def factors(self) -> tuple[NcPoly, NcPoly, NcPoly]:
        """``(g_x, g_y, g_z)`` with ``W = sum v g_v = sum g_v v`` in the free algebra."""
        return mc_relations(*self.ratio)

    def ratio_distance(self, other) -> float:
        """Projective distance from ``other`` to the ratios giving the same
        class as this element (the ratio plus the trivial directions)."""
        span = np.column_stack([self.ratio] + list(self.trivial)).astype(complex)
        q, _ = np.linalg.qr(span)
        v = np.asarray(other, dtype=complex)
        v = v / np.linalg.norm(v)
        return float(np.linalg.norm(v - q @ (q.conj().T @ v)))


def _commutator_maps(A: SklyaninAlgebra):
    maps_l, maps_r = [], []
    for v in GENERATORS:
        e = A.generator(v)
        maps_l.append(A.right_mult(e, 1, 3))  # g -> g v
        maps_r.append(A.left_mult(e, 1, 3))  # g -> v g
    return np.vstack(maps_l), np.vstack(maps_r)


def centrality_residual(A: SklyaninAlgebra, g: NcPoly) -> float:
    """``max_v |[g, v]| / |g|`` measured in the quotient."""
    gn = A.residual(g)
    if gn == 0:
        return float("inf")
    worst = 0.0
    for v in GENERATORS:
        worst = max(worst, A.residual(commutator(g, NcPoly.gen(v))))
    return worst / gn


def solve_central_cubic(A: SklyaninAlgebra) -> CentralCubic:
    """Central cubic in the span of the three symmetric blocks.

    The blocks are dependent in A_3 (``a B1 + b B2 + c B3`` is the sum of
    ``v h_v``), so ratios are taken modulo that kernel: the returned ratio is
    orthogonal to it and the ansatz nullity counts classes in A_3.

    Raises CentralityError if no central element exists in the ansatz.
    When the solution space has dimension above one the choice maximizes
    |gamma|, then |alpha|, and fixes the phase so that alpha (or gamma when
    alpha vanishes) is real positive.
    """
    if A.degree_cap < 4:
        raise DegreeCapError("centrality needs degree cap >= 4")
    gl, gr = _commutator_maps(A)
    comm = gl - gr
    scale = max(np.linalg.norm(gl, 2), np.linalg.norm(gr, 2))
    full_null = linalg.nullspace(comm, scale, "full centrality system").shape[1]

    blocks = np.column_stack([A.coords(b, 3) for b in symmetric_blocks()])
    trivial = linalg.nullspace(blocks, None, "symmetric blocks in A_3")
    ans = comm @ blocks
    ans_scale = max(np.linalg.norm(gl @ blocks, 2), np.linalg.norm(gr @ blocks, 2))
    null = linalg.nullspace(ans, ans_scale, "symmetric centrality ansatz")
    # drop the trivial directions
    null = null - trivial @ (trivial.conj().T @ null)
    if null.size:
        u, sv, _ = np.linalg.svd(null, full_matrices=False)
        null = u[:, : linalg.decide_rank(sv, 1.0, "central classes")]
    k = null.shape[1]
    if k == 0:
        raise CentralityError("no central cubic in the symmetric ansatz")
    flags = []
    if k > 1:
        flags.append(f"ansatz nullity {k} > 1; tie-break applied")
    vec = _tie_break(null)
    out = CentralCubic.from_ratio(vec, full_null, k)
    out.flags = flags
    out.trivial = [tuple(complex(z) for z in col) for col in trivial.T]
    out.residual = centrality_residual(A, out.element)
    return out


def _tie_break(null: np.ndarray) -> np.ndarray:
    if null.shape[1] == 1:
        vec = null[:, 0]
    else:
        vec = None
        for idx in (2, 0, 1):
            proj = null @ null[idx].conj()
            if np.linalg.norm(proj) > 1e-12:
                vec = proj
                break
    vec = vec / np.linalg.norm(vec)
    pivot = 0 if abs(vec[0]) > 1e-12 else 2
    if abs(vec[pivot]) <= 1e-12:
        pivot = 1
    return vec * (abs(vec[pivot]) / vec[pivot])


def central_full_nullity(A: SklyaninAlgebra) -> int:
    gl, gr = _commutator_maps(A)
    scale = max(np.linalg.norm(gl, 2), np.linalg.norm(gr, 2))
    return linalg.nullspace(gl - gr, scale, "full centrality system").shape[1]


def superpotential_check(a, b, c) -> float:
    """Largest deviation between the cyclic derivatives of the potential and
    the Maurer-Cartan relations."""
    phi = superpotential(a, b, c)
    return max(
        (cyclic_derivative(phi, v) - h).norm() for v, h in zip(GENERATORS, mc_relations(a, b, c))
    )


# --- point scheme ---------------------------------------------------------------

# monomials of a commutative cubic as exponent triples
CUBIC_MONOMIALS = [(i, j, 3 - i - j) for i in range(3, -1, -1) for j in range(3 - i, -1, -1)]


def relation_matrix_forms(a, b, c) -> np.ndarray:
    """M as a 3x3 array of linear forms: ``forms[i, j]`` is the coefficient
    vector over (x, y, z) of entry (i, j)."""
    forms = np.zeros((3, 3, 3), dtype=complex)
    x, y, z = 0, 1, 2
    layout = [
        [(c, x), (b, z), (a, y)],
        [(a, z), (c, y), (b, x)],
        [(b, y), (a, x), (c, z)],
    ]
    for i, row in enumerate(layout):
        for j, (coef, var) in enumerate(row):
            forms[i, j, var] = coef
    return forms


def relation_matrix(a, b, c, p) -> np.ndarray:
    return np.einsum("ijv,v->ij", relation_matrix_forms(a, b, c), np.asarray(p, dtype=complex))


@dataclass
class PointScheme:
    params: tuple[complex, complex, complex]
    coefficients: dict  # exponent triple -> coefficient of det M

    @property
    def cubic(self) -> tuple[complex, complex, complex, complex]:
        """(coefficient of xyz; of x^3, y^3, z^3)."""
        co = self.coefficients
        return (co[(1, 1, 1)], co[(3, 0, 0)], co[(0, 3, 0)], co[(0, 0, 3)])

    def M(self, p) -> np.ndarray:
        return relation_matrix(*self.params, p)

    def evaluate(self, p) -> complex:
        x, y, z = (complex(v) for v in p)
        return sum(c * x**i * y**j * z**k for (i, j, k), c in self.coefficients.items())

    def is_degenerate(self) -> bool:
        scale = max(abs(v) for v in self.params) ** 3
        return all(abs(c) <= 1e-12 * scale for c in self.coefficients.values())

    def projective_residual(self, p) -> float:
        p = np.asarray(p, dtype=complex)
        scale = sum(abs(c) for c in self.coefficients.values())
        if scale == 0:
            return 0.0
        return abs(self.evaluate(p)) / (scale * np.linalg.norm(p) ** 3)


def point_scheme(a, b, c) -> PointScheme:
    """det M expanded over commuting variables."""
    forms = relation_matrix_forms(a, b, c)
    tensor = np.zeros((3, 3, 3), dtype=complex)
    for perm, sign in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                       ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
        tensor += sign * np.einsum(
            "u,v,w->uvw", forms[0, perm[0]], forms[1, perm[1]], forms[2, perm[2]]
        )
    coeffs = {m: 0j for m in CUBIC_MONOMIALS}
    for u in range(3):
        for v in range(3):
            for w in range(3):
                e = [0, 0, 0]
                for idx in (u, v, w):
                    e[idx] += 1
                coeffs[tuple(e)] += tensor[u, v, w]
    return PointScheme((complex(a), complex(b), complex(c)), coeffs)


def normalize_projective(p) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    p = p / np.linalg.norm(p)
    k = int(np.argmax(np.abs(p)))
    return p * (abs(p[k]) / p[k])


def sigma_step(ps: PointScheme, p, tol: float = 1e-8) -> np.ndarray:
    """The automorphism of the point scheme: the kernel direction of M(p)."""
    p = normalize_projective(p)
    if ps.is_degenerate():
        raise SigmaUndefined("det M vanishes identically; sigma is undefined")
    res = ps.projective_residual(p)
    if res > tol:
        raise SigmaUndefined(f"point is not on the cubic (residual {res:.2e})")
    _, sv, vh = np.linalg.svd(ps.M(p))
    if linalg.decide_rank(sv[:2], sv[0], "rank of M(p)") < 2:
        raise SigmaUndefined("M(p) has rank below 2")
    return normalize_projective(vh[-1].conj())


def point_on_cubic(ps: PointScheme, x: complex = 1.0, y: complex = 0.37 + 0.21j) -> np.ndarray:
    """A point on the cubic with the given x and y coordinates (root of z)."""
    co = ps.coefficients
    poly = [0j] * 4  # coefficients in z, highest first
    for (i, j, k), c in co.items():
        poly[3 - k] += c * x**i * y**j
    roots = np.roots(poly)
    return normalize_projective([x, y, roots[0]])
