"""Exact lattice geometry on the hexagonal torus C / (Z + omega Z).

Points are written ``u + v omega`` with ``omega = exp(2 pi i / 3)`` and
(u, v) exact rationals.  The reference Lagrangian has three branches, the
images of a vertical line under the order-3 rotation ``tau``.  Triangles
bounded by the branches are enumerated exactly; areas are lattice areas
(the physical area is ``sqrt(3)/2`` times larger).

A branch with direction ``d`` is the set where ``N(P) = d[1] P.u - d[0] P.v``
takes a fixed value; lifts of one branch differ by integers in N.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .novikov import SERIES, ThetaParams, theta_coeffs

# class name -> offset in the exponent (6k + offset + 3t)^2
CLASS_OFFSET = {"a": 1, "b": 5, "c": 3}
# rounding allowance added to the truncation bound of the series comparison
FLOAT_FLOOR = 1e-13


class WindowError(ValueError):
    def __init__(self, msg: str, certified: int):
        super().__init__(f"{msg} (certified |k| <= {certified})")
        self.certified = certified


class PatternError(ArithmeticError):
    pass


def frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, order=True)
class LatticeVec:
    u: Fraction
    v: Fraction

    def __post_init__(self):
        object.__setattr__(self, "u", frac(self.u))
        object.__setattr__(self, "v", frac(self.v))

    def __add__(self, o):
        return LatticeVec(self.u + o.u, self.v + o.v)

    def __sub__(self, o):
        return LatticeVec(self.u - o.u, self.v - o.v)

    def __mul__(self, k):
        return LatticeVec(self.u * k, self.v * k)

    __rmul__ = __mul__

    def mod1(self) -> "LatticeVec":
        return LatticeVec(self.u % 1, self.v % 1)

    def tau(self) -> "LatticeVec":
        """Rotation by omega: ``(u, v) -> (-v, u - v)``."""
        return LatticeVec(-self.v, self.u - self.v)

    def complex(self) -> complex:
        w = cmath.exp(2j * math.pi / 3)
        return float(self.u) + float(self.v) * w

    def __str__(self):
        return f"({self.u}, {self.v})"


def det(p: LatticeVec, q: LatticeVec) -> Fraction:
    return p.u * q.v - p.v * q.u


def _coprime(d) -> tuple[int, int]:
    a, b = int(d[0]), int(d[1])
    if (a, b) == (0, 0):
        raise ValueError("direction must be nonzero")
    if math.gcd(a, b) != 1:
        raise ValueError(f"direction {d} is not primitive")
    return a, b


@dataclass(frozen=True)
class LagrangianLine:
    direction: tuple[int, int]
    base: LatticeVec
    holonomy_s: Fraction = Fraction(0)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "direction", _coprime(self.direction))
        object.__setattr__(self, "holonomy_s", frac(self.holonomy_s) % 1)

    @property
    def dvec(self) -> LatticeVec:
        return LatticeVec(*self.direction)

    def level(self, p: LatticeVec) -> Fraction:
        """Value of the normal functional; constant along each lift."""
        a, b = self.direction
        return b * p.u - a * p.v

    def base_level(self) -> Fraction:
        return self.level(self.base)

    def parallel(self, other: "LagrangianLine") -> bool:
        return det(self.dvec, other.dvec) == 0

    def tau(self, label: str = "") -> "LagrangianLine":
        d = self.dvec.tau()
        return LagrangianLine((int(d.u), int(d.v)), self.base.tau(), self.holonomy_s, label)


def build_reference(t, s) -> list[LagrangianLine]:
    """The three branches: a vertical line through ((1 - t)/4, 0) and its
    images under tau."""
    t, s = frac(t), frac(s)
    if not -1 < t < 1:
        raise ValueError("t must lie in (-1, 1)")
    b0 = LagrangianLine((1, 2), LatticeVec((1 - t) / 4, 0), s, "branch0")
    b1 = b0.tau("branch1")
    b2 = b1.tau("branch2")
    return [b0, b1, b2]


def _intersect(l1: LagrangianLine, n1: Fraction, l2: LagrangianLine, n2: Fraction) -> LatticeVec:
    """Point with level n1 on l1 and n2 on l2."""
    (a1, b1), (a2, b2) = l1.direction, l2.direction
    # b1 u - a1 v = n1, b2 u - a2 v = n2
    dd = -b1 * a2 + a1 * b2
    if dd == 0:
        raise ValueError("lines are parallel")
    u = (-n1 * a2 + a1 * n2) / Fraction(dd)
    v = (b1 * n2 - b2 * n1) / Fraction(dd)
    return LatticeVec(u, v)


def intersections(l1: LagrangianLine, l2: LagrangianLine) -> list[tuple[LatticeVec, int]]:
    """Intersection points on the torus with multiplicity, sorted."""
    if l1.parallel(l2):
        raise ValueError("parallel lines have no transverse intersections")
    n = abs(int(det(l1.dvec, l2.dvec)))
    pts = set()
    for i, j in product(range(n), range(n)):
        pts.add(_intersect(l1, l1.base_level() + i, l2, l2.base_level() + j).mod1())
    pts = sorted(pts)
    if len(pts) != n:
        raise ArithmeticError(f"expected {n} intersection points, found {len(pts)}")
    return [(p, 1) for p in pts]


def floer_generators(reference: list[LagrangianLine], other: LagrangianLine) -> dict:
    """Generators of CF(reference, other), graded by intersection sign.

    A branch that coincides with ``other`` is perturbed by a small
    Hamiltonian and contributes one generator of each parity; a parallel
    but disjoint branch contributes none.
    """
    even = odd = 0
    per_branch = {}
    for br in reference:
        if br.parallel(other):
            same = (br.level(other.base) - br.base_level()).denominator == 1
            cnt = (1, 1) if same else (0, 0)
        else:
            n = len(intersections(br, other))
            cnt = (n, 0) if det(br.dvec, other.dvec) > 0 else (0, n)
        per_branch[br.label] = cnt[0] + cnt[1]
        even += cnt[0]
        odd += cnt[1]
    return {"even": even, "odd": odd, "total": even + odd, "per_branch": per_branch}


# --- triangles ----------------------------------------------------------------


def corner_labels(A: int, B: int, C: int) -> tuple[int, int, int]:
    """tau-invariant orbit labels of the (0,1), (1,2) and (2,0) corners for
    the lifts with levels base + A, base + B, base + C."""
    return ((A + B) % 3, (2 * B - C) % 3, (-(2 * C + A)) % 3)


def class_of_labels(labels) -> str:
    step = (labels[1] - labels[0]) % 3
    return {0: "c", 2: "a", 1: "b"}[step]


@dataclass
class Triangle:
    corners: tuple[LatticeVec, LatticeVec, LatticeVec]  # (2,0), (0,1), (1,2) corners
    lattice_area: Fraction
    labels: tuple[int, int, int]
    corner_class: str
    k: int
    holonomy_exponent: Fraction
    lifts: tuple[int, int, int] = field(default=(0, 0, 0))

    def exponent(self, t: Fraction) -> Fraction:
        return (6 * self.k + CLASS_OFFSET[self.corner_class] + 3 * t) ** 2

    def to_json(self) -> dict:
        return {
            "corner_class": self.corner_class,
            "k": self.k,
            "lattice_area": frac_str(self.lattice_area),
            "holonomy_exponent": frac_str(self.holonomy_exponent),
            "corners": [[frac_str(p.u), frac_str(p.v)] for p in self.corners],
        }


def _levels(lines):
    return [ln.base_level() for ln in lines]


def triangle_from_lifts(lines: list[LagrangianLine], A: int, B: int, C: int, t: Fraction) -> Triangle | None:
    """The triangle cut out by the given lifts, or None if they concur.

    Branch levels use ``N0 = 2u - v``, ``N1 = u - 2v`` (sign flipped from the
    generic functional) and ``N2 = -u - v`` so that ``N0 - N1 + N2 = 0``.
    The lifts sit at N0 = N0(base) + A, N1 = N1(base) + B, N2 = N2(base) + C.
    """
    l0, l1, l2 = lines
    alpha = l0.base_level() + A
    beta = -l1.base_level() + B
    gamma = l2.base_level() + C
    delta = alpha - beta + gamma
    if delta == 0:
        return None
    p01 = LatticeVec((2 * alpha - beta) / 3, (alpha - 2 * beta) / 3)
    p12 = LatticeVec((beta - 2 * gamma) / 3, -(beta + gamma) / 3)
    p20 = LatticeVec((alpha - gamma) / 3, -(alpha + 2 * gamma) / 3)
    area = abs(det(p01 - p20, p12 - p01)) / 2
    labels = corner_labels(A, B, C)
    cls = class_of_labels(labels)
    off = CLASS_OFFSET[cls]
    k6 = -2 * delta - off - 3 * t
    if k6.denominator != 1 or k6.numerator % 6:
        raise PatternError(f"triangle of class {cls} has non-integral index {k6 / 6}")
    # boundary traversed clockwise: each side is -(delta/3) times its branch
    # direction, one fundamental cycle per unit, weight s per cycle
    hol = sum(-(delta / 3) * ln.holonomy_s for ln in lines)
    return Triangle((p20, p01, p12), area, labels, cls, int(k6 // 6), hol, (A, B, C))


def enumerate_triangles(lines: list[LagrangianLine], corner_class: str, k_window: int,
                        t, window: int | None = None) -> list[Triangle]:
    """Triangles of one class with the (0,1) corner at the reference point.

    The reference (0,1) corner is where the base lifts of branches 0 and 1
    meet; every triangle up to translation with its (0,1) corner there is
    cut out by those lifts and a lift ``base + C`` of branch 2, so the
    enumeration runs over ``|C| <= window``.  Raises WindowError if the
    window cannot certify every triangle with |k| <= k_window, and
    ValueError if one of them degenerates to a point.
    """
    if corner_class not in CLASS_OFFSET:
        raise ValueError(f"unknown corner class {corner_class!r}")
    if k_window < 1:
        raise ValueError("k_window must be >= 1")
    t = frac(t)
    off = CLASS_OFFSET[corner_class]
    for k in range(-k_window, k_window + 1):
        if 6 * k + off + 3 * t == 0:
            raise ValueError(f"class {corner_class} triangle k = {k} collapses to a point at t = {t}")
    if window is None:
        window = 3 * k_window + 6
    found = []
    for C in range(-window, window + 1):
        tri = triangle_from_lifts(lines, 0, 0, C, t)
        if tri is not None and tri.corner_class == corner_class:
            found.append(tri)
    # smallest area a triangle outside the window can have
    outside = [triangle_from_lifts(lines, 0, 0, C, t) for C in (-window - 1, window + 1)]
    floor = min(tr.lattice_area for tr in outside if tr is not None)
    certified = -1
    for K in range(0, k_window + 1):
        needed = [tr for tr in found if abs(tr.k) <= K]
        ks = {tr.k for tr in needed}
        if ks == set(range(-K, K + 1)) and all(tr.lattice_area < floor for tr in needed):
            certified = K
        else:
            break
    if certified < k_window:
        raise WindowError(f"window {window} too small for |k| <= {k_window}", certified)
    out = [tr for tr in found if abs(tr.k) <= k_window]
    out.sort(key=lambda tr: (tr.corner_class, tr.lattice_area, tr.corners))
    return out


def brute_force_triangles(lines, t, radius: int, max_area: Fraction) -> dict:
    """Oracle: all lift triples in a box, reduced modulo translations.

    Returns a map from (class, canonical corners) to area for triangles with
    their (0,1) corner at the reference point and area <= max_area.
    """
    t = frac(t)
    out = {}
    ref = triangle_from_lifts(lines, 0, 0, 1, t).corners[1].mod1()
    for A, B, C in product(range(-radius, radius + 1), repeat=3):
        tri = triangle_from_lifts(lines, A, B, C, t)
        if tri is None or tri.lattice_area > max_area:
            continue
        p01 = tri.corners[1]
        if p01.mod1() != ref:
            continue
        shift = p01 - ref
        key = (tri.corner_class,) + tuple(c - shift for c in tri.corners)
        out[key] = tri.lattice_area
    return out


def fitted_base_area(triangles: list[Triangle], t) -> Fraction:
    """Area unit from the smallest triangle; checks every other triangle
    against ``area = A0 * (6k + offset + 3t)^2``."""
    t = frac(t)
    smallest = min(triangles, key=lambda tr: tr.lattice_area)
    a0 = smallest.lattice_area / smallest.exponent(t)
    for tr in triangles:
        if tr.lattice_area != a0 * tr.exponent(t):
            raise PatternError(f"area {tr.lattice_area} breaks the quadratic pattern")
    return a0


def area_ratios(triangles: list[Triangle]) -> list[Fraction]:
    """Areas relative to the k = 0 member, in enumeration order."""
    base = [tr for tr in triangles if tr.k == 0]
    if not base:
        raise ValueError("no k = 0 triangle")
    return [tr.lattice_area / base[0].lattice_area for tr in triangles]


def holonomy_ladder(triangles: list[Triangle]) -> list[Fraction]:
    """exponent(k + 1) - exponent(k) along the family."""
    by_k = {tr.k: tr.holonomy_exponent for tr in triangles}
    ks = sorted(by_k)
    return [by_k[k + 1] - by_k[k] for k in ks if k + 1 in by_k]


def series_from_counts(triangles: list[Triangle], params: ThetaParams, base_area: Fraction) -> complex:
    """Sum of ``q0^(area / A0) exp(2 pi i hol)`` over the triangles."""
    total = 0j
    for tr in triangles:
        e = float(tr.lattice_area / base_area)
        total += params.q0**e * cmath.exp(2j * math.pi * float(tr.holonomy_exponent))
    return total


@dataclass
class SeriesComparison:
    counted: dict
    theta: dict
    normalization: dict
    relative_error: dict
    bound: dict
    base_area: Fraction

    @property
    def ok(self) -> bool:
        return all(self.relative_error[c] <= self.bound[c] for c in self.counted)


def compare_with_theta(t, s, q0: float, k_window: int, K: int | None = None) -> SeriesComparison:
    """Counted series per class against theta_coeffs.

    The per-class normalization is fitted on the dominant (smallest-area)
    term; the remaining discrepancy, relative to that term, must lie below
    ``q0^(next exponent - min exponent)`` where the next exponent is the
    smallest one outside the window, plus FLOAT_FLOOR for rounding.
    """
    t, s = frac(t), frac(s)
    lines = build_reference(t, s)
    params = ThetaParams(float(t), float(s), q0, K if K is not None else max(6, k_window + 3))
    theta = dict(zip("abc", theta_coeffs(params)))
    fams = {c: enumerate_triangles(lines, c, k_window, t) for c in "abc"}
    a0 = fitted_base_area([tr for fam in fams.values() for tr in fam], t)
    counted, norm, err, bound = {}, {}, {}, {}
    for c, fam in fams.items():
        counted[c] = series_from_counts(fam, params, a0)
        lead = min(fam, key=lambda tr: tr.lattice_area)
        lead_val = series_from_counts([lead], params, a0)
        off, shift = SERIES[c]
        # the same k term of the theta series
        lam = cmath.exp(2j * math.pi * float(s) * ((1 + 3 * float(t)) / 2 + 3 * lead.k + shift))
        theta_lead = lam * q0 ** float(lead.exponent(t))
        norm[c] = theta_lead / lead_val
        err[c] = abs(norm[c] * counted[c] - theta[c]) / abs(theta_lead)
        outside = min(float((6 * k + off + 3 * t) ** 2) for k in (-k_window - 1, k_window + 1))
        bound[c] = q0 ** (outside - float(lead.exponent(t))) + FLOAT_FLOOR
    return SeriesComparison(counted, theta, norm, err, bound, a0)


def triangle_report(triangles: list[Triangle]) -> list[dict]:
    ordered = sorted(triangles, key=lambda tr: (tr.corner_class, tr.lattice_area, tr.corners))
    return [tr.to_json() for tr in ordered]
