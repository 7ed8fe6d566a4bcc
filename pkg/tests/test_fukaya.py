from collections import Counter
from fractions import Fraction as F

import pytest

from skewmirror import fukaya
from skewmirror.fukaya import (
    LagrangianLine,
    LatticeVec,
    WindowError,
    area_ratios,
    brute_force_triangles,
    build_reference,
    enumerate_triangles,
    floer_generators,
    intersections,
)


def test_reference_lines():
    lines = build_reference(0, F(1, 7))
    assert [ln.direction for ln in lines] == [(1, 2), (-2, -1), (1, -1)]
    assert lines[0].base == LatticeVec(F(1, 4), 0)
    d = lines[0].dvec
    assert d.tau().tau().tau() == d
    dets = [fukaya.det(lines[i].dvec, lines[j].dvec) for i, j in ((0, 1), (1, 2), (2, 0))]
    assert sorted(abs(x) for x in dets) == [3, 3, 3]
    with pytest.raises(ValueError):
        build_reference(1, 0)
    with pytest.raises(ValueError):
        LagrangianLine((2, 4), LatticeVec(0, 0))


def test_intersections():
    lines = build_reference(F(1, 5), 0)
    pts = intersections(lines[0], lines[1])
    assert len(pts) == 3
    for p, _ in pts:
        # each point lies on both lines modulo the lattice
        for ln in lines[:2]:
            assert (ln.level(p) - ln.base_level()).denominator == 1
    horiz = LagrangianLine((1, 0), LatticeVec(0, 0))
    assert len(intersections(horiz, LagrangianLine((1, -3), LatticeVec(0, 0)))) == 3
    with pytest.raises(ValueError):
        intersections(horiz, LagrangianLine((-1, 0), LatticeVec(0, F(1, 2))))


def test_floer_generators_four_plus_four():
    lines = build_reference(0, 0)
    L = LagrangianLine((1, 2), LatticeVec(F(1, 4), 0))
    gens = floer_generators(lines, L)
    assert (gens["even"], gens["odd"]) == (4, 4)
    off = LagrangianLine((1, 2), LatticeVec(F(1, 3), 0))
    assert floer_generators(lines, off)["total"] == 6


def test_a_class_ratios_t0():
    lines = build_reference(0, F(13, 100))
    fam = enumerate_triangles(lines, "a", 2, 0)
    got = sorted(tr.lattice_area for tr in fam)
    assert [g / got[0] for g in got[:4]] == [1, 25, 49, 121]
    assert got[0] == F(1, 24)


def test_c_class_ratios_t0():
    lines = build_reference(0, F(13, 100))
    everything = [tr for c in "abc" for tr in enumerate_triangles(lines, c, 2, 0)]
    smallest = min(tr.lattice_area for tr in everything)
    c = sorted(tr.lattice_area / smallest for tr in everything if tr.corner_class == "c")
    assert c[:4] == [9, 9, 81, 81]


@pytest.mark.parametrize("t", [F(0), F(1, 5), F(-2, 7)])
def test_one_triangle_per_k_and_exact_ratios(t):
    lines = build_reference(t, F(2, 9))
    for cls, off in fukaya.CLASS_OFFSET.items():
        fam = enumerate_triangles(lines, cls, 3, t)
        assert sorted(tr.k for tr in fam) == list(range(-3, 4))
        base = next(tr.lattice_area for tr in fam if tr.k == 0)
        for tr in fam:
            assert tr.lattice_area / base == ((6 * tr.k + off + 3 * t) / (off + 3 * t)) ** 2
        assert fukaya.holonomy_ladder(fam) == [3 * F(2, 9)] * 6


def test_brute_force_oracle():
    t = F(1, 5)
    lines = build_reference(t, 0)
    fams = [tr for c in "abc" for tr in enumerate_triangles(lines, c, 2, t)]
    bound = F(min(tr.lattice_area for tr in fams if abs(tr.k) == 2))
    mine = Counter((tr.corner_class, tr.lattice_area) for tr in fams if tr.lattice_area < bound)
    brute = Counter((key[0], area) for key, area in brute_force_triangles(lines, t, 7, bound).items()
                    if area < bound)
    assert mine == brute


def test_window_errors_and_enlargement():
    lines = build_reference(0, 0)
    with pytest.raises(WindowError) as err:
        enumerate_triangles(lines, "a", 3, 0, window=7)
    assert err.value.certified < 3
    small = enumerate_triangles(lines, "a", 3, 0)
    big = enumerate_triangles(lines, "a", 4, 0)
    bound = max(tr.lattice_area for tr in small)
    assert sorted(tr.lattice_area for tr in big if tr.lattice_area <= bound) == sorted(
        tr.lattice_area for tr in small)
    with pytest.raises(ValueError):
        enumerate_triangles(lines, "d", 3, 0)


def test_trivial_local_system():
    lines = build_reference(F(1, 5), 0)
    for c in "abc":
        assert all(tr.holonomy_exponent == 0 for tr in enumerate_triangles(lines, c, 2, F(1, 5)))


def test_collapsed_triangle():
    # at t = 1/3 the b-class k = -1 triangle has zero area
    with pytest.raises(ValueError, match="collapses"):
        enumerate_triangles(build_reference(F(1, 3), 0), "b", 2, F(1, 3))


def test_tau_equivariance():
    t = F(1, 5)
    lines = build_reference(t, 0)
    for tr in enumerate_triangles(lines, "b", 2, t):
        img = [p.tau() for p in tr.corners]
        assert abs(fukaya.det(img[1] - img[0], img[2] - img[1])) / 2 == tr.lattice_area
        # the rotated (0,1) corner lies on branches 1 and 2
        for ln in lines[1:]:
            assert (ln.level(img[1]) - ln.base_level()).denominator == 1


def test_series_matches_theta():
    for s in (F(0), F(13, 100), F(1, 2)):
        cmp_ = fukaya.compare_with_theta(0, s, 0.2, 3)
        assert cmp_.ok
        assert cmp_.base_area == F(1, 24)
        for c in "abc":
            assert abs(cmp_.normalization[c] - 1) < 1e-12


def test_area_ratios_helper():
    lines = build_reference(0, 0)
    fam = enumerate_triangles(lines, "a", 1, 0)
    assert sorted(area_ratios(fam)) == [1, 25, 49]


def test_json_report():
    lines = build_reference(F(1, 5), F(1, 3))
    fam = enumerate_triangles(lines, "a", 1, F(1, 5))
    rep = fukaya.triangle_report(fam)
    assert [r["lattice_area"] for r in rep] == sorted(
        (r["lattice_area"] for r in rep), key=lambda s: F(s))
    assert set(rep[0]) >= {"corner_class", "k", "lattice_area", "holonomy_exponent"}
    assert all("/" in r["lattice_area"] and "/" in r["holonomy_exponent"] for r in rep)
