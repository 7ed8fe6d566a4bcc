import numpy as np
import pytest

from helpers import ideal_membership_residual, sympy_det_coefficients
from skewmirror import sklyanin
from skewmirror.freealg import NcPoly, commutator, parse
from skewmirror.sklyanin import (
    DegreeCapError,
    SigmaUndefined,
    SklyaninAlgebra,
    mc_relations,
    point_on_cubic,
    point_scheme,
    sigma_step,
    solve_central_cubic,
)


def test_hilbert_generic(generic):
    assert generic.A.hilbert() == [1, 3, 6, 10, 15, 21, 28]
    assert [generic.B.dim(d) for d in range(7)] == [1, 3, 6, 9, 12, 15, 18]


def test_commutative_is_polynomial_ring(commutative_abc):
    A = SklyaninAlgebra.build(commutative_abc, 4)
    # oracle: monomials in three commuting variables
    assert A.hilbert() == [(d + 1) * (d + 2) // 2 for d in range(5)]
    assert A.residual(parse("x y - y x")) < 1e-12
    assert A.residual(parse("x y z - z y x")) < 1e-12


def test_normal_form_consistent_with_ideal(generic):
    A = generic.A
    rng = np.random.default_rng(3)
    for d in (2, 3, 4):
        p = NcPoly.from_vector(rng.normal(size=3**d) + 1j * rng.normal(size=3**d), d)
        diff = p - A.normal_form(p)
        assert ideal_membership_residual(A.relations, diff, d) < 1e-10
        assert set(A.normal_form(p).terms) <= set(A.basis_words(d))


def test_multiplication_matches_free_product(generic):
    A = generic.A
    rng = np.random.default_rng(4)
    u = NcPoly.from_vector(rng.normal(size=9), 2)
    v = NcPoly.from_vector(rng.normal(size=3), 1)
    prod = A.multiply(A.coords(u, 2), 2, A.coords(v, 1), 1)
    assert np.allclose(prod, A.coords(u * v, 3), atol=1e-12)


def test_central_cubic_generic(generic):
    W = generic.W
    assert W.ansatz_nullity == 1 and W.nullity == 1
    assert W.residual <= 1e-10
    # oracle: each commutator lies in the ideal of the relations
    for v in "xyz":
        comm = commutator(W.element, NcPoly.gen(v))
        assert ideal_membership_residual(generic.A.relations, comm, 4) < 1e-10
    assert ideal_membership_residual(generic.A.relations, W.element, 3) > 1e-3


def test_block_dependency(generic):
    # a B1 + b B2 + c B3 = sum v h_v, which is zero in A_3
    assert len(generic.W.trivial) == 1
    a, b, c = generic.abc
    assert generic.W.ratio_distance((a, b, c)) < 1e-10


def test_commutative_central(commutative_abc):
    A = SklyaninAlgebra.build(commutative_abc, 4)
    W = solve_central_cubic(A)
    assert W.nullity == 10
    assert np.allclose(W.ratio, (0, 0, 1), atol=1e-12)


def test_superpotential():
    assert sklyanin.superpotential_check(0.3, -1.1j, 2.0) < 1e-15


def test_point_scheme_against_sympy(generic):
    a, b, c = generic.abc
    ps = point_scheme(a, b, c)
    oracle = sympy_det_coefficients(a, b, c)
    scale = max(abs(v) for v in oracle.values())
    for mon, val in ps.coefficients.items():
        assert abs(val - oracle.get(mon, 0)) <= 1e-12 * scale
    xyz, x3, y3, z3 = ps.cubic
    assert abs(xyz - (a**3 + b**3 + c**3)) <= 1e-12 * scale
    for v in (x3, y3, z3):
        assert abs(v + a * b * c) <= 1e-12 * scale


def test_sigma_orbit(generic):
    ps = point_scheme(*generic.abc)
    p = point_on_cubic(ps)
    for _ in range(20):
        p = sigma_step(ps, p)
        assert ps.projective_residual(p) <= 1e-8


def test_sigma_is_kernel_map(generic):
    ps = point_scheme(*generic.abc)
    p = point_on_cubic(ps)
    q = sigma_step(ps, p)
    assert np.linalg.norm(ps.M(p) @ q) < 1e-10 * np.linalg.norm(ps.M(p))


def test_sigma_errors(generic, commutative_abc):
    with pytest.raises(SigmaUndefined):
        sigma_step(point_scheme(*commutative_abc), [1, 0, 0])
    ps = point_scheme(*generic.abc)
    with pytest.raises(SigmaUndefined):
        sigma_step(ps, [1, 0.3, 0.2])
    assert point_scheme(*commutative_abc).is_degenerate()


def test_degree_cap(generic):
    with pytest.raises(DegreeCapError):
        generic.A.coords(NcPoly({"xxxxxxx": 1}), 7)
    with pytest.raises(ValueError):
        SklyaninAlgebra.build((0, 0, 0), 4)


def test_cache_round_trip(tmp_path, generic):
    a = SklyaninAlgebra.build(generic.abc, 4, cache_dir=tmp_path)
    b = SklyaninAlgebra.build(generic.abc, 4, cache_dir=tmp_path)
    assert len(list(tmp_path.iterdir())) == 1
    for d in range(5):
        assert np.array_equal(a.tables[d].projection, b.tables[d].projection)
        assert np.array_equal(a.tables[d].complement, b.tables[d].complement)
        assert a.basis_words(d) == b.basis_words(d)


def test_relations_are_quadratic():
    for r in mc_relations(1, 2, 3):
        assert r.is_homogeneous(2)
