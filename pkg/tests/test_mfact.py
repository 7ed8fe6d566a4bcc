import numpy as np
import pytest

from helpers import ideal_membership_residual
from skewmirror import mfact
from skewmirror.acceptance import Pipeline, perturbed_relations
from skewmirror.freealg import NcPoly, parse
from skewmirror.mfact import GradedMatrix, TwistedFreeModule
from skewmirror.novikov import ThetaParams
from skewmirror.sklyanin import SklyaninAlgebra


def test_graded_matrix_basics():
    x = parse("x")
    m = GradedMatrix((0,), (1, 2), [[x], [x * x]])
    assert m.entry_degree(0, 0) == 1 and m.entry_degree(1, 0) == 2
    assert TwistedFreeModule((-1, -2)).twists == (1, 2)
    back = GradedMatrix.from_json(m.to_json())
    assert back.to_json() == m.to_json()
    with pytest.raises(ValueError):
        GradedMatrix((0,), (1,), [[x * x]])
    with pytest.raises(ValueError):
        GradedMatrix((0,), (1,), [[NcPoly.scalar(1)]])
    with pytest.raises(ValueError):
        m @ GradedMatrix((0,), (5,), [[NcPoly()]])


def test_koszul_complex(generic):
    s0 = generic.s0
    assert max(s0.residuals.values()) < 1e-12


def test_homotopy(generic):
    s1 = generic.s1
    assert s1.residual < 1e-9
    assert s1.general_residual < 1e-9
    # s2 cubic before the change of basis, removed after it
    assert s1.s2_norm > 1e-3


def _free_residual(A, mf):
    """Oracle: entries of D0 D1 - W I checked for ideal membership in the free algebra."""
    W = mf.W.element
    prod = mf.D0 @ mf.D1
    worst = 0.0
    for i in range(4):
        for j in range(4):
            e = prod.entries[i][j] - (W if i == j else NcPoly())
            if not e.is_zero():
                worst = max(worst, ideal_membership_residual(A.relations, e, 3) * e.norm() / W.norm())
    return worst


@pytest.mark.parametrize("name", ["L", "Lprime"])
def test_matrix_factorizations(generic, name):
    mf = getattr(generic, name)
    res = mfact.verify_mf(generic.A, mf)
    assert max(res.values()) <= 1e-9
    assert mf.pattern_ok
    assert _free_residual(generic.A, mf) <= 1e-9
    twists = mfact.MF_L_TWISTS if name == "L" else mfact.MF_LPRIME_TWISTS
    assert (mf.D1.source.twists, mf.D1.target.twists, mf.D0.target.twists) == tuple(
        tuple(-e for e in t) for t in twists
    )


def test_linear_entries_fixed(generic):
    d1 = generic.L.D1.entries
    assert d1[0][1] == parse("-x") and d1[2][0] == parse("-y") and d1[0][0].is_zero()
    a, b, c = generic.abc
    assert generic.L.D0.entries[1][1].allclose(NcPoly({"x": c}))
    assert generic.L.D0.entries[1][2].allclose(NcPoly({"z": b}))
    assert generic.L.D0.entries[1][3].allclose(NcPoly({"y": a}))


def test_commutative_matches_closed_form():
    pipe = Pipeline(ThetaParams(0, 0.5, 0.3, 6), degree_cap=4)
    Qp = pipe.s1.Qp.entries
    classical = mfact.classical_Qprime(pipe.W, pipe.abc[0])
    worst = max(pipe.A.residual(Qp[i][j] - classical[i][j]) for i in range(3) for j in range(3))
    assert worst < 1e-10


@pytest.mark.parametrize("name,src,tgt", [
    ("p", "L", "Lprime"), ("q", "L", "Lprime"), ("r", "L", "Lprime"),
    ("p'", "Lprime", "L"), ("q'", "Lprime", "L"), ("r'", "Lprime", "L"),
])
def test_chain_maps(generic, name, src, tgt):
    deg, fix0, fix1 = mfact.morphism_pattern(name)
    cm = mfact.solve_chain_map(generic.A, getattr(generic, src), getattr(generic, tgt), (fix0, fix1), deg, name)
    assert cm.residual < 1e-9
    assert cm.nontrivial
    assert cm.solution_dim >= 1


def test_wrong_pattern_is_inconsistent(generic):
    # f0 from p with f1 from q is not a chain map
    deg, fix0, _ = mfact.morphism_pattern("p")
    _, _, fix1 = mfact.morphism_pattern("q")
    cm = mfact.solve_chain_map(generic.A, generic.L, generic.Lprime, (fix0, fix1), deg, "bad")
    assert cm.residual > 1e-6


def test_resolution_of_k(generic):
    res = mfact.resolve_k_over_B(generic.B, generic.s0, generic.s1, depth=6, max_degree=5)
    assert max(res.composite_residuals) < 1e-10
    assert {k: v for k, v in res.homology.items() if v} == {(0, 0): 1}


def test_cone(generic):
    rep = mfact.cone_phi(generic.B, generic.s0, generic.s1)
    assert rep.row_residuals[0] >= 1e-3
    assert max(rep.row_residuals[1:]) <= 1e-9
    assert rep.chain_residual < 1e-9


def test_resolution_of_B1(generic):
    rep = mfact.resolve_B1(generic.B, generic.s0, generic.s1)
    assert rep.augmentation_ranks == {0: 3, 1: 6, 2: 9, 3: 12}
    assert not any(rep.complex.homology.values())


def test_fault_injection_breaks_factorization(generic):
    rels = perturbed_relations(generic.abc, "X")
    Ap = SklyaninAlgebra.build(generic.abc, 4, relations=rels)
    res = mfact.verify_mf(Ap, generic.L)
    assert max(res.values()) > 1e-6
    with pytest.raises(mfact.VerificationError):
        mfact.verify_mf(Ap, generic.L, tol=1e-9)
