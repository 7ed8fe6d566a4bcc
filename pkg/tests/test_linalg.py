import numpy as np
import pytest

from skewmirror.linalg import AmbiguityError, decide_rank, lstsq, nullspace


def test_rank_cut():
    assert decide_rank(np.array([1.0, 0.5, 1e-14])) == 2
    assert decide_rank(np.array([])) == 0
    assert decide_rank(np.zeros(3)) == 0


def test_ambiguity_band():
    with pytest.raises(AmbiguityError):
        decide_rank(np.array([1.0, 1e-8]))
    with pytest.raises(AmbiguityError):
        decide_rank(np.array([1.0, 5e-10]))


def test_nullspace_and_lstsq():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(4, 2)) @ rng.normal(size=(2, 5))
    ns = nullspace(m)
    assert ns.shape[1] == 3
    assert np.linalg.norm(m @ ns) < 1e-12
    rhs = m @ rng.normal(size=5)
    res = lstsq(m, rhs)
    assert res.relative < 1e-12 and res.nullity == 3
    bad = lstsq(m, rng.normal(size=4))
    assert bad.relative > 1e-3
