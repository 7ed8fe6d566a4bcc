import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewmirror.freealg import (
    NcPoly,
    ParseError,
    cyclic_derivative,
    parse,
    superpotential,
    symmetric_blocks,
    to_text,
    word_index,
    words,
)
from skewmirror.sklyanin import mc_relations

word = st.text("xyz", min_size=0, max_size=4)
coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False).filter(lambda z: abs(z) > 1e-3)
poly = st.dictionaries(word, coef, max_size=5).map(NcPoly)
hpoly = st.integers(1, 3).flatmap(
    lambda d: st.dictionaries(st.text("xyz", min_size=d, max_size=d), coef, min_size=1, max_size=5)
).map(NcPoly)


def test_word_order():
    assert words(2)[:4] == ["xx", "xy", "xz", "yx"]
    assert [word_index(w) for w in words(3)] == list(range(27))


@settings(max_examples=60, deadline=None)
@given(poly, poly, poly)
def test_product_associative_and_distributive(p, q, r):
    assert ((p * q) * r).allclose(p * (q * r), 1e-12)
    assert (p * (q + r)).allclose(p * q + p * r, 1e-12)


@settings(max_examples=60, deadline=None)
@given(poly)
def test_text_round_trip(p):
    assert parse(to_text(p)).allclose(p, 1e-15)


def test_parse_examples():
    assert parse("2x y - y*x + z^2") == NcPoly({"xy": 2, "yx": -1, "zz": 1})
    assert parse("(x + y)^2") == NcPoly({"xx": 1, "xy": 1, "yx": 1, "yy": 1})
    assert parse("a*x + i*y", {"a": 3}) == NcPoly({"x": 3, "y": 1j})
    assert to_text(NcPoly({"xxy": -1.5})) == "-1.5*x^2*y"


@pytest.mark.parametrize("text,pos", [("x + ", 4), ("x $ y", 2), ("b*x", 0), ("x^y", 2), ("(x", 2)])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.pos == pos


def test_cyclic_derivatives_give_relations():
    a, b, c = 0.7 + 0.1j, -1.3, 0.25j
    phi = superpotential(a, b, c)
    # relations written out by hand
    hand = {
        "x": NcPoly({"yz": a, "zy": b, "xx": c}),
        "y": NcPoly({"zx": a, "xz": b, "yy": c}),
        "z": NcPoly({"xy": a, "yx": b, "zz": c}),
    }
    for v, rel in zip("xyz", mc_relations(a, b, c)):
        assert cyclic_derivative(phi, v).allclose(hand[v], 1e-15)
        assert rel.allclose(hand[v], 1e-15)


@settings(max_examples=40, deadline=None)
@given(hpoly)
def test_cyclic_derivative_rotation_invariant(p):
    rotated = NcPoly({w[1:] + w[0]: c for w, c in p.items()})
    for v in "xyz":
        assert cyclic_derivative(p, v).allclose(cyclic_derivative(rotated, v), 1e-12)


def test_blocks_are_cyclic():
    for blk in symmetric_blocks():
        for w, c in blk.items():
            assert blk.coeff(w[1:] + w[0]) == c


def test_homogeneity_and_errors():
    p = parse("x y + z")
    assert not p.is_homogeneous()
    assert p.component(2) == NcPoly({"xy": 1})
    with pytest.raises(ValueError):
        cyclic_derivative(p, "x")
    with pytest.raises(ValueError):
        NcPoly({"xw": 1})
    with pytest.raises(TypeError):
        NcPoly() + "x"
