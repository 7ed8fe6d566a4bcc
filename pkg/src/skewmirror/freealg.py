"""Noncommutative polynomials in x, y, z.

Words are plain strings over ``"xyz"``; the empty string is the unit.  The
canonical order on words is degree first, then lexicographic with x < y < z,
which for fixed degree is the base-3 order used for vector indexing.
"""

from __future__ import annotations

import re
from itertools import product
from typing import Mapping

import numpy as np

GENERATORS = "xyz"
PRUNE_REL = 1e-14


def word_key(w: str):
    return (len(w), w)


def words(d: int) -> list[str]:
    """All words of degree d in canonical order."""
    return ["".join(p) for p in product(GENERATORS, repeat=d)]


def word_index(w: str) -> int:
    i = 0
    for ch in w:
        i = 3 * i + GENERATORS.index(ch)
    return i


class NcPoly:
    """Element of the free algebra over the complex numbers.

    Immutable; coefficients below ``PRUNE_REL * max|coeff|`` are dropped on
    construction.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[str, complex] | None = None, prune: bool = True):
        clean: dict[str, complex] = {}
        for w, c in (terms or {}).items():
            if any(ch not in GENERATORS for ch in w):
                raise ValueError(f"bad word {w!r}")
            c = complex(c)
            if c != 0:
                clean[w] = clean.get(w, 0) + c
        if clean:
            big = max(abs(c) for c in clean.values())
            cut = PRUNE_REL * big if prune else 0.0
            clean = {w: c for w, c in clean.items() if abs(c) > cut}
        self._terms = dict(sorted(clean.items(), key=lambda kv: word_key(kv[0])))

    @classmethod
    def gen(cls, v: str) -> "NcPoly":
        return cls({v: 1})

    @classmethod
    def scalar(cls, c: complex) -> "NcPoly":
        return cls({"": c})

    @classmethod
    def from_vector(cls, vec, d: int) -> "NcPoly":
        """Homogeneous polynomial from coefficients indexed by ``words(d)``."""
        return cls({w: c for w, c in zip(words(d), vec)})

    @property
    def terms(self) -> dict[str, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, w: str) -> complex:
        return self._terms.get(w, 0j)

    def is_zero(self) -> bool:
        return not self._terms

    def degrees(self) -> set[int]:
        return {len(w) for w in self._terms}

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = self.degrees()
        if not degs:
            return True
        return len(degs) == 1 and (d is None or d in degs)

    def degree(self) -> int:
        """Degree of a nonzero homogeneous polynomial."""
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError("not a nonzero homogeneous polynomial")
        return degs.pop()

    def component(self, d: int) -> "NcPoly":
        return NcPoly({w: c for w, c in self._terms.items() if len(w) == d}, prune=False)

    def to_vector(self, d: int) -> np.ndarray:
        vec = np.zeros(3**d, dtype=complex)
        for w, c in self._terms.items():
            if len(w) == d:
                vec[word_index(w)] += c
        return vec

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self._terms.values())))

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0) + c
        return NcPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return NcPoly({w: -c for w, c in self._terms.items()}, prune=False)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return NcPoly({w: c * other for w, c in self._terms.items()})
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return NcPoly({w: other * c for w, c in self._terms.items()})
        return mul(_coerce(other), self)

    def __pow__(self, n: int):
        out = NcPoly.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, NcPoly):
            try:
                other = _coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def allclose(self, other, tol: float = 1e-12) -> bool:
        diff = self - _coerce(other)
        scale = max(1.0, self.norm(), _coerce(other).norm())
        return diff.norm() <= tol * scale

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"NcPoly({to_text(self)!r})"


def _coerce(p) -> NcPoly:
    if isinstance(p, NcPoly):
        return p
    if isinstance(p, (int, float, complex, np.number)):
        return NcPoly.scalar(p)
    raise TypeError(f"cannot coerce {type(p).__name__} to NcPoly")


def mul(p: NcPoly, q: NcPoly) -> NcPoly:
    """Concatenation product, extended bilinearly."""
    out: dict[str, complex] = {}
    for u, a in p.items():
        for v, b in q.items():
            w = u + v
            out[w] = out.get(w, 0) + a * b
    return NcPoly(out)


def cyclic_derivative(p: NcPoly, v: str) -> NcPoly:
    """Cyclic partial derivative: each occurrence ``u v w`` contributes ``w u``."""
    if v not in GENERATORS:
        raise ValueError(f"unknown generator {v!r}")
    if p.is_zero():
        return NcPoly()
    if not p.is_homogeneous() or p.degree() < 1:
        raise ValueError("cyclic derivative needs a homogeneous input of degree >= 1")
    out: dict[str, complex] = {}
    for w, c in p.items():
        for i, ch in enumerate(w):
            if ch == v:
                r = w[i + 1 :] + w[:i]
                out[r] = out.get(r, 0) + c
    return NcPoly(out)


def commutator(p: NcPoly, q: NcPoly) -> NcPoly:
    return p * q - q * p


# --- text format -----------------------------------------------------------


def _fmt_real(r: float) -> str:
    return format(r, ".17g")


def _fmt_word(w: str) -> str:
    parts = []
    for m in re.finditer(r"(x+|y+|z+)", w):
        run = m.group(0)
        parts.append(run[0] if len(run) == 1 else f"{run[0]}^{len(run)}")
    return "*".join(parts)


def to_text(p: NcPoly) -> str:
    """Canonical text: words in canonical order, 17 significant digits."""
    if p.is_zero():
        return "0"
    out = []
    for n, (w, c) in enumerate(p.items()):
        if c.imag == 0:
            r = c.real
            sign = "-" if r < 0 or (r == 0 and str(r).startswith("-")) else "+"
            coef = _fmt_real(abs(r))
        else:
            sign = "+"
            coef = f"({_fmt_real(c.real)}{'-' if c.imag < 0 else '+'}{_fmt_real(abs(c.imag))}i)"
        body = coef if not w else f"{coef}*{_fmt_word(w)}"
        if n == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<sym>[xyzabci])|(?P<op>[-+*^()]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, params: Mapping[str, complex]):
        self.toks = _tokenize(text)
        self.i = 0
        self.params = params

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, got {val or 'end of input'!r}", pos)

    def expr(self) -> NcPoly:
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        out = self.term() * sign
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            t = self.term()
            out = out + t if op == "+" else out - t
        return out

    def _starts_factor(self, tok) -> bool:
        kind, val, _ = tok
        return kind in ("num", "sym") or (kind == "op" and val == "(")

    def term(self) -> NcPoly:
        out = self.factor()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                out = out * self.factor()
            elif self._starts_factor(tok):
                out = out * self.factor()
            else:
                return out

    def factor(self) -> NcPoly:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be a nonnegative integer", pos)
            base = base ** int(val)
        return base

    def atom(self) -> NcPoly:
        kind, val, pos = self.take()
        if kind == "num":
            return NcPoly.scalar(float(val))
        if kind == "sym":
            if val in GENERATORS:
                return NcPoly.gen(val)
            if val == "i":
                return NcPoly.scalar(1j)
            if val not in self.params:
                raise ParseError(f"unbound parameter {val!r}", pos)
            return NcPoly.scalar(self.params[val])
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str, params: Mapping[str, complex] | None = None) -> NcPoly:
    """Parse the expression grammar: sums of scalar-times-word terms.

    Juxtaposition and ``*`` are the noncommutative product, ``^`` takes a
    nonnegative integer power, ``i`` is the imaginary unit and ``a``, ``b``,
    ``c`` must be bound in ``params``.
    """
    p = _Parser(text, params or {})
    if p.peek()[0] == "end":
        raise ParseError("empty expression", 0)
    out = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", pos)
    return out


def superpotential(a: complex, b: complex, c: complex) -> NcPoly:
    """``a xyz + b xzy + (c/3)(x^3 + y^3 + z^3)``."""
    return NcPoly({"xyz": a, "xzy": b, "xxx": c / 3, "yyy": c / 3, "zzz": c / 3})


def symmetric_blocks() -> tuple[NcPoly, NcPoly, NcPoly]:
    """The three cyclically symmetric cubic blocks spanning the potential ansatz."""
    return (
        NcPoly({"xyz": 1, "zxy": 1, "yzx": 1}),
        NcPoly({"zyx": 1, "xzy": 1, "yxz": 1}),
        NcPoly({"xxx": 1, "yyy": 1, "zzz": 1}),
    )
