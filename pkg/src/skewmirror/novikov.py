"""Theta-type coefficient series at a numeric Novikov specialization.

The formal Novikov variable is never carried around: ``q0`` is a plain float
in (0, 1) and every series is a finite sum over ``|k| <= K`` together with a
bound on the discarded tail.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

DEFAULT_K = 6
DEFAULT_TOL = 1e-10

# (exponent offset, extra power of lambda) for the a, b, c series
SERIES = {"a": (1, 0), "b": (5, 2), "c": (3, 1)}


def approx_equal(u: complex, v: complex, tol: float = DEFAULT_TOL) -> bool:
    """Relative comparison of two scalars, scaled by ``max(1, |larger|)``."""
    return abs(u - v) <= tol * max(1.0, abs(u), abs(v))


@dataclass(frozen=True)
class ThetaParams:
    t: float
    s: float
    q0: float
    K: int = DEFAULT_K

    def __post_init__(self):
        if not -1.0 < self.t < 1.0:
            raise ValueError(f"t must lie in (-1, 1), got {self.t}")
        if not 0.0 <= self.s < 1.0:
            raise ValueError(f"s must lie in [0, 1), got {self.s}")
        if not 0.0 < self.q0 < 1.0:
            raise ValueError(f"q0 must lie in (0, 1), got {self.q0}")
        if int(self.K) != self.K or self.K < 0:
            raise ValueError(f"K must be a nonnegative integer, got {self.K}")

    @property
    def tail_bound(self) -> float:
        """Largest single term in the first dropped shell ``|k| = K + 1``.

        Each coefficient changes by at most twice this when K grows by one.
        """
        k = self.K + 1
        e = min((6 * sk + off + 3 * self.t) ** 2 for off, _ in SERIES.values() for sk in (k, -k))
        return self.q0**e

    def to_dict(self) -> dict:
        return {"t": self.t, "s": self.s, "q0": self.q0, "K": self.K}

    @classmethod
    def from_dict(cls, d: dict) -> "ThetaParams":
        return cls(float(d["t"]), float(d["s"]), float(d["q0"]), int(d.get("K", DEFAULT_K)))


class DerivativeConvention(enum.Enum):
    DT = "dt"  # d/dt term-wise, s held fixed
    DS = "ds"  # d/ds term-wise, t held fixed


def lambda_power(params: ThetaParams, r: float) -> complex:
    """``lambda**r`` on the branch ``exp(2 pi i r s)`` with s in [0, 1)."""
    return cmath.exp(2j * math.pi * r * params.s)


def _series_terms(params: ThetaParams, name: str):
    offset, shift = SERIES[name]
    t = params.t
    for k in range(-params.K, params.K + 1):
        e = (6 * k + offset + 3 * t) ** 2
        yield k, 3 * k + shift, e


def theta_coeffs(params: ThetaParams) -> tuple[complex, complex, complex]:
    """The truncated coefficients ``(a, b, c)`` of the Sklyanin relations."""
    pre = lambda_power(params, (1 + 3 * params.t) / 2)
    out = []
    for name in "abc":
        total = 0j
        for _, lam_exp, e in _series_terms(params, name):
            total += lambda_power(params, lam_exp) * params.q0**e
        out.append(pre * total)
    return tuple(out)


def normalized_coeffs(params: ThetaParams) -> tuple[complex, complex, complex]:
    """``(a(u), b(u), c(u))``: the coefficients with the common prefactor
    ``lambda**((1+3t)/2) q0**((1+3t)**2)`` divided out."""
    base = (1 + 3 * params.t) ** 2
    out = []
    for name in "abc":
        total = 0j
        for _, lam_exp, e in _series_terms(params, name):
            total += lambda_power(params, lam_exp) * params.q0 ** (e - base)
        out.append(total)
    return tuple(out)


def theta_prime_coeffs(
    params: ThetaParams, convention: DerivativeConvention | str = DerivativeConvention.DT
) -> tuple[complex, complex, complex]:
    """Term-wise derivatives ``(a', b', c')`` of the normalized series.

    Only the projective ratio is meaningful: the two conventions differ by a
    common nonzero factor because the normalized series depend on (t, s) only
    through one holomorphic combination.
    """
    convention = DerivativeConvention(convention)
    t = params.t
    base = (1 + 3 * t) ** 2
    log_q = math.log(params.q0)
    out = []
    for name in "abc":
        offset, _ = SERIES[name]
        total = 0j
        for k, lam_exp, e in _series_terms(params, name):
            term = lambda_power(params, lam_exp) * params.q0 ** (e - base)
            if convention is DerivativeConvention.DT:
                de = 6 * (6 * k + offset + 3 * t) - 6 * (1 + 3 * t)
                total += term * log_q * de
            else:
                total += term * 2j * math.pi * lam_exp
        out.append(total)
    return tuple(out)


def projective_distance(u, v) -> float:
    """Sine of the angle between two complex lines, in [0, 1]."""
    u = [complex(z) for z in u]
    v = [complex(z) for z in v]
    nu = math.sqrt(sum(abs(z) ** 2 for z in u))
    nv = math.sqrt(sum(abs(z) ** 2 for z in v))
    if nu == 0 or nv == 0:
        return 1.0
    inner = abs(sum(z.conjugate() * w for z, w in zip(u, v))) / (nu * nv)
    return math.sqrt(max(0.0, 1.0 - min(1.0, inner) ** 2))
