"""Rank decisions with an explicit ambiguity band.

A wrong rank invalidates everything downstream, so singular values that land
too close to the cut raise instead of being silently classified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_REL = 1e-8
AMBIGUITY_FACTOR = 1e2


class AmbiguityError(ArithmeticError):
    """A singular value fell inside the ambiguity band around the rank cut."""

    def __init__(self, msg: str, sigma: float, cut: float):
        super().__init__(f"{msg}: singular value {sigma:.3e} within 1e2 of cut {cut:.3e}")
        self.sigma = sigma
        self.cut = cut


def decide_rank(sv: np.ndarray, scale: float | None = None, what: str = "rank") -> int:
    """Number of singular values above ``RANK_REL * scale``.

    ``scale`` defaults to the largest singular value.  Raises AmbiguityError
    if a value sits within a factor 1e2 of the cut on either side.
    """
    sv = np.asarray(sv, dtype=float)
    if sv.size == 0:
        return 0
    if scale is None:
        scale = float(sv.max())
    if scale == 0.0:
        return 0
    cut = RANK_REL * scale
    for s in sv:
        if cut / AMBIGUITY_FACTOR < s < cut * AMBIGUITY_FACTOR:
            raise AmbiguityError(what, float(s), cut)
    return int(np.count_nonzero(sv > cut))


def rank(mat: np.ndarray, scale: float | None = None, what: str = "rank") -> int:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    return decide_rank(np.linalg.svd(mat, compute_uv=False), scale, what)


def nullspace(mat: np.ndarray, scale: float | None = None, what: str = "nullspace") -> np.ndarray:
    """Orthonormal basis (columns) of the numerical right kernel."""
    mat = np.asarray(mat, dtype=complex)
    n = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, sv, vh = np.linalg.svd(mat)
    r = decide_rank(sv, scale, what)
    return vh[r:].conj().T


@dataclass
class LstsqResult:
    x: np.ndarray
    residual: float  # ||A x - b||
    relative: float  # residual / ||b||
    rank: int
    nullity: int


def lstsq(mat: np.ndarray, rhs: np.ndarray, what: str = "lstsq") -> LstsqResult:
    """Minimal-norm least-squares solution with the residual floor reported.

    The rank used for the pseudo-inverse follows ``decide_rank``; the nullity
    is the dimension of the affine solution space when consistent.
    """
    mat = np.asarray(mat, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    n = mat.shape[1]
    if n == 0:
        res = float(np.linalg.norm(rhs))
        nb = float(np.linalg.norm(rhs))
        return LstsqResult(np.zeros(0, dtype=complex), res, res / nb if nb else 0.0, 0, 0)
    u, sv, vh = np.linalg.svd(mat, full_matrices=False)
    r = decide_rank(sv, None, what)
    coef = (u[:, :r].conj().T @ rhs) / sv[:r]
    x = vh[:r].conj().T @ coef
    res = float(np.linalg.norm(mat @ x - rhs))
    nb = float(np.linalg.norm(rhs))
    return LstsqResult(x, res, res / nb if nb else res, r, n - r)
