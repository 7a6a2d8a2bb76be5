"""Exact linear algebra over the integers and rationals.

Two routes are provided. The exact route works on Python integers and
``Fraction`` objects (fraction-free Bareiss elimination for ranks, rational
row reduction for kernels). The modular route reduces whole batches of small
integer matrices modulo a prime with numpy; it agrees with the exact route
whenever every minor involved is smaller than the prime, see
:func:`modular_is_exact`.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

#: Largest prime below 2**31; products of two residues fit in int64.
PRIME = 2147483647


def _rows(M) -> list[list]:
    return [list(r) for r in M]


def bareiss_rank(M: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination with pivot search."""
    A = [[int(x) for x in r] for r in M]
    if not A or not A[0]:
        return 0
    m, n = len(A), len(A[0])
    prev = 1
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = None
        for i in range(r, m):
            if A[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        for i in range(r + 1, m):
            a = A[i][c]
            row_i = A[i]
            row_r = A[r]
            for j in range(c + 1, n):
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
    return r


def bareiss_rref(M: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int], int]:
    """Fraction-free Gauss-Jordan elimination of an integer matrix.

    Returns ``(R, pivots, D)`` with ``R = D * rref(M)`` on the nonzero rows;
    every entry stays an integer (a minor of ``M``).
    """
    A = [[int(x) for x in r] for r in M]
    if not A:
        return [], [], 1
    m, n = len(A), len(A[0])
    prev = 1
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        row_r = A[r]
        for i in range(m):
            if i == r:
                continue
            row_i = A[i]
            a = row_i[c]
            for j in range(n):
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
        prev = p
        pivots.append(c)
        r += 1
    return A[:r], pivots, prev


def int_nullspace(M: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Primitive integer basis of the right kernel of an integer matrix."""
    if not M:
        return identity(ncols)
    R, pivots, D = bareiss_rref(M)
    pset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pset:
            continue
        v = [0] * ncols
        v[f] = D
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        basis.append(primitive(v))
    return basis


def rref(M) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q. Returns (rows, pivot columns)."""
    A = [[Fraction(x) for x in r] for r in M]
    if not A:
        return [], []
    m, n = len(A), len(A[0])
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank(M) -> int:
    """Exact rank of a rational (or integer) matrix."""
    rows = _rows(M)
    if rows and all(isinstance(x, int) or (hasattr(x, "denominator") and x.denominator == 1)
                    for r in rows for x in r):
        return bareiss_rank([[int(x) for x in r] for r in rows])
    return len(rref(rows)[0])


def primitive(v: Sequence) -> list[int]:
    """Scale a rational vector to integers with content 1 and first nonzero entry positive."""
    v = [Fraction(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    w = [int(x * den) for x in v]
    g = 0
    for x in w:
        g = gcd(g, x)
    if g == 0:
        return w
    w = [x // g for x in w]
    for x in w:
        if x != 0:
            if x < 0:
                w = [-y for y in w]
            break
    return w


def nullspace(M, ncols: int | None = None) -> list[list[int]]:
    """Integer basis of the right kernel of ``M`` (each vector primitive)."""
    rows = _rows(M)
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    if rows and all(isinstance(x, int) for r in rows for x in r):
        return int_nullspace(rows, ncols)
    R, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        basis.append(primitive(v))
    return basis


def column_space_basis(M) -> list[list[Fraction]]:
    """Basis (as row vectors) of the span of the rows of ``M``."""
    return rref(_rows(M))[0]


def in_span(rows, v) -> bool:
    """True iff ``v`` lies in the row span of ``rows``."""
    rows = _rows(rows)
    if not rows:
        return all(x == 0 for x in v)
    return rank(rows + [list(v)]) == rank(rows)


def same_span(A, B) -> bool:
    R1, _ = rref(_rows(A))
    R2, _ = rref(_rows(B))
    return R1 == R2


def matmul(A, B) -> list[list]:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(r, c)) for c in Bt] for r in A]


def transpose(A) -> list[list]:
    return [list(c) for c in zip(*A)]


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def inverse(M) -> list[list[Fraction]]:
    n = len(M)
    aug = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)]
           for i, r in enumerate(M)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [r[n:] for r in R]


# --------------------------------------------------------------------------
# modular batch route

def modular_is_exact(max_row_norm_sq: int, dim: int, p: int = PRIME) -> bool:
    """Whether mod-p ranks and kernel tests are exact for the given matrix family.

    Every minor of a matrix whose rows have squared norm at most
    ``max_row_norm_sq`` and at most ``dim`` columns is bounded by
    ``max_row_norm_sq ** (dim / 2)`` (Hadamard). If that bound is below ``p``
    a nonzero minor cannot vanish mod ``p``.
    """
    return max_row_norm_sq ** dim < p * p


def _inv_mod(a: np.ndarray, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            result = (result * base) % p
        base = (base * base) % p
        e >>= 1
    return result


def batch_rref_mod(A: np.ndarray, p: int = PRIME) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row reduce a stack of matrices modulo ``p``.

    ``A`` has shape (B, k, d). Returns the reduced stack, the ranks (B,), and
    a (B, d) boolean array marking pivot columns.
    """
    A = np.array(A, dtype=np.int64) % p
    B, k, d = A.shape
    rank = np.zeros(B, dtype=np.int64)
    pivcols = np.zeros((B, d), dtype=bool)
    rows = np.arange(k)
    bidx = np.arange(B)
    for c in range(d):
        cand = (A[:, :, c] != 0) & (rows[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        r = np.minimum(rank, k - 1)
        pr = np.where(has, np.argmax(cand, axis=1), r)
        top = A[bidx, r, c:].copy()
        A[bidx, r, c:] = A[bidx, pr, c:]
        A[bidx, pr, c:] = top
        inv = _inv_mod(np.where(has, A[bidx, r, c], 1), p)
        prow = (A[bidx, r, c:] * inv[:, None]) % p
        A[bidx, r, c:] = np.where(has[:, None], prow, A[bidx, r, c:])
        factors = A[:, :, c].copy()
        factors[bidx, r] = 0
        factors[~has] = 0
        sub = A[:, :, c:] - (factors[:, :, None] * prow[:, None, :]) % p
        sub[sub < 0] += p
        A[:, :, c:] = sub
        pivcols[:, c] = has
        rank += has
    return A, rank, pivcols


def batch_kernel_mod(A: np.ndarray, p: int = PRIME) -> tuple[np.ndarray, np.ndarray]:
    """Ranks and, for corank-1 members, a kernel vector mod ``p``.

    Returns ``(rank, kernel)`` where ``kernel`` has shape (B, d) and is zero
    for members whose kernel is not one-dimensional.
    """
    R, rk, pivcols = batch_rref_mod(A, p)
    B, k, d = R.shape
    ker = np.zeros((B, d), dtype=np.int64)
    one = np.nonzero(rk == d - 1)[0]
    if len(one):
        free = np.argmin(pivcols[one], axis=1)
        ker[one, free] = 1
        # rows 0..d-2 hold the pivots in increasing column order
        pc = np.sort(np.where(pivcols[one], np.arange(d)[None, :], d), axis=1)[:, : d - 1]
        vals = (-R[one[:, None], np.arange(d - 1)[None, :], free[:, None]]) % p
        ker[one[:, None], pc] = vals
    return rk, ker
