"""Independent reference implementations used only by the tests.

Nothing here imports the package's linear algebra; ranks are computed by
plain rational elimination so a bug in the fast paths cannot hide itself.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial


def frac_rank(rows) -> int:
    A = [[Fraction(x) for x in r] for r in rows]
    if not A:
        return 0
    r = 0
    ncols = len(A[0])
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(r + 1, len(A)):
            f = A[i][c] / A[r][c]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    return r


def closure_by_rank(normals, S) -> tuple[int, ...]:
    """j is in cl(S) iff adding normal j does not raise the rank."""
    base = [normals[i] for i in S]
    r = frac_rank(base)
    return tuple(j for j in range(len(normals)) if frac_rank(base + [normals[j]]) == r)


def lines_by_brute_force(normals, dim):
    """All closures of full-rank (dim-1)-subsets, as a set of keys."""
    found = set()
    for S in itertools.combinations(range(len(normals)), dim - 1):
        if frac_rank([normals[i] for i in S]) == dim - 1:
            found.add(closure_by_rank(normals, S))
    return found


def stirling2(n: int, k: int) -> int:
    """Inclusion-exclusion: S(n,k) = (1/k!) sum (-1)^j C(k,j) (k-j)^n."""
    return sum((-1) ** j * comb(k, j) * (k - j) ** n for j in range(k + 1)) // factorial(k)


def hook_length_dimension(shape) -> int:
    shape = list(shape)
    conj = [sum(1 for p in shape if p > j) for j in range(shape[0])] if shape else []
    n = sum(shape)
    prod = 1
    for i, row in enumerate(shape):
        for j in range(row):
            prod *= (row - j - 1) + (conj[j] - i - 1) + 1
    return factorial(n) // prod


def wedge_normal(alpha, n):
    """Boundary of e_alpha as a dict over sorted l-subsets (a second, direct derivation)."""
    alpha = sorted(alpha)
    out = {}
    for k in range(len(alpha)):
        out[tuple(alpha[:k] + alpha[k + 1:])] = (-1) ** k
    return out


def perm_sign(p) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s
