"""Hyperplane arrangements as matroids on their normal vectors.

An arrangement is a list of integer normal vectors in some coordinate space
of dimension ``dim``. A set S of hyperplanes cuts out the subspace annihilated
by the normals in S; its dimension is ``dim - rank(S)`` and its closure is the
set of all normals vanishing on it, i.e. lying in the span of S. Flats are
identified by that closed index set (the closure key).

Batch scans (line enumeration, sampling) reduce mod a prime with numpy. For
the matrix families here every minor is bounded by (l+1)**(dim/2); when that
is below the prime the modular answers are the exact ones, otherwise each
modular hit is re-checked with exact arithmetic.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import linalg
from .rep_core import (
    SetMap,
    SpechtModule,
    ZeroModule,
    ZeroModuleError,
    build_hook_module,
    set_partitions,
)

#: default cap on the number of subsets an exact line census may scan
DEFAULT_BUDGET = int(os.environ.get("SPECHT_FLATS_BUDGET", 10**7))

CHUNK = 20000


class BudgetExceeded(RuntimeError):
    """The requested exact enumeration is larger than the configured budget."""


@dataclass(frozen=True, eq=False)
class Flat:
    """A flat, identified by its closure key (sorted hyperplane indices)."""

    key: tuple[int, ...]
    dimension: int
    stable: bool | None = None
    degenerate: bool = False

    @property
    def size(self) -> int:
        return len(self.key)

    def __eq__(self, other):
        if not isinstance(other, Flat):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __le__(self, other: "Flat") -> bool:
        # subspace containment is reverse inclusion of keys
        return set(other.key) <= set(self.key)


@dataclass(frozen=True, eq=False)
class Arrangement:
    """Central arrangement given by integer normals in Q^dim."""

    dim: int
    normals: tuple[tuple[int, ...], ...]
    labels: tuple[Hashable, ...]
    module: SpechtModule | None = field(default=None, repr=False)
    n: int | None = None
    l: int | None = None

    def __len__(self):
        return len(self.normals)

    @cached_property
    def array(self) -> np.ndarray:
        if not self.normals:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(self.normals, dtype=np.int64)

    @cached_property
    def label_index(self) -> dict:
        return {a: i for i, a in enumerate(self.labels)}

    @cached_property
    def modular_exact(self) -> bool:
        norm = max((sum(x * x for x in v) for v in self.normals), default=1)
        return linalg.modular_is_exact(max(norm, 1), self.dim)

    @property
    def is_hook(self) -> bool:
        return self.module is not None and self.l is not None

    def _check(self, S: Iterable[int]) -> list[int]:
        S = sorted(set(int(i) for i in S))
        if S and (S[0] < 0 or S[-1] >= len(self.normals)):
            raise IndexError(f"hyperplane index out of range: {S}")
        return S

    def rank(self, S: Iterable[int]) -> int:
        S = self._check(S)
        if not S:
            return 0
        return linalg.bareiss_rank([self.normals[i] for i in S])

    def closure(self, S: Iterable[int]) -> Flat:
        S = self._check(S)
        if not S:
            return Flat((), self.dim)
        kernel = linalg.nullspace([self.normals[i] for i in S], ncols=self.dim)
        key = tuple(j for j, v in enumerate(self.normals)
                    if all(sum(a * b for a, b in zip(v, k)) == 0 for k in kernel))
        flat = Flat(key, len(kernel))
        return self._tag(flat)

    def _tag(self, flat: Flat) -> Flat:
        if self.is_hook and flat.dimension > 0:
            return Flat(flat.key, flat.dimension, is_stable(self, flat))
        return flat

    def subspace(self, flat: Flat | Sequence[int]) -> list[list[int]]:
        """Basis of the flat in the dual coordinates used by the normals."""
        key = flat.key if isinstance(flat, Flat) else list(flat)
        if not key:
            return linalg.identity(self.dim)
        return linalg.nullspace([self.normals[i] for i in key], ncols=self.dim)

    def permute_indices(self, sigma: Sequence[int]) -> list[int]:
        """Index permutation induced by a permutation of [n] on hook labels."""
        if not self.is_hook:
            raise ValueError("index action needs a hook arrangement")
        out = []
        for alpha in self.labels:
            out.append(self.label_index[tuple(sorted(sigma[a - 1] for a in alpha))])
        return out

    @cached_property
    def pair_sets(self) -> dict[tuple[int, int], frozenset[int]]:
        """For each pair {i,j}, the indices of hyperplanes whose label contains it."""
        if not self.is_hook:
            raise ValueError("pair sets need a hook arrangement")
        out = {}
        for i, j in itertools.combinations(range(1, self.n + 1), 2):
            out[(i, j)] = frozenset(k for k, a in enumerate(self.labels) if i in a and j in a)
        return out


def build_arrangement(n: int, l: int) -> Arrangement:
    """Intrinsic arrangement of S^{(n-l, 1^l)}: one hyperplane per (l+1)-subset of [n]."""
    if n < l + 2:
        mod = build_hook_module(n, l)
        if isinstance(mod, ZeroModule):
            raise ZeroModuleError(f"S^(1^{l})_{n} is the zero module")
        raise ValueError(f"need n >= l + 2 for a hook arrangement, got n={n}, l={l}")
    mod = build_hook_module(n, l)
    labels = tuple(itertools.combinations(range(1, n + 1), l + 1))
    normals = tuple(tuple(mod.normal(a)) for a in labels)
    return Arrangement(mod.dimension, normals, labels, mod, n, l)


def from_normals(normals: Sequence[Sequence[int]], dim: int | None = None,
                 labels: Sequence[Hashable] | None = None) -> Arrangement:
    normals = tuple(tuple(int(x) for x in v) for v in normals)
    if dim is None:
        dim = len(normals[0])
    labels = tuple(labels) if labels is not None else tuple(range(len(normals)))
    return Arrangement(dim, normals, labels)


# --------------------------------------------------------------------------
# stability and special flats


def is_stable(arr: Arrangement, F: Flat) -> bool:
    """Contained in the fixed space of some transposition (ij).

    Combinatorially: some pair {i,j} has every hyperplane label containing it in the key.
    """
    key = set(F.key)
    return any(s <= key for s in arr.pair_sets.values())


def is_stable_linear(arr: Arrangement, F: Flat) -> bool:
    """Oracle for :func:`is_stable` using the module's action and invariant pairing."""
    mod = arr.module
    G = mod.gram
    rows = [[sum(arr.normals[a][i] * G[i][j] for i in range(arr.dim)) for j in range(arr.dim)]
            for a in F.key]
    basis = linalg.nullspace(rows, ncols=arr.dim) if rows else linalg.identity(arr.dim)
    for i, j in itertools.combinations(range(1, arr.n + 1), 2):
        sigma = list(range(1, arr.n + 1))
        sigma[i - 1], sigma[j - 1] = j, i
        M = mod.action(sigma)
        if all(M(v) == list(v) for v in basis):
            return True
    return False


def special_flat(arr: Arrangement, f: SetMap) -> Flat:
    """F_f: the intersection of all H_alpha with |f(alpha)| < l+1."""
    if not f.is_surjective or f.m != arr.n:
        raise ValueError("special flats need a surjection from [n]")
    gens = [k for k, a in enumerate(arr.labels) if len({f(x) for x in a}) < arr.l + 1]
    flat = arr.closure(gens)
    if f.n < arr.l + 1:
        return Flat(flat.key, max(0, flat.dimension), flat.stable, degenerate=True)
    return flat


def special_flats(arr: Arrangement, m: int) -> list[Flat]:
    """Special flats of all fiber partitions [n] ->> [m], one per partition."""
    out = []
    for blocks in set_partitions(range(1, arr.n + 1), m):
        out.append(special_flat(arr, SetMap.from_fibers(blocks)))
    return out


# --------------------------------------------------------------------------
# contraction and restriction


@dataclass(frozen=True, eq=False)
class Contraction:
    """A^F, realized by restricting the normals to F.

    ``arrangement.labels[k]`` is the tuple of original hyperplane indices
    that cut out the k-th hyperplane of the contraction.
    """

    parent: Arrangement
    flat: Flat
    arrangement: Arrangement

    def lift(self, key: Iterable[int]) -> Flat:
        idx = set(self.flat.key)
        for k in key:
            idx.update(self.arrangement.labels[k])
        return self.parent.closure(idx)


def contraction(arr: Arrangement, F: Flat) -> Contraction:
    Z = arr.subspace(F)
    if not Z:
        return Contraction(arr, F, Arrangement(0, (), ()))
    if not F.key:
        return Contraction(arr, F, Arrangement(arr.dim, arr.normals, tuple((i,) for i in range(len(arr)))))
    groups: dict[tuple[int, ...], list[int]] = {}
    for j, v in enumerate(arr.normals):
        w = [sum(a * b for a, b in zip(v, z)) for z in Z]
        if any(w):
            groups.setdefault(tuple(linalg.primitive(w)), []).append(j)
    normals = tuple(groups)
    labels = tuple(tuple(g) for g in groups.values())
    return Contraction(arr, F, Arrangement(len(Z), normals, labels))


def restriction(arr: Arrangement, F: Flat) -> Arrangement:
    """A_F on V/F: the hyperplanes containing F, in coordinates of their span."""
    if not F.key:
        return Arrangement(0, (), ())
    rows = [arr.normals[i] for i in F.key]
    _, pivots = linalg.rref(rows)
    normals = tuple(tuple(r[c] for c in pivots) for r in rows)
    return Arrangement(len(pivots), normals, tuple(F.key))


# --------------------------------------------------------------------------
# lattices


@dataclass
class FlatLattice:
    arrangement: Arrangement
    by_rank: dict[int, list[Flat]]
    complete: bool = True

    @property
    def flats(self) -> list[Flat]:
        return [F for r in sorted(self.by_rank) for F in self.by_rank[r]]

    def __len__(self):
        return sum(len(v) for v in self.by_rank.values())

    @property
    def atoms(self) -> list[Flat]:
        return self.by_rank.get(1, [])

    def atom_sets(self) -> dict[frozenset[int], int]:
        """Each flat as the set of atoms below it, mapped to its rank."""
        atoms = self.atoms
        out = {}
        for r, flats in self.by_rank.items():
            for F in flats:
                key = set(F.key)
                out[frozenset(i for i, a in enumerate(atoms) if set(a.key) <= key)] = r
        return out


def enumerate_flats(arr: Arrangement, max_flats: int = 200000) -> FlatLattice:
    """All flats, grown rank by rank from the full space."""
    top = arr.closure([])
    by_rank = {0: [top]}
    seen = {top.key}
    r = 0
    while by_rank[r]:
        nxt = []
        for F in by_rank[r]:
            inside = set(F.key)
            for h in range(len(arr)):
                if h in inside:
                    continue
                G = arr.closure(inside | {h})
                if G.key not in seen:
                    seen.add(G.key)
                    nxt.append(G)
                    if len(seen) > max_flats:
                        raise BudgetExceeded(f"more than {max_flats} flats")
        r += 1
        by_rank[r] = sorted(nxt, key=lambda F: F.key)
    del by_rank[r]
    return FlatLattice(arr, by_rank)


def _profile(L: FlatLattice):
    sets = L.atom_sets()
    covers = {}
    for S, r in sets.items():
        up = sum(1 for T, q in sets.items() if q == r + 1 and S < T)
        covers.setdefault(r, []).append((len(S), up))
    return sorted((r, sorted(v)) for r, v in covers.items())


def lattice_isomorphic(a: FlatLattice, b: FlatLattice) -> bool:
    """Rank-preserving order isomorphism test via certificates and atom backtracking."""
    if not (a.complete and b.complete):
        raise ValueError("lattice_isomorphic needs fully enumerated lattices")
    if _profile(a) != _profile(b):
        return False
    sa, sb = a.atom_sets(), b.atom_sets()
    k = len(a.atoms)
    target = set(sb)
    rank2_a = [S for S, r in sa.items() if r == 2]
    rank2_b = {S for S, r in sb.items() if r == 2}
    line_a = {}
    for S in rank2_a:
        for x in S:
            for y in S:
                line_a[(x, y)] = S

    def consistent(pi: dict[int, int]) -> bool:
        for (x, y), S in line_a.items():
            if x in pi and y in pi and x < y:
                image = {pi[z] for z in S if z in pi}
                if not any(image <= T and pi[x] in T and pi[y] in T for T in rank2_b):
                    return False
        return True

    def rec(i: int, pi: dict[int, int], used: set[int]) -> bool:
        if i == k:
            return {frozenset(pi[x] for x in S) for S in sa} == target
        for y in range(k):
            if y in used:
                continue
            pi[i] = y
            if consistent(pi):
                used.add(y)
                if rec(i + 1, pi, used):
                    return True
                used.discard(y)
            del pi[i]
        return False

    return rec(0, {}, set())


# --------------------------------------------------------------------------
# line enumeration


def _keys_mod(A: np.ndarray, subsets: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Accepted mask and packed closure keys for a batch of (dim-1)-subsets."""
    rk, ker = linalg.batch_kernel_mod(A[subsets], linalg.PRIME)
    ok = rk == dim - 1
    vals = (A @ ker[ok].T) % linalg.PRIME  # (H, accepted)
    zero = (vals == 0).T
    return ok, np.packbits(zero, axis=1)


def _scan(args) -> set[bytes]:
    A, dim, subsets = args
    ok, packed = _keys_mod(A, subsets, dim)
    return {row.tobytes() for row in packed}


def _unpack(b: bytes, H: int) -> tuple[int, ...]:
    bits = np.unpackbits(np.frombuffer(b, dtype=np.uint8))[:H]
    return tuple(int(i) for i in np.nonzero(bits)[0])


def line_subset_count(arr: Arrangement) -> int:
    return comb(len(arr), arr.dim - 1)


def _combination_chunks(H: int, k: int, size: int):
    it = itertools.combinations(range(H), k)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64)


def enumerate_lines(arr: Arrangement, budget: int | None = None, workers: int = 1,
                    verify: bool = True) -> list[Flat]:
    """Every dimension-1 flat, as closures of the (dim-1)-subsets of full rank.

    The result is sorted by (size, key) and does not depend on ``workers``.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    d = arr.dim
    if d < 2:
        raise ValueError("lines need a module of dimension at least 2")
    total = line_subset_count(arr)
    if total > budget:
        raise BudgetExceeded(
            f"exact line census needs C({len(arr)}, {d - 1}) = {total} rank computations "
            f"(budget {budget}); use the `sample` command instead")
    H = len(arr)
    A = arr.array
    keys: set[bytes] = set()
    if arr.modular_exact:
        jobs = ((A, d, c) for c in _combination_chunks(H, d - 1, CHUNK))
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                for part in pool.map(_scan, jobs):
                    keys |= part
        else:
            for job in jobs:
                keys |= _scan(job)
        found = {_unpack(k, H) for k in keys}
    else:
        found = set()
        for S in itertools.combinations(range(H), d - 1):
            if arr.rank(S) == d - 1:
                found.add(arr.closure(S).key)
    lines = [arr._tag(Flat(key, 1)) for key in found]
    if verify:
        for F in lines:
            G = arr.closure(F.key)
            if G.key != F.key or G.dimension != 1:
                raise AssertionError(f"line {F.key} failed exact re-validation")
    return sorted(lines, key=lambda F: (F.size, F.key))


def enumerate_rank1_flats(arr: Arrangement) -> list[Flat]:
    flats = {arr.closure([h]) for h in range(len(arr))}
    return sorted(flats, key=lambda F: F.key)
