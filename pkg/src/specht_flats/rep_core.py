"""Partitions, tabloids and explicit Specht modules over the rationals.

Hook modules S^{(n-l, 1^l)} are realized inside the l-th exterior power of
Q^n. The working basis is

    b_J = (e_{j_1} - e_1) ^ ... ^ (e_{j_l} - e_1),   J an l-subset of {2..n},

which equals the simplicial boundary of e_{1} ^ e_J. A vector of the module is
stored by its coordinates in this basis; since the only term of b_J free of
the index 1 is e_J, coordinates are read off an exterior-power vector by
keeping its 1-free monomials.

Everything here is immutable once built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb, prod
from typing import Iterable, Sequence

from . import linalg

Wedge = dict  # sorted index tuple -> coefficient


class ZeroModuleError(ValueError):
    """Raised where a nonzero module is required but n < |lambda| + lambda_1."""


# --------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def conjugate(self) -> "Partition":
        return conjugate(self)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


def conjugate(lam: Partition | Sequence[int]) -> Partition:
    parts = tuple(lam)
    if not parts:
        return Partition(())
    return Partition(tuple(sum(1 for p in parts if p > i) for i in range(parts[0])))


@dataclass(frozen=True)
class ZeroModule:
    """The convention S^lambda_n = 0 for n < |lambda| + lambda_1."""

    base: Partition
    n: int
    dimension: int = 0
    is_zero: bool = True


@dataclass(frozen=True)
class PaddedPartition:
    base: Partition
    n: int
    is_zero: bool = False

    def __post_init__(self):
        lam = self.base
        first = lam[0] if len(lam) else 0
        if self.n < lam.size + first:
            raise ZeroModuleError(f"{lam}[{self.n}] is not a partition")

    @property
    def parts(self) -> Partition:
        return Partition((self.n - self.base.size,) + self.base.parts)


def pad(lam: Partition | Sequence[int], n: int) -> PaddedPartition | ZeroModule:
    """lambda[n] = (n - |lambda|, lambda), or a ZeroModule marker when n is too small."""
    lam = lam if isinstance(lam, Partition) else Partition(tuple(lam))
    first = lam[0] if len(lam) else 0
    if n < lam.size + first:
        return ZeroModule(lam, n)
    return PaddedPartition(lam, n)


# --------------------------------------------------------------------------
# set maps


@dataclass(frozen=True)
class SetMap:
    """A map [m] -> [n] given by its 1-based value table."""

    kind: str
    m: int
    n: int
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.m:
            raise ValueError("value table length must equal the source size")
        if any(not 1 <= v <= self.n for v in vals):
            raise ValueError(f"values must lie in [1, {self.n}]")
        inj = len(set(vals)) == len(vals)
        surj = set(vals) == set(range(1, self.n + 1))
        ok = {"injection": inj, "surjection": surj, "bijection": inj and surj}
        if self.kind not in ok:
            raise ValueError(f"unknown kind {self.kind!r}")
        if not ok[self.kind]:
            raise ValueError(f"{vals} is not a {self.kind} [{self.m}] -> [{self.n}]")

    @classmethod
    def injection(cls, values: Sequence[int], n: int) -> "SetMap":
        return cls("injection", len(values), n, tuple(values))

    @classmethod
    def surjection(cls, values: Sequence[int], n: int | None = None) -> "SetMap":
        n = max(values, default=0) if n is None else n
        return cls("surjection", len(values), n, tuple(values))

    @classmethod
    def permutation(cls, values: Sequence[int]) -> "SetMap":
        return cls("bijection", len(values), len(values), tuple(values))

    @classmethod
    def from_fibers(cls, blocks: Iterable[Iterable[int]], m: int | None = None) -> "SetMap":
        """Surjection whose fibers are ``blocks``; blocks are labelled by their minima."""
        blocks = sorted((sorted(b) for b in blocks), key=lambda b: b[0])
        size = sum(len(b) for b in blocks)
        vals = [0] * size
        for label, b in enumerate(blocks, 1):
            for x in b:
                vals[x - 1] = label
        return cls.surjection(vals, len(blocks) if m is None else m)

    def __call__(self, i: int) -> int:
        return self.values[i - 1]

    @property
    def is_injective(self) -> bool:
        return len(set(self.values)) == self.m

    @property
    def is_surjective(self) -> bool:
        return len(set(self.values)) == self.n

    def fibers(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, v in enumerate(self.values, 1):
            out[v - 1].append(i)
        return [tuple(b) for b in out]

    def compose(self, inner: "SetMap") -> "SetMap":
        """``self`` after ``inner``."""
        if inner.n != self.m:
            raise ValueError("maps are not composable")
        vals = tuple(self(inner(i)) for i in range(1, inner.m + 1))
        kind = "injection" if len(set(vals)) == len(vals) else "surjection"
        if kind == "injection" and len(set(vals)) == self.n:
            kind = "bijection"
        if kind == "surjection" and set(vals) != set(range(1, self.n + 1)):
            raise ValueError("composite is neither injective nor surjective")
        return SetMap(kind, inner.m, self.n, vals)

    def sections(self) -> list["SetMap"]:
        """All injections g with self o g = id (requires a surjection)."""
        if not self.is_surjective:
            raise ValueError("only surjections have sections")
        return [SetMap.injection(choice, self.m) for choice in itertools.product(*self.fibers())]


def set_partitions(elements: Sequence[int], k: int | None = None):
    """Yield set partitions of ``elements`` (as tuples of tuples), optionally with k blocks."""
    elements = list(elements)
    if not elements:
        if k in (None, 0):
            yield ()
        return
    first, rest = elements[0], elements[1:]
    for sub in set_partitions(rest, None):
        if k is not None and len(sub) not in (k, k - 1):
            continue
        if k is None or len(sub) == k - 1:
            yield ((first,),) + sub
        if k is None or len(sub) == k:
            for i in range(len(sub)):
                yield sub[:i] + ((first,) + sub[i],) + sub[i + 1:]


def surjections(n: int, m: int):
    """All surjections [n] -> [m]."""
    for vals in itertools.product(range(1, m + 1), repeat=n):
        if len(set(vals)) == m:
            yield SetMap.surjection(vals, m)


# --------------------------------------------------------------------------
# exterior-power helpers


def sort_sign(seq: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0, ()
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(sorted(seq))


def boundary(alpha: Sequence[int]) -> Wedge:
    """Simplicial boundary of e_{a_0} ^ ... ^ e_{a_l} (alpha taken in the given order)."""
    out: Wedge = {}
    for k in range(len(alpha)):
        s, I = sort_sign(alpha[:k] + tuple(alpha[k + 1:]))
        c = (-1) ** k * s
        out[I] = out.get(I, 0) + c
    return {I: c for I, c in out.items() if c}


def relabel(vec: Wedge, values: Sequence[int]) -> Wedge:
    """Push a wedge vector along the index map i -> values[i-1]; repeats vanish."""
    out: Wedge = {}
    for I, c in vec.items():
        s, J = sort_sign([values[i - 1] for i in I])
        if s:
            out[J] = out.get(J, 0) + s * c
    return {J: c for J, c in out.items() if c}


# --------------------------------------------------------------------------
# linear maps


@dataclass(frozen=True)
class LinearMap:
    """Exact matrix of shape (codomain_dim, domain_dim); columns are images of basis vectors."""

    domain_dim: int
    codomain_dim: int
    matrix: tuple[tuple, ...]

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], codomain_dim: int) -> "LinearMap":
        rows = tuple(tuple(col[i] for col in columns) for i in range(codomain_dim))
        return cls(len(columns), codomain_dim, rows)

    @classmethod
    def identity(cls, d: int) -> "LinearMap":
        return cls(d, d, tuple(tuple(linalg.identity(d)[i]) for i in range(d)))

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if self.domain_dim != other.codomain_dim:
            raise ValueError("dimension mismatch in composition")
        if other.domain_dim == 0 or self.codomain_dim == 0:
            rows = tuple(tuple() if other.domain_dim == 0 else (0,) * other.domain_dim
                         for _ in range(self.codomain_dim))
            return LinearMap(other.domain_dim, self.codomain_dim, rows)
        prod_ = linalg.matmul(self.matrix, other.matrix)
        return LinearMap(other.domain_dim, self.codomain_dim, tuple(map(tuple, prod_)))

    def __call__(self, v: Sequence) -> list:
        return [sum(a * x for a, x in zip(row, v)) for row in self.matrix]

    def __eq__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        return (self.domain_dim, self.codomain_dim) == (other.domain_dim, other.codomain_dim) and all(
            Fraction(a) == Fraction(b)
            for r, s in zip(self.matrix, other.matrix) for a, b in zip(r, s))

    def __hash__(self):
        return hash((self.domain_dim, self.codomain_dim))

    def scale(self, c) -> "LinearMap":
        return LinearMap(self.domain_dim, self.codomain_dim,
                         tuple(tuple(c * x for x in r) for r in self.matrix))

    def columns(self) -> list[list]:
        return [[r[j] for r in self.matrix] for j in range(self.domain_dim)]

    def rank(self) -> int:
        if self.codomain_dim == 0 or self.domain_dim == 0:
            return 0
        return linalg.rank(self.matrix)

    @property
    def is_injective(self) -> bool:
        return self.rank() == self.domain_dim


# --------------------------------------------------------------------------
# hook modules


@dataclass(frozen=True)
class SpechtModule:
    """Explicit hook module S^{(n-l, 1^l)} in the anchored wedge basis."""

    lambda_n: PaddedPartition
    hook_level: int
    basis: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.lambda_n.n

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {J: i for i, J in enumerate(self.basis)}

    @property
    def coordinates(self) -> list[list[int]]:
        """Coordinates of the spanning vectors b_J (the identity matrix)."""
        return linalg.identity(self.dimension)

    def basis_wedge(self, J: tuple[int, ...]) -> Wedge:
        return boundary((1,) + tuple(J))

    def to_wedge(self, coords: Sequence) -> Wedge:
        out: Wedge = {}
        for c, J in zip(coords, self.basis):
            if c:
                for I, s in self.basis_wedge(J).items():
                    out[I] = out.get(I, 0) + c * s
        return {I: c for I, c in out.items() if c}

    def from_wedge(self, vec: Wedge) -> list:
        """Coordinates of a wedge vector assumed to lie in the module."""
        return [vec.get(J, 0) for J in self.basis]

    def contains_wedge(self, vec: Wedge) -> bool:
        back = self.to_wedge(self.from_wedge(vec))
        keys = set(back) | set(vec)
        return all(back.get(k, 0) == vec.get(k, 0) for k in keys)

    def action(self, sigma: SetMap | Sequence[int]) -> LinearMap:
        """Matrix of a permutation (given as a value table or SetMap)."""
        values = sigma.values if isinstance(sigma, SetMap) else tuple(sigma)
        if sorted(values) != list(range(1, self.n + 1)):
            raise ValueError(f"{values} is not a permutation of [{self.n}]")
        cols = [self.from_wedge(relabel(self.basis_wedge(J), values)) for J in self.basis]
        return LinearMap.from_columns(cols, self.dimension)

    @cached_property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        """Gram matrix of the basis under the standard pairing on the exterior power."""
        W = [self.basis_wedge(J) for J in self.basis]
        return tuple(tuple(sum(c * b.get(I, 0) for I, c in a.items()) for b in W) for a in W)

    def pair(self, u: Sequence, v: Sequence):
        """Invariant pairing of two coordinate vectors."""
        G = self.gram
        return sum(u[i] * G[i][j] * v[j]
                   for i in range(len(u)) if u[i] for j in range(len(v)) if v[j])

    def normal(self, alpha: Sequence[int]) -> list[int]:
        return hyperplane_normal(self.n, self.hook_level, alpha, module=self)


def build_hook_module(n: int, l: int) -> SpechtModule | ZeroModule:
    """S^{(1^l)}_n as the l-th exterior power of the standard representation."""
    if l < 0:
        raise ValueError("l must be non-negative")
    lam = Partition((1,) * l)
    padded = pad(lam, n)
    if padded.is_zero:
        return padded
    basis = tuple(itertools.combinations(range(2, n + 1), l))
    return SpechtModule(padded, l, basis)


def _require_hook(n: int, l: int) -> SpechtModule:
    mod = build_hook_module(n, l)
    if isinstance(mod, ZeroModule):
        raise ZeroModuleError(f"S^(1^{l})_{n} is zero")
    return mod


def hyperplane_normal(n: int, l: int, alpha: Sequence[int],
                      module: SpechtModule | None = None) -> list[int]:
    """Canonical integer normal of H_alpha: the polytabloid with alpha as first column.

    Scaled to content 1 with first nonzero coordinate positive.
    """
    alpha = tuple(alpha)
    if len(alpha) != l + 1 or len(set(alpha)) != l + 1:
        raise ValueError(f"alpha must be an (l+1)-subset, got {alpha}")
    if any(not 1 <= a <= n for a in alpha):
        raise ValueError(f"alpha must lie in [1, {n}]")
    mod = module or _require_hook(n, l)
    return linalg.primitive(mod.from_wedge(boundary(tuple(sorted(alpha)))))


def induced_map(f: SetMap, l: int) -> LinearMap:
    """f_* : S_m -> S_n for an injection (or S_n -> S_m for a surjection) on wedge indices."""
    if f.kind == "injection" and not f.is_injective:
        raise ValueError("non-injective map")
    if f.kind == "surjection" and not f.is_surjective:
        raise ValueError("non-surjective map")
    src, dst = build_hook_module(f.m, l), build_hook_module(f.n, l)
    if isinstance(src, ZeroModule) or isinstance(dst, ZeroModule):
        raise ZeroModuleError("induced maps need nonzero modules")
    cols = [dst.from_wedge(relabel(src.basis_wedge(J), f.values)) for J in src.basis]
    return LinearMap.from_columns(cols, dst.dimension)


def section_average(f: SetMap, l: int) -> LinearMap:
    """phi_f = (1/n_f) sum over sections g of g_*, a map S_m -> S_n."""
    if not f.is_surjective:
        raise ValueError("section_average needs a surjection")
    secs = f.sections()
    n_f = len(secs)
    assert n_f == prod(len(b) for b in f.fibers())
    total = None
    for g in secs:
        M = induced_map(g, l)
        total = M if total is None else LinearMap(
            M.domain_dim, M.codomain_dim,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(total.matrix, M.matrix)))
    return total.scale(Fraction(1, n_f))


# --------------------------------------------------------------------------
# tabloids, polytabloids and the general-shape oracle


@dataclass(frozen=True)
class Tabloid:
    """Row-equivalence class of a filling: rows[i-1] is the row holding i."""

    shape: Partition
    rows: tuple[int, ...]

    def act(self, sigma: Sequence[int]) -> "Tabloid":
        new = [0] * len(self.rows)
        for i, r in enumerate(self.rows):
            new[sigma[i] - 1] = r
        return Tabloid(self.shape, tuple(new))


def _check_filling(filling: Sequence[Sequence[int]]) -> tuple[Partition, int]:
    shape = Partition(tuple(len(r) for r in filling))
    n = shape.size
    entries = sorted(x for r in filling for x in r)
    if entries != list(range(1, n + 1)):
        raise ValueError("filling must be a bijection onto [n]")
    return shape, n


def tabloid_of(filling: Sequence[Sequence[int]]) -> Tabloid:
    shape, n = _check_filling(filling)
    rows = [0] * n
    for r, row in enumerate(filling):
        for x in row:
            rows[x - 1] = r
    return Tabloid(shape, tuple(rows))


def polytabloid(filling: Sequence[Sequence[int]]) -> dict[Tabloid, int]:
    """v_T = sum over the column group C(T) of sgn(sigma) {sigma T}."""
    shape, n = _check_filling(filling)
    cols = [tuple(filling[r][c] for r in range(len(filling)) if c < len(filling[r]))
            for c in range(shape[0] if len(shape) else 0)]
    out: dict[Tabloid, int] = {}
    for perms in itertools.product(*(itertools.permutations(c) for c in cols)):
        sign = 1
        sigma = list(range(1, n + 1))
        for col, p in zip(cols, perms):
            s, _ = sort_sign(p)
            sign *= s
            for a, b in zip(col, p):
                sigma[a - 1] = b
        t = tabloid_of(filling).act(sigma)
        out[t] = out.get(t, 0) + sign
    return {t: c for t, c in out.items() if c}


def tabloids(shape: Partition) -> list[Tabloid]:
    labels = [r for r, k in enumerate(shape) for _ in range(k)]
    seen = sorted(set(itertools.permutations(labels)))
    return [Tabloid(shape, t) for t in seen]


def standard_tableaux(shape: Partition) -> list[list[list[int]]]:
    n = shape.size
    out = []

    def rec(k, rows):
        if k > n:
            out.append([list(r) for r in rows])
            return
        for i in range(len(shape)):
            if len(rows[i]) < shape[i] and (i == 0 or len(rows[i - 1]) > len(rows[i])):
                rows[i].append(k)
                rec(k + 1, rows)
                rows[i].pop()

    rec(1, [[] for _ in shape])
    return out


@dataclass(frozen=True)
class TabloidSpechtModule:
    """S^mu inside the permutation module M^mu, spanned by standard polytabloids."""

    shape: Partition
    tabloids: tuple[Tabloid, ...] = field(repr=False)
    spanning: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.shape.size

    @property
    def dimension(self) -> int:
        return len(self.spanning)

    def permute(self, vec: Sequence, sigma: Sequence[int]) -> list:
        index = {t: i for i, t in enumerate(self.tabloids)}
        out = [0] * len(vec)
        for t, c in zip(self.tabloids, vec):
            if c:
                out[index[t.act(sigma)]] += c
        return out

    def fixed_space(self, tau: Sequence[int]) -> list[list]:
        """Basis (tabloid coordinates) of the tau-fixed vectors in the module."""
        B = self.spanning
        diffs = [[a - b for a, b in zip(self.permute(v, tau), v)] for v in B]
        # coefficient vectors c with sum c_i diffs_i = 0
        kernel = linalg.nullspace(linalg.transpose(diffs), ncols=len(B))
        return [[sum(c * v[k] for c, v in zip(ker, B)) for k in range(len(self.tabloids))]
                for ker in kernel]


def build_tabloid_specht(shape: Partition | Sequence[int]) -> TabloidSpechtModule:
    shape = shape if isinstance(shape, Partition) else Partition(tuple(shape))
    tabs = tabloids(shape)
    index = {t: i for i, t in enumerate(tabs)}
    spanning = []
    for T in standard_tableaux(shape):
        v = [0] * len(tabs)
        for t, c in polytabloid(T).items():
            v[index[t]] = c
        spanning.append(tuple(v))
    return TabloidSpechtModule(shape, tuple(tabs), tuple(spanning))


def _transposition(n: int, i: int, j: int) -> tuple[int, ...]:
    v = list(range(1, n + 1))
    v[i - 1], v[j - 1] = j, i
    return tuple(v)


def generating_transpositions(alpha: Sequence[Sequence[int]], style: str = "star") -> list[tuple[int, int]]:
    """Transpositions generating S_alpha: stars from each block minimum, or adjacent paths."""
    out = []
    for block in alpha:
        b = sorted(block)
        if style == "star":
            out += [(b[0], x) for x in b[1:]]
        elif style == "path":
            out += list(zip(b, b[1:]))
        elif style == "reverse-star":
            out += [(x, b[-1]) for x in b[:-1]]
        else:
            raise ValueError(f"unknown style {style!r}")
    return out


@dataclass(frozen=True)
class GeneralHyperplane:
    module: TabloidSpechtModule
    alpha: tuple[tuple[int, ...], ...]
    basis: tuple[tuple, ...]

    @property
    def codimension(self) -> int:
        return self.module.dimension - len(self.basis)


#: default size guard for dense tabloid computations
GENERAL_MAX_N = 8


def build_hyperplane_general(lam: Partition | Sequence[int], n: int,
                             alpha: Sequence[Sequence[int]],
                             transpositions: Sequence[tuple[int, int]] | None = None,
                             max_n: int = GENERAL_MAX_N,
                             module: TabloidSpechtModule | None = None) -> GeneralHyperplane:
    """H_alpha = sum of the fixed spaces of transpositions generating S_alpha."""
    lam = lam if isinstance(lam, Partition) else Partition(tuple(lam))
    if n > max_n:
        raise ValueError(f"n={n} exceeds the dense-oracle guard max_n={max_n}")
    padded = pad(lam, n)
    if padded.is_zero:
        raise ZeroModuleError(f"{lam}[{n}] gives the zero module")
    mu = padded.parts
    blocks = tuple(tuple(sorted(b)) for b in alpha)
    if sorted(x for b in blocks for x in b) != list(range(1, n + 1)):
        raise ValueError("alpha must be a set partition of [n]")
    if Partition(tuple(sorted((len(b) for b in blocks), reverse=True))) != conjugate(mu):
        raise ValueError(f"alpha must have shape {conjugate(mu)}")
    mod = module or build_tabloid_specht(mu)
    taus = list(transpositions) if transpositions is not None else generating_transpositions(blocks)
    vecs: list[list] = []
    for i, j in taus:
        vecs += mod.fixed_space(_transposition(n, i, j))
    basis = tuple(tuple(r) for r in linalg.column_space_basis(vecs)) if vecs else ()
    return GeneralHyperplane(mod, blocks, basis)


def tabloid_to_wedge(shape: Partition, vec: Sequence, tabs: Sequence[Tabloid]) -> Wedge:
    """Equivariant map M^{(n-l,1^l)} -> wedge^l Q^n sending a tabloid to the wedge of its lower rows."""
    l = len(shape) - 1
    out: Wedge = {}
    for t, c in zip(tabs, vec):
        if not c:
            continue
        lower = [0] * l
        for i, r in enumerate(t.rows, 1):
            if r > 0:
                lower[r - 1] = i
        s, I = sort_sign(lower)
        out[I] = out.get(I, 0) + s * c
    return {I: c for I, c in out.items() if c}


def hook_dimension(n: int, l: int) -> int:
    return comb(n - 1, l) if n >= l + 1 else 0
