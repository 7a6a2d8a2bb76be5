"""Property battery behind the ``verify`` command.

Each check returns a :class:`Check`; nothing here raises on a failed property.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import comb

from .arrangement import (
    build_arrangement,
    contraction,
    enumerate_flats,
    enumerate_lines,
    is_stable_linear,
    lattice_isomorphic,
    special_flat,
)
from .census import line_census
from .rep_core import (
    SetMap,
    boundary,
    build_hook_module,
    build_hyperplane_general,
    build_tabloid_specht,
    induced_map,
    section_average,
    set_partitions,
    tabloid_to_wedge,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


def _random_perm(rng: random.Random, n: int) -> list[int]:
    p = list(range(1, n + 1))
    rng.shuffle(p)
    return p


def check_rank_axioms(n: int = 6, l: int = 2, trials: int = 200, seed: int = 0) -> Check:
    arr = build_arrangement(n, l)
    rng = random.Random(seed)
    H = len(arr)
    if arr.rank([]) != 0:
        return Check("rank axioms", False, "rank(empty) != 0")
    for _ in range(trials):
        S = set(rng.sample(range(H), rng.randint(0, H)))
        T = set(rng.sample(range(H), rng.randint(0, H)))
        x = rng.randrange(H)
        rS, rT = arr.rank(S), arr.rank(T)
        if not arr.rank(S | {x}) <= rS + 1 or arr.rank(S | {x}) < rS:
            return Check("rank axioms", False, f"unit increase fails at {sorted(S)}, {x}")
        if arr.rank(S | T) + arr.rank(S & T) > rS + rT:
            return Check("rank axioms", False, f"submodularity fails at {sorted(S)}, {sorted(T)}")
        if rS > arr.dim:
            return Check("rank axioms", False, "rank exceeds dimension")
    return Check("rank axioms", True, f"n={n}, l={l}, {trials} random triples")


def check_closure_axioms(n: int = 6, l: int = 2, trials: int = 200, seed: int = 1) -> Check:
    arr = build_arrangement(n, l)
    rng = random.Random(seed)
    H = len(arr)
    for _ in range(trials):
        S = set(rng.sample(range(H), rng.randint(0, arr.dim)))
        T = S | set(rng.sample(range(H), rng.randint(0, 3)))
        cS = arr.closure(S)
        if not S <= set(cS.key):
            return Check("closure axioms", False, "not extensive")
        if arr.closure(cS.key).key != cS.key:
            return Check("closure axioms", False, "not idempotent")
        if not set(cS.key) <= set(arr.closure(T).key):
            return Check("closure axioms", False, "not monotone")
        # exchange: y in cl(S+x) - cl(S) implies x in cl(S+y)
        x, y = rng.randrange(H), rng.randrange(H)
        if y in arr.closure(S | {x}).key and y not in cS.key:
            if x not in arr.closure(S | {y}).key:
                return Check("closure axioms", False, "exchange fails")
    return Check("closure axioms", True, f"n={n}, l={l}, {trials} random sets")


def check_normal_equivariance(n: int = 6, ls=(1, 2)) -> Check:
    count = 0
    for l in ls:
        mod = build_hook_module(n, l)
        normals = {a: mod.normal(a) for a in itertools.combinations(range(1, n + 1), l + 1)}
        for sigma in itertools.permutations(range(1, n + 1)):
            M = mod.action(sigma)
            for a, v in normals.items():
                image = M(v)
                target = normals[tuple(sorted(sigma[x - 1] for x in a))]
                if image != target and image != [-x for x in target]:
                    return Check("normal equivariance", False, f"sigma={sigma}, alpha={a}")
                count += 1
    return Check("normal equivariance", True, f"n={n}, all permutations, {count} pairs")


def check_flat_equivariance(n: int = 6, l: int = 2, trials: int = 200, seed: int = 2) -> Check:
    arr = build_arrangement(n, l)
    rng = random.Random(seed)
    lines = enumerate_lines(arr)
    keys = {F.key: F for F in lines}
    for _ in range(trials):
        sigma = _random_perm(rng, n)
        perm = arr.permute_indices(sigma)
        F = rng.choice(lines)
        image = tuple(sorted(perm[i] for i in F.key))
        G = keys.get(image)
        if G is None or G.dimension != F.dimension or G.size != F.size or G.stable != F.stable:
            return Check("flat equivariance", False, f"sigma={sigma} line={F.key}")
    return Check("flat equivariance", True, f"n={n}, l={l}, {trials} random (sigma, line)")


def check_general_vs_hook(max_n: int = 5) -> Check:
    count = 0
    for n in range(3, max_n + 1):
        for l in range(1, n - 1):
            mod = build_hook_module(n, l)
            mu = (n - l,) + (1,) * l
            tmod = build_tabloid_specht(mu)
            for a in itertools.combinations(range(1, n + 1), l + 1):
                alpha = [a] + [(x,) for x in range(1, n + 1) if x not in a]
                H = build_hyperplane_general((1,) * l, n, alpha, module=tmod)
                if H.codimension != 1:
                    return Check("general vs hook", False, f"codim {H.codimension} at n={n}, alpha={a}")
                normal = boundary(a)
                for v in H.basis:
                    w = tabloid_to_wedge(tmod.shape, v, tmod.tabloids)
                    if sum(c * normal.get(I, 0) for I, c in w.items()) != 0:
                        return Check("general vs hook", False, f"pairing nonzero at n={n}, alpha={a}")
                count += 1
                if mod.dimension != tmod.dimension:
                    return Check("general vs hook", False, "dimension mismatch")
    return Check("general vs hook", True, f"n<={max_n}, {count} hyperplanes")


def check_stability_agreement(ns=(5, 6), l: int = 2) -> Check:
    total = 0
    for n in ns:
        arr = build_arrangement(n, l)
        for F in enumerate_lines(arr):
            if is_stable_linear(arr, F) != F.stable:
                return Check("stability agreement", False, f"n={n} line {F.key}")
            total += 1
    return Check("stability agreement", True, f"{total} lines of A_{'/A_'.join(map(str, ns))}")


def check_contraction_isomorphism(n: int = 5, l: int = 2) -> Check:
    big = build_arrangement(n, l)
    small = build_arrangement(n - 1, l)
    L_small = enumerate_flats(small)
    for blocks in set_partitions(range(1, n + 1), n - 1):
        f = SetMap.from_fibers(blocks)
        F = special_flat(big, f)
        C = contraction(big, F)
        if not lattice_isomorphic(enumerate_flats(C.arrangement), L_small):
            return Check("contraction isomorphism", False, f"fibers {blocks}")
        for alpha in small.labels:
            images = {big.closure(set(F.key) | {big.label_index[tuple(sorted(g(x) for x in alpha))]}).key
                      for g in f.sections()}
            if len(images) != 1:
                return Check("contraction isomorphism", False, f"section dependence at {alpha}")
    return Check("contraction isomorphism", True, f"all fiber types [{n}]->>[{n - 1}], l={l}")


def check_section_average(max_n: int = 6, l: int = 2) -> Check:
    count = 0
    for n in range(l + 2, max_n + 1):
        arr = build_arrangement(n, l)
        mod = arr.module
        for m in range(l + 1, n + 1):
            for blocks in set_partitions(range(1, n + 1), m):
                f = SetMap.from_fibers(blocks)
                phi = section_average(f, l)
                fstar = induced_map(f, l)
                if fstar @ phi != type(phi).identity(phi.domain_dim):
                    return Check("section average", False, f"f_* phi != id for {blocks}")
                F = special_flat(arr, f)
                if phi.rank() != comb(m - 1, l) or F.dimension != comb(m - 1, l):
                    return Check("section average", False, f"dimension mismatch for {blocks}")
                for v in phi.columns():
                    if any(mod.pair(arr.normals[a], v) != 0 for a in F.key):
                        return Check("section average", False, f"image not in F_f for {blocks}")
                count += 1
    return Check("section average", True, f"{count} fiber partitions, n<={max_n}")


def check_line_census() -> Check:
    expected = {4: (6, "0.0"), 5: (37, "32.4"), 6: (570, "52.6")}
    for n, (total, pct) in expected.items():
        row = line_census(n, 2)
        if (row.total_lines, row.percent_unstable) != (total, pct):
            return Check("line census", False, f"n={n}: {row.total_lines} lines, {row.percent_unstable}%")
    return Check("line census", True, "6 / 37 / 570 lines; 0.0 / 32.4 / 52.6 % unstable")


ALL_CHECKS = (
    check_rank_axioms,
    check_closure_axioms,
    check_normal_equivariance,
    check_flat_equivariance,
    check_general_vs_hook,
    check_stability_agreement,
    check_contraction_isomorphism,
    check_section_average,
    check_line_census,
)


def run_all(checks=ALL_CHECKS) -> list[Check]:
    return [c() for c in checks]
