"""Acceptance criteria 1-12, one test per criterion.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion
is printed in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import sys
from fractions import Fraction
from math import comb, factorial
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from oracles import frac_rank, stirling2  # noqa: E402

from specht_flats import verify  # noqa: E402
from specht_flats.arrangement import (  # noqa: E402
    build_arrangement,
    contraction,
    enumerate_flats,
    enumerate_lines,
    enumerate_rank1_flats,
    lattice_isomorphic,
    special_flat,
    special_flats,
)
from specht_flats.census import kl_bound_report, line_census  # noqa: E402
from specht_flats.estimator import EstimateRow, estimate_report  # noqa: E402
from specht_flats.rep_core import SetMap, induced_map, section_average, set_partitions  # noqa: E402
from specht_flats.sampler import SampleConfig, classify_store, sample_lines, validate_store  # noqa: E402


def criterion(k):
    def mark(fn):
        fn.criterion = k
        return fn
    return mark


@criterion(1)
def test_line_census_exact():
    expected = {4: (6, {2}, "0.0"), 5: (37, {5, 6, 7}, "32.4"), 6: (570, {9, 10, 12, 14, 16}, "52.6")}
    for n, (total, sizes, pct) in expected.items():
        row = line_census(n, 2)
        got = (row.total_lines, set(row.sizes), row.percent_unstable)
        assert got == (total, sizes, pct), f"n={n}: {got}"


@criterion(2)
def test_size_class_stability_pattern():
    expected = {5: {5: "unstable", 6: "unstable", 7: "stable"},
                6: {9: "unstable", 10: "unstable", 12: "stable", 14: "stable", 16: "stable"}}
    mismatches = []
    for n, colors in expected.items():
        row = line_census(n, 2)
        for m in sorted(set(row.sizes) | set(colors)):
            got = row.color(m) if m in row.size_histogram else "absent"
            if got != colors.get(m):
                s, u = row.size_histogram.get(m, (0, 0))
                mismatches.append(f"n={n} size {m}: {got} ({s} stable, {u} unstable), expected {colors.get(m)}")
    assert not mismatches, "; ".join(mismatches)


@criterion(3)
def test_braid_reduction():
    for n, c1 in zip((4, 5, 6, 7), (1, 5, 16, 42)):
        arr = build_arrangement(n, 1)
        lines, atoms = len(enumerate_lines(arr)), len(enumerate_rank1_flats(arr))
        assert lines == 2 ** (n - 1) - 1, f"n={n}: {lines} lines"
        assert atoms == comb(n, 2), f"n={n}: {atoms} rank-1 flats"
        assert lines - atoms == c1


@criterion(4)
def test_special_flats():
    for n, count in zip((4, 5, 6, 7), (6, 25, 90, 301)):
        arr = build_arrangement(n, 2)
        flats = special_flats(arr, 3)
        assert len({F.key for F in flats}) == count == stirling2(n, 3), f"n={n}"
        assert all(F.dimension == 1 for F in flats)
        for m in range(3, n + 1):
            assert all(F.dimension == comb(m - 1, 2) for F in special_flats(arr, m)), f"n={n}, m={m}"


@criterion(5)
def test_contraction_isomorphism():
    A5, A4 = build_arrangement(5, 2), build_arrangement(4, 2)
    L4 = enumerate_flats(A4)
    partitions = list(set_partitions(range(1, 6), 4))
    assert len(partitions) == 10
    for blocks in partitions:
        f = SetMap.from_fibers(blocks)
        F = special_flat(A5, f)
        assert lattice_isomorphic(enumerate_flats(contraction(A5, F).arrangement), L4), blocks
        for alpha in A4.labels:
            images = {A5.closure(set(F.key) | {A5.label_index[tuple(sorted(g(x) for x in alpha))]}).key
                      for g in f.sections()}
            assert len(images) == 1, (blocks, alpha)


@criterion(6)
def test_section_average():
    for n in range(4, 7):
        arr = build_arrangement(n, 2)
        for m in range(3, n + 1):
            for blocks in set_partitions(range(1, n + 1), m):
                f = SetMap.from_fibers(blocks)
                phi, fstar = section_average(f, 2), induced_map(f, 2)
                comp = fstar @ phi
                assert all(comp.matrix[i][j] == int(i == j) for i in range(comp.codomain_dim)
                           for j in range(comp.domain_dim)), blocks
                F = special_flat(arr, f)
                cols = phi.columns()
                assert frac_rank(cols) == F.dimension == comb(m - 1, 2), blocks
                assert all(arr.module.pair(arr.normals[a], v) == 0 for a in F.key for v in cols), blocks


@criterion(7)
def test_estimator_arithmetic():
    assert EstimateRow(15, 162, 173, 1).rounded == 28026
    assert EstimateRow(21, 1620, 1620, 1620).rounded == 1620
    assert EstimateRow(14, 6, 11, 0).estimate is None


def _calibrated(n, seeds, exact):
    a = sample_lines(SampleConfig(n, 2, 100000, seeds[0]))
    b = sample_lines(SampleConfig(n, 2, 100000, seeds[1]))
    bad = []
    for r in estimate_report(a, b, exact).rows:
        true = exact.size_histogram[r.size][0] + exact.size_histogram[r.size][1]
        if r.overlap >= 10 and not Fraction(1, 2) <= r.estimate / true <= 2:
            bad.append((r.size, r.rounded, true))
        if r.saturated and r.count_a == true and r.rounded != true:
            bad.append((r.size, r.rounded, true))
    return bad


@criterion(8)
def test_estimator_calibration():
    for n in (5, 6):
        exact = line_census(n, 2)
        bad = _calibrated(n, (101, 202), exact)
        if bad:  # one reseeded retry
            bad = _calibrated(n, (303, 404), exact)
        assert not bad, f"n={n}: {bad}"


@criterion(9)
def test_sampler_determinism():
    one = sample_lines(SampleConfig(6, 2, 20000, 77, workers=1))
    again = sample_lines(SampleConfig(6, 2, 20000, 77, workers=1))
    four = sample_lines(SampleConfig(6, 2, 20000, 77, workers=4))
    four_again = sample_lines(SampleConfig(6, 2, 20000, 77, workers=4))
    assert one.dumps() == again.dumps()
    assert four.dumps() == four_again.dumps()
    assert one.keys == four.keys


@criterion(10)
def test_property_battery():
    failed = [c.line() for c in verify.run_all() if not c.passed]
    assert not failed, failed


@criterion(11)
def test_kl_asymptotics():
    def ratio(n, l):
        return Fraction((stirling2(n, l + 1) - comb(n, l)) * factorial(l + 1), (l + 1) ** n)

    r = [kl_bound_report(n, 2).ratio for n in range(10, 31)]
    assert r == [ratio(n, 2) for n in range(10, 31)]
    assert abs(r[-1] - 1) < Fraction(1, 1000)
    assert all(x <= y for x, y in zip(r, r[1:]))
    assert abs(kl_bound_report(40, 3).ratio - 1) < Fraction(1, 100)


@criterion(12)
def test_n7_substitute():
    store = sample_lines(SampleConfig(7, 2, 300000, 1))
    validate_store(store)
    assert all(r.dim == 1 for r in store.records)
    sizes = {r.size for r in store.records}
    assert min(sizes) <= 15 and max(sizes) >= 30, (min(sizes), max(sizes))
    row = classify_store(store)
    assert row.stable_total > 0 and row.unstable_total > 0


if __name__ == "__main__":
    tests = sorted((fn.criterion, fn) for fn in list(globals().values()) if hasattr(fn, "criterion"))
    failures = 0
    for k, fn in tests:
        try:
            fn()
            print(f"criterion {k:2d}: PASS", flush=True)
        except AssertionError as exc:
            failures += 1
            print(f"criterion {k:2d}: FAIL  ({exc})", flush=True)
    sys.exit(1 if failures else 0)
