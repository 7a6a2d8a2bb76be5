"""Exact line censuses and first Kazhdan-Lusztig coefficient bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, floor
from typing import Iterable

from .arrangement import (
    Arrangement,
    Flat,
    build_arrangement,
    enumerate_lines,
    enumerate_rank1_flats,
    special_flats,
)


def round_half_up(x: Fraction, digits: int = 0) -> Fraction:
    scale = 10 ** digits
    return Fraction(floor(Fraction(x) * scale + Fraction(1, 2)), scale)


def render_percent(x: Fraction) -> str:
    """Percentage of a fraction, round-half-up to one decimal."""
    return f"{float(round_half_up(100 * Fraction(x), 1)):.1f}"


@dataclass
class CensusRow:
    n: int
    l: int
    total_lines: int
    size_histogram: dict[int, tuple[int, int]]  # size -> (stable, unstable)
    source: str = "exact"

    def __post_init__(self):
        if self.total_lines != sum(s + u for s, u in self.size_histogram.values()):
            raise ValueError("histogram does not sum to total_lines")

    @property
    def unstable_total(self) -> int:
        return sum(u for _, u in self.size_histogram.values())

    @property
    def stable_total(self) -> int:
        return sum(s for s, _ in self.size_histogram.values())

    @property
    def unstable_fraction(self) -> Fraction:
        return Fraction(self.unstable_total, self.total_lines) if self.total_lines else Fraction(0)

    @property
    def percent_unstable(self) -> str:
        return render_percent(self.unstable_fraction)

    @property
    def percent_stable(self) -> str:
        return render_percent(1 - self.unstable_fraction) if self.total_lines else "0.0"

    @property
    def sizes(self) -> list[int]:
        return sorted(self.size_histogram)

    def color(self, size: int) -> str:
        """'unstable', 'stable' or 'mixed' for a size class."""
        s, u = self.size_histogram[size]
        return "mixed" if s and u else ("stable" if s else "unstable")

    def summary(self) -> str:
        return f"{self.total_lines} lines, {self.percent_stable}% stable"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "l": self.l,
            "total_lines": self.total_lines,
            "size_histogram": {str(k): {"stable": s, "unstable": u}
                               for k, (s, u) in sorted(self.size_histogram.items())},
            "percent_unstable": self.percent_unstable,
            "unstable_fraction": str(self.unstable_fraction),
            "source": self.source,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CensusRow":
        hist = {int(k): (v["stable"], v["unstable"]) for k, v in d["size_histogram"].items()}
        return cls(d["n"], d["l"], d["total_lines"], hist, d.get("source", "exact"))

    CSV_FIELDS = ("n", "l", "total_lines", "size", "stable_count", "unstable_count",
                  "percent_unstable", "source")

    def csv_rows(self) -> list[dict]:
        return [{"n": self.n, "l": self.l, "total_lines": self.total_lines, "size": k,
                 "stable_count": s, "unstable_count": u,
                 "percent_unstable": self.percent_unstable, "source": self.source}
                for k, (s, u) in sorted(self.size_histogram.items())]

    @classmethod
    def from_csv_rows(cls, rows: Iterable[dict]) -> "CensusRow":
        rows = list(rows)
        if not rows:
            raise ValueError("empty census table")
        hist = {int(r["size"]): (int(r["stable_count"]), int(r["unstable_count"])) for r in rows}
        r0 = rows[0]
        return cls(int(r0["n"]), int(r0["l"]), int(r0["total_lines"]), hist, r0.get("source") or "exact")


def census_from_lines(n: int, l: int, lines: Iterable[Flat], source: str = "exact") -> CensusRow:
    hist: dict[int, list[int]] = {}
    total = 0
    for F in lines:
        slot = hist.setdefault(F.size, [0, 0])
        slot[0 if F.stable else 1] += 1
        total += 1
    return CensusRow(n, l, total, {k: tuple(v) for k, v in sorted(hist.items())}, source)


def line_census(n: int, l: int, budget: int | None = None, workers: int = 1,
                arr: Arrangement | None = None) -> CensusRow:
    arr = arr or build_arrangement(n, l)
    return census_from_lines(n, l, enumerate_lines(arr, budget=budget, workers=workers))


@lru_cache(maxsize=None)
def stirling(n: int, k: int) -> int:
    """Stirling number of the second kind, S(n, k) = k S(n-1, k) + S(n-1, k-1)."""
    if n < 0 or k < 0:
        raise ValueError("stirling needs non-negative arguments")
    if n == 0 or k == 0:
        return int(n == k)
    if k > n:
        return 0
    # iterate on n to keep recursion shallow for large n
    row = [1] + [0] * k
    for m in range(1, n + 1):
        for j in range(min(m, k), 0, -1):
            row[j] = j * row[j] + row[j - 1]
        row[0] = 0
    return row[k]


def special_line_count(arr: Arrangement, lines: Iterable[Flat] | None = None) -> int:
    """Lines of the census that are special flats F_f, f: [n] ->> [l+1]."""
    special = {F.key for F in special_flats(arr, arr.l + 1) if F.dimension == 1}
    if lines is None:
        return len(special)
    return sum(1 for F in lines if F.key in special)


def kl_first_coefficient_exact(n: int, l: int, budget: int | None = None, workers: int = 1) -> int:
    """c_1 = #(dimension-1 flats) - #(rank-1 flats), both enumerated exactly."""
    arr = build_arrangement(n, l)
    lines = enumerate_lines(arr, budget=budget, workers=workers)
    return len(lines) - len(enumerate_rank1_flats(arr))


def lower_bound_function(n: int, l: int) -> int:
    """f_l(n) = S(n, l+1) - C(n, l)."""
    return stirling(n, l + 1) - comb(n, l)


F_DEFINITION = "S(n,l+1) - C(n,l)"


@dataclass
class KLBoundReport:
    n: int
    l: int
    stirling_lower: int
    f_value: int
    ratio: Fraction
    corank1_count: int | None = None
    rank1_count: int | None = None
    special_lines: int | None = None
    f_definition: str = field(default=F_DEFINITION)

    @property
    def c1(self) -> int | None:
        if self.corank1_count is None or self.rank1_count is None:
            return None
        return self.corank1_count - self.rank1_count

    @property
    def lower_bound_holds(self) -> bool | None:
        return None if self.c1 is None else self.f_value <= self.c1

    @property
    def ratio_decimal(self) -> str:
        return f"{float(self.ratio):.10f}"

    CSV_FIELDS = ("n", "l", "corank1_count", "rank1_count", "c1", "stirling_lower", "f_value",
                  "ratio", "ratio_decimal", "special_lines", "lower_bound_holds", "f_definition")

    def to_json(self) -> dict:
        return {
            "n": self.n, "l": self.l,
            "corank1_count": self.corank1_count,
            "rank1_count": self.rank1_count,
            "c1": self.c1,
            "stirling_lower": self.stirling_lower,
            "f_value": self.f_value,
            "ratio": str(self.ratio),
            "ratio_decimal": self.ratio_decimal,
            "special_lines": self.special_lines,
            "lower_bound_holds": self.lower_bound_holds,
            "f_definition": self.f_definition,
        }

    def csv_rows(self) -> list[dict]:
        d = self.to_json()
        return [{k: ("" if d[k] is None else d[k]) for k in self.CSV_FIELDS}]


def kl_bound_report(n: int, l: int, exact: bool = False, budget: int | None = None,
                    workers: int = 1) -> KLBoundReport:
    if n < l + 2:
        raise ValueError(f"need n >= l + 2, got n={n}, l={l}")
    f = lower_bound_function(n, l)
    ratio = Fraction(f * factorial(l + 1), (l + 1) ** n)
    rep = KLBoundReport(n, l, stirling(n, l + 1), f, ratio)
    if exact:
        arr = build_arrangement(n, l)
        lines = enumerate_lines(arr, budget=budget, workers=workers)
        rep.corank1_count = len(lines)
        rep.rank1_count = len(enumerate_rank1_flats(arr))
        rep.special_lines = special_line_count(arr, lines)
    return rep
