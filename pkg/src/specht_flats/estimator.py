"""Two-round capture-recapture (Lincoln-Petersen) counts of lines per size."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .census import CensusRow
from .sampler import SampleStore, StoreError


@dataclass(frozen=True)
class EstimateRow:
    size: int
    count_a: int
    count_b: int
    overlap: int

    def __post_init__(self):
        if self.overlap > min(self.count_a, self.count_b):
            raise ValueError("overlap exceeds a round count")

    @property
    def estimate(self) -> Fraction | None:
        """count_a * count_b / overlap, or None when any count is zero."""
        if not (self.count_a and self.count_b and self.overlap):
            return None
        return Fraction(self.count_a * self.count_b, self.overlap)

    @property
    def rounded(self) -> int | None:
        e = self.estimate
        return None if e is None else floor(e + Fraction(1, 2))

    @property
    def saturated(self) -> bool:
        """Both rounds found exactly the same lines ('saturated?', not proven exhaustive)."""
        return self.count_a == self.count_b == self.overlap > 0


def capture_recapture(a: SampleStore, b: SampleStore) -> list[EstimateRow]:
    if (a.n, a.l) != (b.n, b.l):
        raise StoreError(f"stores describe different arrangements: "
                         f"(n={a.n}, l={a.l}) vs (n={b.n}, l={b.l})")
    by_a: dict[int, set] = {}
    by_b: dict[int, set] = {}
    for r in a.records:
        by_a.setdefault(r.size, set()).add(r.key)
    for r in b.records:
        by_b.setdefault(r.size, set()).add(r.key)
    rows = []
    for m in sorted(set(by_a) | set(by_b)):
        A, B = by_a.get(m, set()), by_b.get(m, set())
        rows.append(EstimateRow(m, len(A), len(B), len(A & B)))
    return rows


def seeds_coincide(a: SampleStore, b: SampleStore) -> bool:
    sa = set(a.seed) if isinstance(a.seed, list) else {a.seed}
    sb = set(b.seed) if isinstance(b.seed, list) else {b.seed}
    return bool(sa & sb)


@dataclass
class EstimateReport:
    n: int
    l: int
    seed_a: int | list[int]
    seed_b: int | list[int]
    rows: list[EstimateRow]
    exact: CensusRow | None = None

    @property
    def same_seed(self) -> bool:
        sa = set(self.seed_a) if isinstance(self.seed_a, list) else {self.seed_a}
        sb = set(self.seed_b) if isinstance(self.seed_b, list) else {self.seed_b}
        return bool(sa & sb)

    @property
    def warning(self) -> str | None:
        if self.same_seed:
            return ("rounds share a seed, so they are not independent; "
                    "estimates degenerate to the observed counts")
        return None

    def true_count(self, size: int) -> int | None:
        if self.exact is None:
            return None
        s, u = self.exact.size_histogram.get(size, (0, 0))
        return s + u

    def ratio(self, row: EstimateRow) -> Fraction | None:
        t = self.true_count(row.size)
        if row.estimate is None or not t:
            return None
        return row.estimate / t

    @property
    def columns(self) -> list[str]:
        cols = ["size", "count_a", "count_b", "overlap", "estimate"]
        if self.exact is not None:
            cols += ["true_count", "ratio"]
        return cols

    def csv_rows(self) -> list[dict]:
        out = []
        sizes = [r.size for r in self.rows]
        rows = list(self.rows)
        if self.exact is not None:
            rows += [EstimateRow(s, 0, 0, 0) for s in self.exact.sizes if s not in sizes]
            rows.sort(key=lambda r: r.size)
        for r in rows:
            d = {"size": r.size, "count_a": r.count_a, "count_b": r.count_b,
                 "overlap": r.overlap, "estimate": "" if r.rounded is None else r.rounded}
            if self.exact is not None:
                q = self.ratio(r)
                d["true_count"] = self.true_count(r.size)
                d["ratio"] = "" if q is None else f"{float(q):.4f}"
            out.append(d)
        return out

    def to_json(self) -> dict:
        rows = []
        for r in self.rows:
            d = {"size": r.size, "count_a": r.count_a, "count_b": r.count_b, "overlap": r.overlap,
                 "estimate": None if r.estimate is None else str(r.estimate),
                 "estimate_rounded": r.rounded, "saturated": r.saturated}
            if self.exact is not None:
                q = self.ratio(r)
                d["true_count"] = self.true_count(r.size)
                d["ratio"] = None if q is None else str(q)
            rows.append(d)
        return {"n": self.n, "l": self.l, "seed_a": self.seed_a, "seed_b": self.seed_b,
                "warning": self.warning, "rows": rows}


def estimate_report(a: SampleStore, b: SampleStore, exact: CensusRow | None = None) -> EstimateReport:
    rows = capture_recapture(a, b)
    if exact is not None and (exact.n, exact.l) != (a.n, a.l):
        raise StoreError("exact census describes a different arrangement")
    return EstimateReport(a.n, a.l, a.seed, b.seed, rows, exact)
