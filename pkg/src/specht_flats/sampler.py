"""Randomized line finding with persistent, mergeable stores.

Each trial draws a uniform (dim-1)-subset of hyperplanes. If the subset cuts
out a line, the line is extended to its closure key, deduplicated on that
key and classified as stable or unstable.

Trial t draws from its own counter range of a SplitMix64 stream, so
the trial -> subset map does not depend on how trials are split across
workers. Among repeated hits of a line the smallest trial index is recorded,
which makes stores identical for any worker count.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__, linalg
from .arrangement import Arrangement, Flat, build_arrangement, is_stable
from .census import CensusRow, census_from_lines

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ENGINE_VERSION = f"specht_flats-{__version__}/numpy-{np.__version__}"
PRNG_ID = "splitmix64(counter=trial<<16|draw)+lemire+partial-fisher-yates"
BATCH = 4096


class StoreError(ValueError):
    """A store failed validation or two stores are incompatible."""


@dataclass(frozen=True)
class SampleConfig:
    n: int
    l: int
    trials: int
    seed: int
    workers: int = 1
    store_path: str | None = None

    def __post_init__(self):
        errors = []
        if self.trials < 1:
            errors.append("trials must be >= 1")
        if self.workers < 1:
            errors.append("workers must be >= 1")
        if self.l < 1:
            errors.append("l must be >= 1")
        if self.n < self.l + 2:
            errors.append("n must be >= l + 2")
        if not 0 <= self.seed < 2**64:
            errors.append("seed must be a 64-bit unsigned integer")
        if errors:
            raise ValueError("; ".join(errors))


@dataclass(frozen=True)
class Record:
    key: tuple[int, ...]
    size: int
    dim: int
    stable: bool
    trial: int
    sample: tuple[int, ...]

    def to_json(self) -> dict:
        return {"key": list(self.key), "size": self.size, "dim": self.dim,
                "stable": self.stable, "trial": self.trial, "sample": list(self.sample)}

    @classmethod
    def from_json(cls, d: dict) -> "Record":
        return cls(tuple(d["key"]), d["size"], d["dim"], d["stable"], d["trial"], tuple(d["sample"]))


@dataclass
class SampleStore:
    n: int
    l: int
    seed: int | list[int]
    trials: int
    records: list[Record] = field(default_factory=list)
    prng_id: str = PRNG_ID
    engine_version: str = ENGINE_VERSION
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: (r.size, r.key))

    def __len__(self):
        return len(self.records)

    @property
    def keys(self) -> set[tuple[int, ...]]:
        return {r.key for r in self.records}

    def header(self) -> dict:
        return {"schema_version": self.schema_version, "n": self.n, "l": self.l,
                "seed": self.seed, "trials": self.trials, "prng_id": self.prng_id,
                "engine_version": self.engine_version}

    def dumps(self) -> str:
        lines = [json.dumps(self.header(), separators=(",", ":"))]
        lines += [json.dumps(r.to_json(), separators=(",", ":")) for r in self.records]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "SampleStore":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise StoreError("empty store file")
        try:
            h = json.loads(lines[0])
            records = [Record.from_json(json.loads(ln)) for ln in lines[1:]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise StoreError(f"malformed store: {exc}") from exc
        missing = {"schema_version", "n", "l", "seed", "trials"} - set(h)
        if missing:
            raise StoreError(f"store header lacks {sorted(missing)}")
        return cls(h["n"], h["l"], h["seed"], h["trials"], records,
                   h.get("prng_id", PRNG_ID), h.get("engine_version", ENGINE_VERSION),
                   h["schema_version"])

    @classmethod
    def read(cls, path: str | Path) -> "SampleStore":
        return cls.loads(Path(path).read_text())


# --------------------------------------------------------------------------
# drawing


_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SLOT_BITS = 16


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """Counter-based SplitMix64: output number ``c`` of the stream started at ``seed``."""
    z = np.uint64(seed) + (counters.astype(np.uint64) + np.uint64(1)) * _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def draw_subsets(seed: int, trials: np.ndarray, H: int, k: int) -> np.ndarray:
    """Uniform k-subsets of range(H), one per trial, by partial Fisher-Yates.

    Trial t consumes counters (t << 16) + 0, 1, ...; bounded draws use
    Lemire's multiply-shift with rejection, so every step is exactly uniform.
    """
    trials = np.asarray(trials, dtype=np.uint64)
    B = len(trials)
    base = trials << np.uint64(_SLOT_BITS)
    used = np.zeros(B, dtype=np.uint64)
    idx = np.tile(np.arange(H, dtype=np.int64), (B, 1))
    rows = np.arange(B)
    mask32 = np.uint64(0xFFFFFFFF)
    for i in range(k):
        s = np.uint64(H - i)
        threshold = (np.uint64(2**32) - s) % s
        out = np.zeros(B, dtype=np.uint64)
        need = np.ones(B, dtype=bool)
        while need.any():
            sel = np.nonzero(need)[0]
            x = splitmix64(seed, base[sel] + used[sel]) >> np.uint64(32)
            used[sel] += np.uint64(1)
            m = x * s
            good = (m & mask32) >= threshold
            out[sel[good]] = m[good] >> np.uint64(32)
            need[sel[good]] = False
        j = i + out.astype(np.int64)
        a = idx[rows, i].copy()
        idx[rows, i] = idx[rows, j]
        idx[rows, j] = a
    return np.sort(idx[:, :k], axis=1)


def draw_subset(seed: int, trial: int, H: int, k: int) -> tuple[int, ...]:
    return tuple(draw_subsets(seed, np.array([trial]), H, k)[0].tolist())


def _run_range(args) -> tuple[dict[bytes, tuple[int, tuple[int, ...]]], Counter | None]:
    A, d, seed, start, stop, want_hits = args
    H = A.shape[0]
    k = d - 1
    first: dict[bytes, tuple[int, tuple[int, ...]]] = {}
    hits: Counter | None = Counter() if want_hits else None
    for lo in range(start, stop, BATCH):
        hi = min(stop, lo + BATCH)
        subsets = draw_subsets(seed, np.arange(lo, hi), H, k)
        rk, ker = linalg.batch_kernel_mod(A[subsets])
        ok = np.nonzero(rk == k)[0]
        if not len(ok):
            continue
        zero = ((A @ ker[ok].T) % linalg.PRIME == 0).T
        packed = np.packbits(zero, axis=1)
        for i, row in zip(ok.tolist(), packed):
            b = row.tobytes()
            if hits is not None:
                hits[b] += 1
            if b not in first:
                first[b] = (lo + i, tuple(subsets[i].tolist()))
    return first, hits


def _unpack(b: bytes, H: int) -> tuple[int, ...]:
    bits = np.unpackbits(np.frombuffer(b, dtype=np.uint8))[:H]
    return tuple(int(i) for i in np.nonzero(bits)[0])


def _ranges(trials: int, workers: int) -> list[tuple[int, int]]:
    step = -(-trials // workers)
    return [(s, min(trials, s + step)) for s in range(0, trials, step)]


def sample_lines(cfg: SampleConfig, arr: Arrangement | None = None, hits: bool = False,
                 validate: bool = True):
    """Run the line-finding trials. Returns a store, or (store, hit counts) with ``hits``.

    Hit counts map closure keys to the number of accepted trials producing them.
    """
    arr = arr or build_arrangement(cfg.n, cfg.l)
    d, H = arr.dim, len(arr)
    if d < 2:
        raise ValueError("sampling needs a module of dimension >= 2")
    if d - 1 > H:
        raise ValueError(f"draw size {d - 1} exceeds the {H} hyperplanes")
    jobs = [(arr.array, d, cfg.seed, s, e, hits) for s, e in _ranges(cfg.trials, cfg.workers)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(len(jobs)) as pool:
            parts = list(pool.map(_run_range, jobs))
    else:
        parts = [_run_range(j) for j in jobs]
    first: dict[bytes, tuple[int, tuple[int, ...]]] = {}
    counts: Counter = Counter()
    for part, c in parts:
        for b, rec in part.items():
            if b not in first or rec < first[b]:
                first[b] = rec
        if c:
            counts.update(c)
    records = []
    hit_counts = {}
    for b, (trial, sample) in first.items():
        key = _unpack(b, H)
        if not arr.modular_exact:
            key = arr.closure(sample).key
        flat = Flat(key, 1)
        records.append(Record(key, len(key), 1, is_stable(arr, flat), trial, sample))
        hit_counts[key] = hit_counts.get(key, 0) + counts[b]
    store = SampleStore(cfg.n, cfg.l, cfg.seed, cfg.trials, records)
    if validate:
        validate_store(store, arr)
    if cfg.store_path:
        store.write(cfg.store_path)
    log.info("n=%d l=%d trials=%d: %d distinct lines", cfg.n, cfg.l, cfg.trials, len(store))
    return (store, hit_counts) if hits else store


# --------------------------------------------------------------------------
# validation, classification, merging


def check_structure(store: SampleStore) -> list[str]:
    problems = []
    seen = set()
    for i, r in enumerate(store.records):
        if r.key in seen:
            problems.append(f"record {i}: duplicate key {list(r.key)}")
        seen.add(r.key)
        if r.dim != 1:
            problems.append(f"record {i}: dimension {r.dim} != 1")
        if r.size != len(r.key):
            problems.append(f"record {i}: size {r.size} != |key| {len(r.key)}")
        if list(r.key) != sorted(set(r.key)):
            problems.append(f"record {i}: key not sorted/unique")
        if not set(r.sample) <= set(r.key):
            problems.append(f"record {i}: sample not inside key")
    return problems


def validate_store(store: SampleStore, arr: Arrangement | None = None) -> None:
    """Exact post-pass: every record is a closed line with the right stability flag."""
    problems = check_structure(store)
    arr = arr or build_arrangement(store.n, store.l)
    for i, r in enumerate(store.records):
        if problems and any(p.startswith(f"record {i}:") for p in problems):
            continue
        F = arr.closure(r.key)
        if F.key != r.key:
            problems.append(f"record {i}: key is not closed")
        if F.dimension != 1:
            problems.append(f"record {i}: flat has dimension {F.dimension}")
        if arr.rank(r.sample) != arr.dim - 1:
            problems.append(f"record {i}: generating sample is rank deficient")
        if F.stable != r.stable:
            problems.append(f"record {i}: stability flag {r.stable} should be {F.stable}")
    if problems:
        raise StoreError("store failed validation:\n  " + "\n  ".join(problems))


def classify_store(store: SampleStore) -> CensusRow:
    problems = check_structure(store)
    if problems:
        raise StoreError("store failed validation:\n  " + "\n  ".join(problems))
    flats = [Flat(r.key, 1, r.stable) for r in store.records]
    return census_from_lines(store.n, store.l, flats, source="sample")


def _seeds(store: SampleStore) -> list[int]:
    return list(store.seed) if isinstance(store.seed, list) else [store.seed]


def merge_stores(a: SampleStore, b: SampleStore) -> SampleStore:
    """Union by closure key; the record with the smaller (trial, sample) wins."""
    for attr in ("n", "l", "engine_version", "schema_version"):
        if getattr(a, attr) != getattr(b, attr):
            raise StoreError(f"cannot merge stores with different {attr}: "
                             f"{getattr(a, attr)!r} vs {getattr(b, attr)!r}")
    best: dict[tuple[int, ...], Record] = {}
    for r in a.records + b.records:
        cur = best.get(r.key)
        if cur is None or (r.trial, r.sample) < (cur.trial, cur.sample):
            best[r.key] = r
    sa, sb = _seeds(a), _seeds(b)
    if sa == sb:
        seed, trials = a.seed, max(a.trials, b.trials)
    else:
        merged = sorted(set(sa) | set(sb))
        seed, trials = merged, a.trials + b.trials
    return SampleStore(a.n, a.l, seed, trials, list(best.values()), a.prng_id, a.engine_version,
                       a.schema_version)


def empty_store(n: int, l: int, seed: int = 0) -> SampleStore:
    return SampleStore(n, l, seed, 0, [])
