"""Command-line entry point: ``specht-flats <command> ...``.

Exit codes: 0 success, 1 failed verification, 2 usage error,
3 budget or feasibility error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from math import comb
from pathlib import Path

from .arrangement import BudgetExceeded, build_arrangement, special_flat
from .census import CensusRow, KLBoundReport, kl_bound_report, line_census, stirling
from .estimator import estimate_report
from .rep_core import SetMap, ZeroModuleError, set_partitions
from .sampler import SampleConfig, SampleStore, StoreError, classify_store, sample_lines

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_BUDGET, EXIT_IO = 0, 1, 2, 3, 4
BUDGET_ENV = "SPECHT_FLATS_BUDGET"

log = logging.getLogger("specht_flats")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    l: int | None = None
    m: int | None = None
    trials: int | None = None
    seed: int | None = None
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    budget: int | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls(command=args.command, **{k: getattr(args, k) for k in
                  ("n", "l", "m", "trials", "seed", "workers", "out", "format", "budget")
                  if hasattr(args, k)})
        errors = cfg.problems()
        if errors:
            raise UsageError("; ".join(errors))
        return cfg

    def problems(self) -> list[str]:
        """Every invalid flag at once, so one run reports them all."""
        errs = []
        if self.l is not None and self.l < 1:
            errs.append(f"--l must be >= 1 (got {self.l})")
        if self.n is not None and self.l is not None and self.n < self.l + 2:
            errs.append(f"--n must be >= l + 2 = {self.l + 2} (got {self.n})")
        if self.n is not None and self.n < 1:
            errs.append(f"--n must be positive (got {self.n})")
        if self.m is not None and self.n is not None and self.l is not None:
            if not self.l + 1 <= self.m <= self.n:
                errs.append(f"--m must satisfy l+1 <= m <= n (got m={self.m})")
        if self.trials is not None and self.trials < 1:
            errs.append(f"--trials must be >= 1 (got {self.trials})")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            errs.append(f"--seed must lie in [0, 2^64) (got {self.seed})")
        if self.workers < 1:
            errs.append(f"--workers must be >= 1 (got {self.workers})")
        if self.budget is not None and self.budget < 0:
            errs.append(f"--budget must be >= 0 (got {self.budget})")
        return errs

    def check_output(self) -> None:
        # fail before any computation rather than after it
        if self.out is None:
            return
        parent = Path(self.out).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise IOError(f"cannot write {self.out}: directory {parent} is missing or read-only")


def _default_budget() -> int | None:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{BUDGET_ENV} must be an integer (got {raw!r})")


# --------------------------------------------------------------------------
# table emission


def render_csv(rows: list[dict], fields) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IOError(f"cannot write {cfg.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def load_census(path: str) -> CensusRow:
    """Read a census table written by ``census`` (CSV or JSON)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        return CensusRow.from_json(json.loads(text))
    return CensusRow.from_csv_rows(csv.DictReader(io.StringIO(text)))


def load_store(path: str) -> SampleStore:
    try:
        return SampleStore.read(path)
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc


# --------------------------------------------------------------------------
# commands


def cmd_census(args, cfg: RunConfig) -> int:
    row = line_census(cfg.n, cfg.l, budget=cfg.budget, workers=cfg.workers)
    print(row.summary())
    if cfg.format == "json":
        emit(cfg, render_json(row.to_json()))
    else:
        emit(cfg, render_csv(row.csv_rows(), CensusRow.CSV_FIELDS))
    return EXIT_OK


def cmd_sample(args, cfg: RunConfig) -> int:
    sc = SampleConfig(cfg.n, cfg.l, cfg.trials, cfg.seed, cfg.workers)
    store = sample_lines(sc)
    if cfg.out:
        try:
            store.write(cfg.out)
        except OSError as exc:
            raise IOError(f"cannot write {cfg.out}: {exc}") from exc
    row = classify_store(store)
    print(f"{row.summary()} ({row.percent_unstable}% unstable) from {cfg.trials} trials, seed {cfg.seed}")
    for size in row.sizes:
        s, u = row.size_histogram[size]
        print(f"  size {size}: {s} stable, {u} unstable")
    return EXIT_OK


def cmd_estimate(args, cfg: RunConfig) -> int:
    a, b = load_store(args.store_a), load_store(args.store_b)
    exact = None
    if args.exact is True:
        exact = line_census(a.n, a.l, budget=cfg.budget, workers=cfg.workers)
    elif args.exact:
        exact = load_census(args.exact)
    report = estimate_report(a, b, exact)
    if report.warning:
        print(f"warning: {report.warning}", file=sys.stderr)
    if cfg.format == "json":
        emit(cfg, render_json(report.to_json()))
    else:
        emit(cfg, render_csv(report.csv_rows(), report.columns))
    return EXIT_OK


def cmd_kl_bound(args, cfg: RunConfig) -> int:
    rep = kl_bound_report(cfg.n, cfg.l, exact=args.exact, budget=cfg.budget, workers=cfg.workers)
    if rep.c1 is not None:
        print(f"corank1={rep.corank1_count} rank1={rep.rank1_count} c1={rep.c1} "
              f"stirling_lower={rep.stirling_lower} f={rep.f_value}")
    print(f"ratio f*(l+1)!/(l+1)^n = {rep.ratio_decimal}")
    if cfg.format == "json":
        emit(cfg, render_json(rep.to_json()))
    else:
        emit(cfg, render_csv(rep.csv_rows(), KLBoundReport.CSV_FIELDS))
    return EXIT_OK


SPECIAL_FIELDS = ("fibers", "size", "dimension", "key")


def cmd_special_flats(args, cfg: RunConfig) -> int:
    arr = build_arrangement(cfg.n, cfg.l)
    blocks = list(set_partitions(range(1, cfg.n + 1), cfg.m))
    flats = [special_flat(arr, SetMap.from_fibers(bl)) for bl in blocks]
    distinct = len({F.key for F in flats})
    dims = sorted({F.dimension for F in flats})
    expected_dim = comb(cfg.m - 1, cfg.l)
    print(f"{len(flats)} flats (S({cfg.n},{cfg.m}) = {stirling(cfg.n, cfg.m)}), "
          f"{distinct} distinct, dimension {'/'.join(map(str, dims))} "
          f"(expected C({cfg.m - 1},{cfg.l}) = {expected_dim})")
    rows = [{"fibers": "|".join(",".join(map(str, blk)) for blk in bl), "size": F.size,
             "dimension": F.dimension, "key": " ".join(map(str, F.key))}
            for bl, F in zip(blocks, flats)]
    if cfg.format == "json":
        emit(cfg, render_json({"n": cfg.n, "l": cfg.l, "m": cfg.m, "count": len(flats),
                               "distinct": distinct, "stirling": stirling(cfg.n, cfg.m),
                               "dimensions": dims, "expected_dimension": expected_dim,
                               "flats": rows}))
    else:
        emit(cfg, render_csv(rows, SPECIAL_FIELDS))
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    from . import verify
    ok = True
    for check in verify.ALL_CHECKS:
        result = check()
        print(result.line(), flush=True)
        ok &= result.passed
    return EXIT_OK if ok else EXIT_FAILED


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specht-flats",
                                description="Lines and special flats of hook Specht arrangements.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n=True, out=True):
        if n:
            sp.add_argument("--n", type=int, required=True)
            sp.add_argument("--l", type=int, required=True)
        if out:
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
            sp.add_argument("--out", help="write the table here instead of stdout")

    sp = sub.add_parser("census", help="exact line census")
    common(sp)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--budget", type=int, help=f"max rank computations (env {BUDGET_ENV})")
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("sample", help="randomized line finding, writes a store")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", help="store path (JSON lines)")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("estimate", help="capture-recapture estimates from two stores")
    sp.add_argument("--store-a", required=True)
    sp.add_argument("--store-b", required=True)
    sp.add_argument("--exact", nargs="?", const=True, default=None, metavar="CENSUS",
                    help="compare with the exact census (computed, or read from a census table)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--budget", type=int)
    common(sp, n=False)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("kl-bound", help="Stirling lower bound for the first KL coefficient")
    common(sp)
    sp.add_argument("--exact", action="store_true", help="also enumerate corank-1 and rank-1 flats")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--budget", type=int)
    sp.set_defaults(func=cmd_kl_bound)

    sp = sub.add_parser("special-flats", help="special flats of all surjections [n] ->> [m]")
    common(sp)
    sp.add_argument("--m", type=int, required=True)
    sp.set_defaults(func=cmd_special_flats)

    sp = sub.add_parser("verify", help="run the property battery")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_args(args)
        if cfg.budget is None:
            cfg.budget = _default_budget()
        cfg.check_output()
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"specht-flats {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"specht-flats {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (StoreError, ZeroModuleError, ValueError) as exc:
        print(f"specht-flats {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"specht-flats {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
