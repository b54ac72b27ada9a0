"""Success statistics and time-to-solution accounting.

Time-to-solution is the expected work to reach the reference energy at least
once with 99% confidence: tts(p, t_ann) = t_ann * max(1, ln(0.01)/ln(1-p)).
Work is measured in site updates (see SolveOutcome); nothing here ever mixes
wall-clock time into the work-unit bookkeeping.  Runs that never succeed get
the sentinel ``UNSOLVED`` (infinity), which sorts above every finite value and
is reported through censoring fractions rather than silently dropped.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .instance import ProblemInstance, ValidationError

UNSOLVED = math.inf

#: two-sided 95% normal quantile used by every interval in this module
Z95 = 1.959963984540054

#: confidence target baked into the repetition count (99%)
_LOG_MISS = math.log(0.01)

RUN_LOG_FIELDS = ("solver", "n", "instance_id", "seed", "success", "work", "wall_ns", "t_ann_work")


def is_unsolved(value: float) -> bool:
    return math.isinf(value)


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValidationError(f"successes must be in 0..{trials}, got {successes}")
    p = successes / trials
    zz = z * z / trials
    center = (p + zz / 2) / (1 + zz)
    half = z * math.sqrt(p * (1 - p) / trials + zz / (4 * trials)) / (1 + zz)
    return max(0.0, center - half), min(1.0, center + half)


def success_probability(outcomes: Sequence) -> tuple[float, tuple[float, float]]:
    """Fraction of successful runs with its Wilson 95% interval.

    Accepts anything with a ``success`` attribute (solver outcomes, run
    records) or plain booleans.
    """
    flags = [bool(getattr(o, "success", o)) for o in outcomes]
    if not flags:
        raise ValidationError("need at least one run")
    return sum(flags) / len(flags), wilson_interval(sum(flags), len(flags))


def repetitions(p_succ: float) -> float:
    """Restarts needed for 99% confidence; clamped below at one run."""
    if not 0.0 <= p_succ <= 1.0:
        raise ValidationError(f"success probability must be in [0, 1], got {p_succ}")
    if p_succ == 0.0:
        return UNSOLVED
    if p_succ == 1.0:
        return 1.0
    return max(1.0, _LOG_MISS / math.log(1.0 - p_succ))


def time_to_solution(p_succ: float, t_ann: float) -> float:
    """Expected work for a 99%-confidence solve; UNSOLVED when p is zero."""
    if t_ann <= 0:
        raise ValidationError(f"per-run budget must be positive, got {t_ann}")
    r = repetitions(p_succ)
    return UNSOLVED if is_unsolved(r) else t_ann * r


# ---------------------------------------------------------------------------
# run records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    """One solver run as written to the benchmark log."""

    solver: str
    n: int
    instance_id: str
    seed: int
    success: bool
    work: int
    wall_ns: int
    t_ann_work: float

    def row(self) -> list:
        return [
            self.solver,
            self.n,
            self.instance_id,
            self.seed,
            int(self.success),
            self.work,
            self.wall_ns,
            self.t_ann_work,
        ]


def write_run_log(path, records: Iterable[RunRecord], append: bool = False) -> None:
    """Write (or append to) a run-log CSV; the header is written once."""
    mode = "a" if append else "w"
    need_header = not append or not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if need_header:
            writer.writerow(RUN_LOG_FIELDS)
        for rec in records:
            writer.writerow(rec.row())


def read_run_log(path) -> list[RunRecord]:
    """Read and validate a run-log CSV; errors carry 1-based row numbers."""
    records: list[RunRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty run log") from None
        if tuple(header) != RUN_LOG_FIELDS:
            raise ValidationError(f"{path} row 1: header must be {','.join(RUN_LOG_FIELDS)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RUN_LOG_FIELDS):
                raise ValidationError(f"{path} row {lineno}: expected {len(RUN_LOG_FIELDS)} fields")
            try:
                records.append(
                    RunRecord(
                        solver=row[0],
                        n=int(row[1]),
                        instance_id=row[2],
                        seed=int(row[3]),
                        success=bool(int(row[4])),
                        work=int(row[5]),
                        wall_ns=int(row[6]),
                        t_ann_work=float(row[7]),
                    )
                )
            except ValueError as exc:
                raise ValidationError(f"{path} row {lineno}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# budget optimization
# ---------------------------------------------------------------------------


@dataclass
class GridPoint:
    params: dict
    p_succ: float
    p_ci: tuple[float, float]
    t_ann: float
    tts: float


@dataclass
class OptimizeResult:
    """Best budget on the grid; ``solved`` is False when no point ever hit
    the reference (the full table is still attached for inspection)."""

    solved: bool
    params: dict | None
    tts: float
    table: list[GridPoint] = field(default_factory=list)


def optimize_tts(
    inst: ProblemInstance,
    solver: Callable[..., object],
    grid: Sequence[dict],
    trials: int,
    rng: np.random.Generator,
) -> OptimizeResult:
    """Measure tts at every parameter point and keep the cheapest.

    ``solver(inst, rng, **params)`` must return an object with ``success``
    and ``work_site_updates``.  Each point runs ``trials`` times on
    independent derived streams; the per-run budget is the mean work.  Ties
    prefer the smaller budget.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not grid:
        raise ValidationError("parameter grid must not be empty")
    table: list[GridPoint] = []
    for params in grid:
        successes = 0
        works = []
        for stream in rng.spawn(trials):
            out = solver(inst, stream, **params)
            successes += bool(out.success)
            works.append(out.work_site_updates)
        t_ann = float(np.mean(works))
        p = successes / trials
        tts = time_to_solution(p, t_ann) if t_ann > 0 else UNSOLVED
        table.append(GridPoint(dict(params), p, wilson_interval(successes, trials), t_ann, tts))
    finite = [g for g in table if not is_unsolved(g.tts)]
    if not finite:
        return OptimizeResult(solved=False, params=None, tts=UNSOLVED, table=table)
    best = min(finite, key=lambda g: (g.tts, g.t_ann))
    return OptimizeResult(solved=True, params=best.params, tts=best.tts, table=table)


# ---------------------------------------------------------------------------
# aggregation across instances
# ---------------------------------------------------------------------------


@dataclass
class TtsPoint:
    """A percentile of per-instance tts values with bootstrap CI and censoring."""

    value: float
    ci_low: float
    ci_high: float
    censored_fraction: float
    count: int


def nearest_rank(sorted_values: np.ndarray, percentile: float) -> float:
    """Classic nearest-rank percentile on an already sorted array."""
    if not 0 < percentile <= 100:
        raise ValidationError(f"percentile must be in (0, 100], got {percentile}")
    idx = max(1, math.ceil(percentile / 100.0 * len(sorted_values)))
    return float(sorted_values[idx - 1])


def aggregate_percentile(
    values: Sequence[float],
    percentile: float = 50.0,
    n_bootstrap: int = 1000,
    rng: np.random.Generator | None = None,
) -> TtsPoint:
    """Nearest-rank percentile over per-instance tts values.

    Unsolved entries participate as +infinity (they are genuinely larger
    than any finite tts) and are reported via ``censored_fraction``.  The
    bootstrap CI (1000 resamples over instances) is clamped to bracket the
    point estimate.  All entries unsolved is a hard error.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValidationError("need a non-empty 1-d collection of tts values")
    if np.any(arr <= 0):
        raise ValidationError("tts values must be positive")
    n_unsolved = int(np.isinf(arr).sum())
    if n_unsolved == len(arr):
        raise ValidationError(
            f"all {len(arr)} instances unsolved ({n_unsolved} censored); no percentile to report"
        )
    point = nearest_rank(np.sort(arr), percentile)
    rng = np.random.default_rng(0) if rng is None else rng
    stats = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        sample = arr[rng.integers(0, len(arr), size=len(arr))]
        stats[b] = nearest_rank(np.sort(sample), percentile)
    lo, hi = np.quantile(stats, [0.025, 0.975], method="closest_observation")
    return TtsPoint(
        value=point,
        ci_low=min(float(lo), point),
        ci_high=max(float(hi), point),
        censored_fraction=n_unsolved / len(arr),
        count=len(arr),
    )
