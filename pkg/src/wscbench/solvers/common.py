"""Shared solver plumbing: outcomes, default parameter tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..instance import ProblemInstance

#: Anneal lengths (schedule steps) that worked well at the listed site counts;
#: lookups take the nearest size.
HCM_SCHEDULE_STEPS = {192: 5, 300: 6, 520: 8, 720: 11, 992: 14}

#: (population, temperature steps) by nearest site count.
PA_POPULATION = {
    180: (100, 100),
    296: (300, 100),
    489: (10_000, 200),
    681: (100_000, 300),
    945: (3_000_000, 300),
}

#: Default geometric ladder for the replica solvers.
LADDER_T_MIN = 0.2279
LADDER_T_MAX = 2.5
LADDER_TEMPS = 21
COLD_LEVELS = 5


def nearest_size_default(table: dict[int, object], n: int):
    """Value for the benchmarked size closest to ``n`` (ties to the smaller key)."""
    key = min(table, key=lambda k: (abs(k - n), k))
    return table[key]


@dataclass
class SolveOutcome:
    """What a solver run reports.

    ``best_energy_scaled``/``best_state`` are the minimum found, tracked at
    the solver's natural event granularity (after each full sweep for
    single-spin solvers, after each cluster move for cluster solvers).
    ``success`` means the instance carries a reference energy and the run
    reached it exactly.  ``work_site_updates`` counts site updates: one per
    Metropolis proposal and one per site of a grown cluster (whether or not
    the cluster flip is accepted — the work was done); replica swaps count
    zero.  Wall time is reported separately and never mixed into work units.
    ``gs_criteria_met`` is populated only by solvers that define a
    ground-state confidence criterion.
    """

    best_energy_scaled: int
    best_state: np.ndarray
    success: bool
    work_site_updates: int
    wall_time_s: float
    gs_criteria_met: bool | None = None
    stats: dict = field(default_factory=dict)


def outcome(
    inst: ProblemInstance,
    best_energy: int,
    best_state: np.ndarray,
    work: int,
    wall_time_s: float,
    gs_criteria_met: bool | None = None,
    **stats,
) -> SolveOutcome:
    success = (
        inst.reference_energy_scaled is not None
        and best_energy == inst.reference_energy_scaled
    )
    return SolveOutcome(
        best_energy_scaled=int(best_energy),
        best_state=np.asarray(best_state, dtype=np.int8).copy(),
        success=bool(success),
        work_site_updates=int(work),
        wall_time_s=float(wall_time_s),
        gs_criteria_met=gs_criteria_met,
        stats=stats,
    )
