"""Solvers: annealing, population, replica-cluster, hierarchical, superspin.

Every solver takes a problem instance plus an explicit generator and returns
a :class:`SolveOutcome`.  ``run_solver`` dispatches on the short ids used by
the command line (sa, pa, pt-icm, rmc-icm, hcm, ss) and builds schedules from
flat keyword parameters.
"""

from __future__ import annotations

import numpy as np

from ..instance import ProblemInstance, ValidationError
from ..mcmc import geometric_temperature_ladder, linear_beta_schedule
from .common import (
    COLD_LEVELS,
    HCM_SCHEDULE_STEPS,
    LADDER_T_MAX,
    LADDER_T_MIN,
    LADDER_TEMPS,
    PA_POPULATION,
    SolveOutcome,
    nearest_size_default,
)
from .hcm import hcm_anneal
from .icm import default_ladder, houdayer_icm_move, pt_icm, replica_mc_icm, swap_probability
from .pa import critical_population, population_annealing, systematic_resample
from .sa import simulated_annealing
from .superspin import ss_solve, superspin_lift, superspin_reduce

__all__ = [
    "COLD_LEVELS",
    "HCM_SCHEDULE_STEPS",
    "LADDER_T_MAX",
    "LADDER_T_MIN",
    "LADDER_TEMPS",
    "PA_POPULATION",
    "SOLVER_IDS",
    "SolveOutcome",
    "critical_population",
    "default_ladder",
    "hcm_anneal",
    "houdayer_icm_move",
    "nearest_size_default",
    "population_annealing",
    "pt_icm",
    "replica_mc_icm",
    "run_solver",
    "simulated_annealing",
    "ss_solve",
    "superspin_lift",
    "superspin_reduce",
    "swap_probability",
    "systematic_resample",
]


def _ladder_from(params: dict):
    t_min = params.pop("t_min", LADDER_T_MIN)
    t_max = params.pop("t_max", LADDER_T_MAX)
    n_temps = params.pop("n_temps", LADDER_TEMPS)
    return geometric_temperature_ladder(t_min, t_max, n_temps)


def _run_sa(inst, rng, **params):
    schedule = linear_beta_schedule(
        params.pop("beta_ini", 0.1), params.pop("beta_end", 5.0), params.pop("n_beta", 30)
    )
    return simulated_annealing(inst, schedule, params.pop("sweeps_per_beta", 10), rng=rng, **params)


def _run_pa(inst, rng, **params):
    return population_annealing(
        inst,
        population=params.pop("population", None),
        n_temps=params.pop("n_temps", None),
        sweeps_per_temp=params.pop("sweeps_per_temp", 10),
        rng=rng,
        **params,
    )


def _run_pt_icm(inst, rng, **params):
    ladder = _ladder_from(params)
    return pt_icm(
        inst,
        ladder=ladder,
        n_cold=params.pop("n_cold", COLD_LEVELS),
        sweeps=params.pop("sweeps", 1000),
        replicas_per_temp=params.pop("replicas_per_temp", 4),
        rng=rng,
        **params,
    )


def _run_rmc_icm(inst, rng, **params):
    ladder = _ladder_from(params)
    return replica_mc_icm(
        inst,
        ladder=ladder,
        sweeps=params.pop("sweeps", 1000),
        n_cold=params.pop("n_cold", COLD_LEVELS),
        rng=rng,
        **params,
    )


def _run_hcm(inst, rng, **params):
    return hcm_anneal(
        inst,
        beta_ini=params.pop("beta_ini", 0.5),
        beta_end=params.pop("beta_end", 3.0),
        steps=params.pop("steps", None),
        rng=rng,
        **params,
    )


def _run_ss(inst, rng, **params):
    ladder = _ladder_from(params)
    return ss_solve(
        inst,
        ladder=ladder,
        n_cold=params.pop("n_cold", COLD_LEVELS),
        sweeps=params.pop("sweeps", 1000),
        replicas_per_temp=params.pop("replicas_per_temp", 4),
        rng=rng,
        **params,
    )


SOLVER_IDS = {
    "sa": _run_sa,
    "pa": _run_pa,
    "pt-icm": _run_pt_icm,
    "rmc-icm": _run_rmc_icm,
    "hcm": _run_hcm,
    "ss": _run_ss,
}


def run_solver(
    solver_id: str, inst: ProblemInstance, rng: np.random.Generator, **params
) -> SolveOutcome:
    """Run a solver by id with flat keyword parameters (CLI/bench entry point)."""
    if solver_id not in SOLVER_IDS:
        known = ", ".join(sorted(SOLVER_IDS))
        raise ValidationError(f"unknown solver {solver_id!r} (known: {known})")
    try:
        return SOLVER_IDS[solver_id](inst, rng, **dict(params))
    except TypeError as exc:
        raise ValidationError(f"bad parameters for solver {solver_id!r}: {exc}") from exc
