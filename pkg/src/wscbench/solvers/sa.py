"""Simulated annealing: Metropolis sweeps along a beta schedule."""

from __future__ import annotations

import time

import numpy as np
from numba import njit

from ..instance import ProblemInstance, ValidationError
from ..mcmc import Schedule, acceptance_table, compiled_problem, linear_beta_schedule, random_state
from ..mcmc import _sweep
from .common import SolveOutcome, outcome

DEFAULT_SCHEDULE = (0.1, 5.0, 30)


@njit(cache=True)
def _anneal(spins, indptr, nbr, jv, hv, tables, off, sweeps_per_beta, e0, rng):
    e = e0
    best_e = e0
    best = spins.copy()
    for b in range(tables.shape[0]):
        for _ in range(sweeps_per_beta):
            e += _sweep(spins, indptr, nbr, jv, hv, tables[b], off, rng)
            if e < best_e:
                best_e = e
                best[:] = spins
    return e, best_e, best


def simulated_annealing(
    inst: ProblemInstance,
    schedule: Schedule | None = None,
    sweeps_per_beta: int = 10,
    rng: np.random.Generator | None = None,
) -> SolveOutcome:
    """Anneal one random start through the schedule; report the minimum visited.

    ``sweeps_per_beta == 0`` degenerates to reporting the initial random
    state.  Work is schedule length x sweeps x sites.
    """
    if rng is None:
        raise ValidationError("an rng is required")
    if sweeps_per_beta < 0:
        raise ValidationError(f"sweeps_per_beta must be >= 0, got {sweeps_per_beta}")
    if schedule is None:
        schedule = linear_beta_schedule(*DEFAULT_SCHEDULE)

    t0 = time.perf_counter()
    spins = random_state(inst.n, rng)
    e0 = inst.energy(spins)
    if sweeps_per_beta == 0:
        return outcome(inst, e0, spins, 0, time.perf_counter() - t0)

    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    tables = acceptance_table(schedule.betas, prob.scale, off)
    _, best_e, best = _anneal(
        spins, prob.indptr, prob.nbr, prob.jv, prob.hv, tables, off, sweeps_per_beta, e0 - prob.offset, rng
    )
    work = len(schedule) * sweeps_per_beta * inst.n
    return outcome(inst, int(best_e) + prob.offset, best, work, time.perf_counter() - t0)
