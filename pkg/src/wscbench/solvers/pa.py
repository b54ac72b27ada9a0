"""Population annealing: weighted resampling along a beta ramp plus sweeps."""

from __future__ import annotations

import math
import time

import numpy as np
from numba import njit

from ..instance import ProblemInstance, ValidationError
from ..mcmc import acceptance_table, compiled_problem
from ..mcmc import _sweep
from .common import PA_POPULATION, SolveOutcome, nearest_size_default, outcome


@njit(cache=True)
def _population_sweeps(states, energies, indptr, nbr, jv, hv, table, off, n_sweeps, rng):
    best_e = energies[0]
    best_r = 0
    for r in range(states.shape[0]):
        for _ in range(n_sweeps):
            energies[r] += _sweep(states[r], indptr, nbr, jv, hv, table, off, rng)
        if energies[r] < best_e:
            best_e = energies[r]
            best_r = r
    return best_e, best_r


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices of a systematic (fixed-size, low-variance) resampling."""
    r = len(weights)
    positions = (rng.random() + np.arange(r)) / r
    return np.searchsorted(np.cumsum(weights), positions).clip(0, r - 1)


def critical_population(population: int, p_succ: float) -> float:
    """Population at which one annealing run becomes a 99%-confidence solve."""
    if not 0.0 < p_succ < 1.0:
        raise ValidationError(f"success probability must be in (0, 1), got {p_succ}")
    return population * math.log(0.01) / math.log(1.0 - p_succ)


def population_annealing(
    inst: ProblemInstance,
    population: int | None = None,
    n_temps: int | None = None,
    sweeps_per_temp: int = 10,
    rng: np.random.Generator | None = None,
) -> SolveOutcome:
    """Anneal a population from beta 0 to 1, resampling by Boltzmann weight.

    Betas are evenly spaced on [0, 1]; at each step replicas are resampled
    systematically in proportion to exp(-dbeta * E / scale) and then relaxed
    with ``sweeps_per_temp`` Metropolis sweeps.  The minimum over the whole
    history is reported.  Defaults for (population, n_temps) come from the
    nearest benchmarked size.
    """
    if rng is None:
        raise ValidationError("an rng is required")
    default_r, default_nt = nearest_size_default(PA_POPULATION, inst.n)
    population = default_r if population is None else population
    n_temps = default_nt if n_temps is None else n_temps
    if population < 1:
        raise ValidationError(f"population must be >= 1, got {population}")
    if n_temps < 2:
        raise ValidationError(f"n_temps must be >= 2, got {n_temps}")
    if sweeps_per_temp < 0:
        raise ValidationError(f"sweeps_per_temp must be >= 0, got {sweeps_per_temp}")

    t0 = time.perf_counter()
    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    betas = np.linspace(0.0, 1.0, n_temps)
    tables = acceptance_table(betas, prob.scale, off)

    states = (rng.integers(0, 2, size=(population, inst.n)) * 2 - 1).astype(np.int8)
    s64 = states.astype(np.int64)
    ci, cj, cJ = inst.coupling_arrays
    energies = -(s64[:, ci] * s64[:, cj]) @ cJ - s64 @ inst.field_array

    best_e = int(energies.min())
    best = states[int(energies.argmin())].copy()
    resampled_unique = population

    for step in range(1, n_temps):
        dbeta = betas[step] - betas[step - 1]
        logw = -dbeta * (energies - energies.min()) / prob.scale
        w = np.exp(logw)
        idx = systematic_resample(w / w.sum(), rng)
        resampled_unique = len(np.unique(idx))
        states = states[idx].copy()
        energies = energies[idx].copy()
        step_best, step_r = _population_sweeps(
            states, energies, prob.indptr, prob.nbr, prob.jv, prob.hv, tables[step], off, sweeps_per_temp, rng
        )
        if int(step_best) < best_e:
            best_e = int(step_best)
            best = states[int(step_r)].copy()

    work = population * (n_temps - 1) * sweeps_per_temp * inst.n
    return outcome(
        inst,
        best_e + prob.offset,
        best,
        work,
        time.perf_counter() - t0,
        final_population=population,
        last_resample_unique=int(resampled_unique),
    )
