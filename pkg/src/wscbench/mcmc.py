"""Monte Carlo primitives: schedules, spin states, Metropolis and replica moves.

Conventions shared by every solver in this package:

* Inverse temperatures are physical; scaled integer energies are divided by
  ``scale`` inside acceptance ratios, so beta = 1 means physical temperature 1.
* A sweep proposes one flip per site in fixed order 0..n-1.  Every proposal
  consumes exactly one uniform draw from its generator, including proposals
  that are certain to be accepted, which keeps trajectories reproducible and
  comparable across implementations.
* Acceptance thresholds come from a precomputed exp table indexed by the
  integer energy change; energies themselves are never approximated.
* Randomness flows only through explicitly passed ``numpy.random.Generator``
  objects; use :func:`derive_rng` to derive independent streams from a master
  seed and integer path (run index, replica index, ...).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .instance import ProblemInstance, ValidationError, random_state


# ---------------------------------------------------------------------------
# Schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Schedule:
    """A fixed set of inverse temperatures, always stored ascending in beta."""

    betas: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.betas, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "betas", arr)

    def __len__(self) -> int:
        return len(self.betas)

    def temperatures(self) -> np.ndarray:
        """Temperatures 1/beta, descending (hottest first).  Requires beta > 0."""
        if np.any(self.betas <= 0):
            raise ValidationError("temperatures undefined for beta <= 0")
        return 1.0 / self.betas


def linear_beta_schedule(beta_ini: float, beta_end: float, steps: int) -> Schedule:
    """Evenly spaced betas from ``beta_ini`` to ``beta_end`` inclusive."""
    if steps < 2:
        raise ValidationError(f"schedule needs at least 2 steps, got {steps}")
    if not beta_end > beta_ini:
        raise ValidationError(f"degenerate range: beta_end {beta_end} must exceed beta_ini {beta_ini}")
    if beta_ini < 0:
        raise ValidationError(f"beta_ini must be >= 0, got {beta_ini}")
    return Schedule(np.linspace(beta_ini, beta_end, steps))


def geometric_temperature_ladder(t_min: float, t_max: float, count: int) -> Schedule:
    """Temperatures in geometric progression with exact endpoints.

    Stored as the corresponding betas in ascending order (hottest first is
    ``temperatures()[0] == t_max``).
    """
    if count < 2:
        raise ValidationError(f"ladder needs at least 2 temperatures, got {count}")
    if not 0 < t_min < t_max:
        raise ValidationError(f"need 0 < t_min < t_max, got {t_min}, {t_max}")
    temps = np.geomspace(t_min, t_max, count)
    temps[0] = t_min
    temps[-1] = t_max
    return Schedule((1.0 / temps)[::-1].copy())


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Independent, reproducible stream for (master seed, run, replica, ...)."""
    if master_seed < 0 or any(p < 0 for p in path):
        raise ValidationError("seeds and stream path entries must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, path)]))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


@dataclass
class SpinState:
    """Spins plus their exact cached energy, updated incrementally by kernels."""

    spins: np.ndarray
    energy_scaled: int

    @classmethod
    def from_spins(cls, inst: ProblemInstance, spins: np.ndarray) -> "SpinState":
        spins = inst.check_state(spins).copy()
        return cls(spins, inst.energy(spins))

    @classmethod
    def random(cls, inst: ProblemInstance, rng: np.random.Generator) -> "SpinState":
        return cls.from_spins(inst, random_state(inst.n, rng))

    def recompute(self, inst: ProblemInstance) -> int:
        """Energy from scratch (for coherence checks against the cache)."""
        return inst.energy(self.spins)


class CompiledProblem(NamedTuple):
    """Raw arrays handed to the numba kernels."""

    indptr: np.ndarray
    nbr: np.ndarray
    jv: np.ndarray
    hv: np.ndarray
    scale: float
    offset: int


def compiled_problem(inst: ProblemInstance) -> CompiledProblem:
    indptr, nbr, jv = inst.adjacency
    return CompiledProblem(indptr, nbr, jv, inst.field_array, float(inst.scale), inst.offset_scaled)


def acceptance_table(betas: np.ndarray, scale: float, max_delta: int) -> np.ndarray:
    """exp(-beta * de / scale) for every integer de in [-max_delta, max_delta].

    Row per beta; index de + max_delta.  Values above 1 are harmless (a
    uniform draw in [0, 1) is always below them), so no clipping is needed.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=np.float64))
    de = np.arange(-max_delta, max_delta + 1, dtype=np.float64)
    with np.errstate(over="ignore"):
        return np.exp(-np.outer(betas, de) / scale)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def _sweep(spins, indptr, nbr, jv, hv, table, off, rng):
    """One Metropolis sweep; returns the exact total energy change."""
    n = spins.shape[0]
    de_total = np.int64(0)
    for i in range(n):
        local = hv[i]
        for t in range(indptr[i], indptr[i + 1]):
            local += jv[t] * spins[nbr[t]]
        de = 2 * np.int64(spins[i]) * local
        if rng.random() < table[de + off]:
            spins[i] = -spins[i]
            de_total += de
    return de_total


@njit(cache=True)
def _pt_round(states, energies, indptr, nbr, jv, hv, tables, off, betas, inv_scale, rng):
    """One parallel-tempering round: sweep every replica, then try all
    adjacent swaps (hot to cold).  A swap with equal energies always passes.
    Returns the number of accepted swaps."""
    nt = states.shape[0]
    swaps = 0
    for t in range(nt):
        energies[t] += _sweep(states[t], indptr, nbr, jv, hv, tables[t], off, rng)
    for t in range(nt - 1):
        arg = (betas[t] - betas[t + 1]) * (energies[t] - energies[t + 1]) * inv_scale
        if rng.random() < np.exp(arg):
            for k in range(states.shape[1]):
                tmp = states[t, k]
                states[t, k] = states[t + 1, k]
                states[t + 1, k] = tmp
            etmp = energies[t]
            energies[t] = energies[t + 1]
            energies[t + 1] = etmp
            swaps += 1
    return swaps


def metropolis_sweep(
    inst: ProblemInstance,
    state: SpinState,
    beta: float,
    rng: np.random.Generator,
    sweeps: int = 1,
) -> SpinState:
    """Run ``sweeps`` Metropolis sweeps at fixed beta, updating ``state`` in place."""
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    if sweeps < 0:
        raise ValidationError(f"sweep count must be >= 0, got {sweeps}")
    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    table = acceptance_table(np.array([beta]), prob.scale, off)[0]
    for _ in range(sweeps):
        state.energy_scaled += int(
            _sweep(state.spins, prob.indptr, prob.nbr, prob.jv, prob.hv, table, off, rng)
        )
    return state


@njit(cache=True)
def _visit_counts(spins, indptr, nbr, jv, hv, table, off, sweeps, e0, e_min, hist, rng):
    e = e0
    for _ in range(sweeps):
        e += _sweep(spins, indptr, nbr, jv, hv, table, off, rng)
        hist[e - e_min] += 1
    return e


@njit(cache=True)
def _pt_visit_counts(
    states, energies, indptr, nbr, jv, hv, tables, off, betas, inv_scale, sweeps, e_min, hists, rng
):
    for _ in range(sweeps):
        _pt_round(states, energies, indptr, nbr, jv, hv, tables, off, betas, inv_scale, rng)
        for t in range(betas.shape[0]):
            hists[t, energies[t] - e_min] += 1


def _energy_span(inst: ProblemInstance) -> tuple[int, int]:
    """Smallest integer window certain to hold every reachable scaled energy."""
    _, _, cJ = inst.coupling_arrays
    span = int(np.abs(cJ).sum() + np.abs(inst.field_array).sum())
    return inst.offset_scaled - span, 2 * span + 1


def energy_visit_counts(
    inst: ProblemInstance,
    beta: float,
    sweeps: int,
    rng: np.random.Generator,
    burn_in: int = 0,
) -> tuple[int, np.ndarray]:
    """Energies visited by a fixed-temperature Metropolis chain.

    Records the exact scaled energy after every post-burn-in sweep.  Returns
    ``(e_min, counts)`` where ``counts[k]`` is the number of sweeps that ended
    at energy ``e_min + k`` — directly comparable against the exhaustive
    Boltzmann distribution on small instances.
    """
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    if sweeps < 1:
        raise ValidationError(f"sweep count must be >= 1, got {sweeps}")
    if burn_in < 0:
        raise ValidationError(f"burn-in must be >= 0, got {burn_in}")
    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    table = acceptance_table(np.array([beta]), prob.scale, off)[0]
    state = SpinState.random(inst, rng)
    e_min, width = _energy_span(inst)
    counts = np.zeros(width, dtype=np.int64)
    e = np.int64(state.energy_scaled)
    for _ in range(burn_in):
        e += _sweep(state.spins, prob.indptr, prob.nbr, prob.jv, prob.hv, table, off, rng)
    _visit_counts(
        state.spins, prob.indptr, prob.nbr, prob.jv, prob.hv, table, off,
        sweeps, e, e_min, counts, rng,
    )
    return e_min, counts


def pt_energy_visit_counts(
    inst: ProblemInstance,
    ladder: Schedule,
    sweeps: int,
    rng: np.random.Generator,
    burn_in: int = 0,
) -> tuple[int, np.ndarray]:
    """Per-temperature energy visits of one parallel-tempering chain.

    Returns ``(e_min, counts)`` with one histogram row per ladder level,
    recorded after every post-burn-in round.
    """
    if sweeps < 1:
        raise ValidationError(f"sweep count must be >= 1, got {sweeps}")
    if burn_in < 0:
        raise ValidationError(f"burn-in must be >= 0, got {burn_in}")
    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    betas = ladder.betas
    tables = acceptance_table(betas, prob.scale, off)
    nt = len(betas)
    states = np.empty((nt, inst.n), dtype=np.int8)
    energies = np.empty(nt, dtype=np.int64)
    for t in range(nt):
        st = SpinState.random(inst, rng)
        states[t] = st.spins
        energies[t] = st.energy_scaled
    e_min, width = _energy_span(inst)
    counts = np.zeros((nt, width), dtype=np.int64)
    inv_scale = 1.0 / prob.scale
    for _ in range(burn_in):
        _pt_round(
            states, energies, prob.indptr, prob.nbr, prob.jv, prob.hv, tables, off,
            betas, inv_scale, rng,
        )
    _pt_visit_counts(
        states, energies, prob.indptr, prob.nbr, prob.jv, prob.hv, tables, off,
        betas, inv_scale, sweeps, e_min, counts, rng,
    )
    return e_min, counts


# ---------------------------------------------------------------------------
# Exhaustive references for tiny systems
# ---------------------------------------------------------------------------


def enumerate_states(n: int) -> np.ndarray:
    """All 2^n spin states as a (2^n, n) array of -1/+1 rows."""
    if n > 20:
        raise ValidationError(f"state enumeration supports at most 20 sites, got {n}")
    ints = np.arange(1 << n, dtype=np.int64)
    bits = (ints[:, None] >> np.arange(n)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


def exhaustive_energy_distribution(
    inst: ProblemInstance, beta: float
) -> tuple[np.ndarray, np.ndarray]:
    """Exact Boltzmann distribution over energy levels of a tiny instance.

    Returns (sorted unique scaled energies, their probabilities at ``beta``).
    """
    states = enumerate_states(inst.n).astype(np.int64)
    ci, cj, cJ = inst.coupling_arrays
    energies = -(states[:, ci] * states[:, cj]) @ cJ - states @ inst.field_array + inst.offset_scaled
    levels, inverse = np.unique(energies, return_inverse=True)
    log_w = -beta * (energies - energies.min()) / inst.scale
    w = np.exp(log_w)
    mass = np.bincount(inverse, weights=w, minlength=len(levels))
    return levels, mass / mass.sum()
