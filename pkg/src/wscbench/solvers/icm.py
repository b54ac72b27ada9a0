"""Replica-pair cluster moves and the solvers built on them.

The shared primitive flips a connected cluster of disagreeing sites in BOTH
replicas of a pair.  Because every boundary neighbour of such a cluster
agrees between the replicas, the boundary energy changes of the two replicas
cancel exactly: de_b = -de_a site by site.  Consequences used here:

* at equal temperatures the joint weight is unchanged — the move is
  rejection-free and conserves E_a + E_b exactly (isoenergetic cluster move);
* at adjacent temperatures beta_cold > beta_hot the joint weight changes by
  exp(-(beta_cold - beta_hot) * de_cold / scale), which is the classical
  replica-cluster acceptance rule.  Flipping both replicas preserves the
  disagreement pattern, so the reverse move proposes the same cluster with
  the same probability and detailed balance holds.
"""

from __future__ import annotations

import math
import time

import numpy as np
from numba import njit

from ..instance import ProblemInstance, ValidationError
from ..mcmc import (
    Schedule,
    SpinState,
    acceptance_table,
    compiled_problem,
    geometric_temperature_ladder,
)
from ..mcmc import _pt_round, _sweep
from .common import COLD_LEVELS, LADDER_T_MAX, LADDER_T_MIN, LADDER_TEMPS, SolveOutcome, outcome


def default_ladder() -> Schedule:
    return geometric_temperature_ladder(LADDER_T_MIN, LADDER_T_MAX, LADDER_TEMPS)


def swap_probability(beta_i: float, beta_j: float, e_i: int, e_j: int, scale: int) -> float:
    """Probability of exchanging two replica states between temperatures."""
    return min(1.0, math.exp((beta_i - beta_j) * (e_i - e_j) / scale))


@njit(cache=True)
def _cluster_pair_move(sa, sb, indptr, nbr, jv, hv, weight, rng, members, in_cluster):
    """Grow a cluster of disagreeing sites from a uniform random seed and flip
    it in both replicas, accepting with min(1, exp(-weight * de_a)).

    ``weight`` is (beta_a - beta_b) / scale; zero makes the move
    rejection-free.  Returns (de_a, de_b, cluster_size, accepted); identical
    replicas produce (0, 0, 0, False) without consuming randomness.
    """
    n = sa.shape[0]
    ndiff = 0
    for i in range(n):
        if sa[i] != sb[i]:
            ndiff += 1
    if ndiff == 0:
        return np.int64(0), np.int64(0), 0, False
    pick = rng.integers(0, ndiff)
    seed = -1
    c = 0
    for i in range(n):
        if sa[i] != sb[i]:
            if c == pick:
                seed = i
                break
            c += 1

    size = 1
    members[0] = seed
    in_cluster[seed] = True
    head = 0
    while head < size:
        i = members[head]
        head += 1
        for t in range(indptr[i], indptr[i + 1]):
            j = nbr[t]
            if not in_cluster[j] and sa[j] != sb[j]:
                in_cluster[j] = True
                members[size] = j
                size += 1

    de_a = np.int64(0)
    de_b = np.int64(0)
    for idx in range(size):
        i = members[idx]
        loc_a = hv[i]
        loc_b = hv[i]
        for t in range(indptr[i], indptr[i + 1]):
            j = nbr[t]
            if not in_cluster[j]:
                loc_a += jv[t] * sa[j]
                loc_b += jv[t] * sb[j]
        de_a += 2 * np.int64(sa[i]) * loc_a
        de_b += 2 * np.int64(sb[i]) * loc_b

    accepted = rng.random() < np.exp(-weight * de_a)
    if accepted:
        for idx in range(size):
            i = members[idx]
            sa[i] = -sa[i]
            sb[i] = -sb[i]
    for idx in range(size):
        in_cluster[members[idx]] = False
    if not accepted:
        return np.int64(0), np.int64(0), size, False
    return de_a, de_b, size, True


@njit(cache=True)
def _sweep_all(states, energies, indptr, nbr, jv, hv, tables, off, rng):
    for t in range(states.shape[0]):
        energies[t] += _sweep(states[t], indptr, nbr, jv, hv, tables[t], off, rng)


def houdayer_icm_move(
    inst: ProblemInstance,
    state_a: SpinState,
    state_b: SpinState,
    rng: np.random.Generator,
) -> tuple[SpinState, SpinState, bool]:
    """One isoenergetic cluster move between two same-temperature replicas.

    Flips a random cluster of disagreeing sites in both states; E_a + E_b is
    conserved exactly.  Returns the updated states and whether a cluster was
    flipped (identical states are a no-op).
    """
    prob = compiled_problem(inst)
    members = np.empty(inst.n, dtype=np.int64)
    in_cluster = np.zeros(inst.n, dtype=np.bool_)
    de_a, de_b, size, moved = _cluster_pair_move(
        state_a.spins, state_b.spins, prob.indptr, prob.nbr, prob.jv, prob.hv, 0.0, rng, members, in_cluster
    )
    state_a.energy_scaled += int(de_a)
    state_b.energy_scaled += int(de_b)
    return state_a, state_b, bool(moved)


class _ChainTracker:
    """First sweeps at which a chain's coldest replica visited each of its
    current minimum-energy states."""

    def __init__(self) -> None:
        self.best_e: int | None = None
        self.states: list[tuple[np.ndarray, int]] = []

    def observe(self, energy: int, spins: np.ndarray, sweep: int) -> None:
        if self.best_e is None or energy < self.best_e:
            self.best_e = energy
            self.states = [(spins.copy(), sweep)]
        elif energy == self.best_e:
            for recorded, _ in self.states:
                if np.array_equal(recorded, spins):
                    return
            self.states.append((spins.copy(), sweep))

    def first_visit(self, spins: np.ndarray) -> int | None:
        for recorded, sweep in self.states:
            if np.array_equal(recorded, spins):
                return sweep
        return None


def pt_icm(
    inst: ProblemInstance,
    ladder: Schedule | None = None,
    n_cold: int = COLD_LEVELS,
    sweeps: int = 1000,
    replicas_per_temp: int = 4,
    rng: np.random.Generator | None = None,
) -> SolveOutcome:
    """Parallel tempering with isoenergetic cluster moves.

    ``replicas_per_temp`` independent chains each hold one replica per ladder
    temperature.  Every sweep runs Metropolis at all temperatures, attempts
    all adjacent swaps within each chain, then applies one isoenergetic
    cluster move per chain pair at each of the ``n_cold`` coldest
    temperatures.  ``gs_criteria_met`` reports whether every chain's coldest
    replica reached the overall best state within the first quarter of the
    sweeps — the stopping rule used to declare a ground state trusted.
    """
    if rng is None:
        raise ValidationError("an rng is required")
    if sweeps < 1:
        raise ValidationError(f"sweep count must be >= 1, got {sweeps}")
    if replicas_per_temp < 2 or replicas_per_temp % 2:
        raise ValidationError(f"replicas_per_temp must be even and >= 2, got {replicas_per_temp}")
    ladder = default_ladder() if ladder is None else ladder
    nt = len(ladder)
    if not 1 <= n_cold <= nt:
        raise ValidationError(f"n_cold must be in 1..{nt}, got {n_cold}")
    if np.any(ladder.betas <= 0):
        raise ValidationError("replica solvers need strictly positive betas")

    t0 = time.perf_counter()
    chains = replicas_per_temp
    n_pairs = chains // 2
    streams = rng.spawn(chains + n_pairs)
    chain_rng, pair_rng = streams[:chains], streams[chains:]

    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    betas = ladder.betas
    tables = acceptance_table(betas, prob.scale, off)
    inv_scale = 1.0 / prob.scale

    states = np.empty((chains, nt, inst.n), dtype=np.int8)
    energies = np.empty((chains, nt), dtype=np.int64)
    ci, cj, cJ = inst.coupling_arrays
    for c in range(chains):
        states[c] = (chain_rng[c].integers(0, 2, size=(nt, inst.n)) * 2 - 1).astype(np.int8)
        s64 = states[c].astype(np.int64)
        energies[c] = -(s64[:, ci] * s64[:, cj]) @ cJ - s64 @ prob.hv

    members = np.empty(inst.n, dtype=np.int64)
    in_cluster = np.zeros(inst.n, dtype=np.bool_)

    best_e = int(energies.min())
    c0, t_0 = np.unravel_index(int(energies.argmin()), energies.shape)
    best = states[c0, t_0].copy()
    trackers = [_ChainTracker() for _ in range(chains)]
    work = 0
    swap_accepts = 0
    icm_flips = 0

    for s in range(sweeps):
        for c in range(chains):
            swap_accepts += _pt_round(
                states[c], energies[c], prob.indptr, prob.nbr, prob.jv, prob.hv,
                tables, off, betas, inv_scale, chain_rng[c],
            )
        work += chains * nt * inst.n
        for p in range(n_pairs):
            a, b = 2 * p, 2 * p + 1
            for t in range(nt - 1, nt - 1 - n_cold, -1):
                de_a, de_b, size, moved = _cluster_pair_move(
                    states[a, t], states[b, t], prob.indptr, prob.nbr, prob.jv, prob.hv,
                    0.0, pair_rng[p], members, in_cluster,
                )
                energies[a, t] += de_a
                energies[b, t] += de_b
                work += size
                icm_flips += int(moved)
        flat = int(energies.argmin())
        if int(energies.flat[flat]) < best_e:
            best_e = int(energies.flat[flat])
            c0, t_0 = np.unravel_index(flat, energies.shape)
            best = states[c0, t_0].copy()
        for c in range(chains):
            trackers[c].observe(int(energies[c, nt - 1]), states[c, nt - 1], s)

    quarter = [t.first_visit(best) for t in trackers]
    gs_met = all(
        t.best_e == best_e and q is not None and (q + 1) * 4 <= sweeps
        for t, q in zip(trackers, quarter)
    )
    return outcome(
        inst,
        best_e + prob.offset,
        best,
        work,
        time.perf_counter() - t0,
        gs_criteria_met=gs_met,
        swap_accepts=int(swap_accepts),
        icm_flips=int(icm_flips),
    )


def replica_mc_icm(
    inst: ProblemInstance,
    ladder: Schedule | None = None,
    sweeps: int = 1000,
    n_cold: int = COLD_LEVELS,
    rng: np.random.Generator | None = None,
) -> SolveOutcome:
    """Replica cluster Monte Carlo across a temperature ladder, plus
    isoenergetic moves between its two independent chains.

    Each round sweeps every replica of both chains, then performs one
    replica-cluster move per chain at a random adjacent temperature pair
    (cluster of disagreeing sites flipped in both replicas, accepted with
    min(1, exp(-(beta_cold - beta_hot) * de_cold / scale))), then applies the
    equal-temperature cluster move between the chains at the coldest
    ``n_cold`` levels.  There are no replica swaps.
    """
    if rng is None:
        raise ValidationError("an rng is required")
    if sweeps < 1:
        raise ValidationError(f"sweep count must be >= 1, got {sweeps}")
    ladder = default_ladder() if ladder is None else ladder
    nt = len(ladder)
    if nt < 2:
        raise ValidationError("replica cluster moves need at least two temperatures")
    if not 1 <= n_cold <= nt:
        raise ValidationError(f"n_cold must be in 1..{nt}, got {n_cold}")
    if np.any(ladder.betas <= 0):
        raise ValidationError("replica solvers need strictly positive betas")

    t0 = time.perf_counter()
    chains = 2
    streams = rng.spawn(chains + 1)
    chain_rng, pair_rng = streams[:chains], streams[chains]

    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    betas = ladder.betas
    tables = acceptance_table(betas, prob.scale, off)

    states = np.empty((chains, nt, inst.n), dtype=np.int8)
    energies = np.empty((chains, nt), dtype=np.int64)
    ci, cj, cJ = inst.coupling_arrays
    for c in range(chains):
        states[c] = (chain_rng[c].integers(0, 2, size=(nt, inst.n)) * 2 - 1).astype(np.int8)
        s64 = states[c].astype(np.int64)
        energies[c] = -(s64[:, ci] * s64[:, cj]) @ cJ - s64 @ prob.hv

    members = np.empty(inst.n, dtype=np.int64)
    in_cluster = np.zeros(inst.n, dtype=np.bool_)

    best_e = int(energies.min())
    c0, t_0 = np.unravel_index(int(energies.argmin()), energies.shape)
    best = states[c0, t_0].copy()
    work = 0
    rmc_accepts = 0
    icm_flips = 0

    for _ in range(sweeps):
        for c in range(chains):
            _sweep_all(
                states[c], energies[c], prob.indptr, prob.nbr, prob.jv, prob.hv, tables, off, chain_rng[c]
            )
        work += chains * nt * inst.n
        for c in range(chains):
            t = int(chain_rng[c].integers(0, nt - 1))
            weight = (betas[t + 1] - betas[t]) / prob.scale
            de_cold, de_hot, size, moved = _cluster_pair_move(
                states[c, t + 1], states[c, t], prob.indptr, prob.nbr, prob.jv, prob.hv,
                weight, chain_rng[c], members, in_cluster,
            )
            energies[c, t + 1] += de_cold
            energies[c, t] += de_hot
            work += size
            rmc_accepts += int(moved)
        for t in range(nt - 1, nt - 1 - n_cold, -1):
            de_a, de_b, size, moved = _cluster_pair_move(
                states[0, t], states[1, t], prob.indptr, prob.nbr, prob.jv, prob.hv,
                0.0, pair_rng, members, in_cluster,
            )
            energies[0, t] += de_a
            energies[1, t] += de_b
            work += size
            icm_flips += int(moved)
        flat = int(energies.argmin())
        if int(energies.flat[flat]) < best_e:
            best_e = int(energies.flat[flat])
            c0, t_0 = np.unravel_index(flat, energies.shape)
            best = states[c0, t_0].copy()

    return outcome(
        inst,
        best_e + prob.offset,
        best,
        work,
        time.perf_counter() - t0,
        rmc_accepts=int(rmc_accepts),
        icm_flips=int(icm_flips),
    )
