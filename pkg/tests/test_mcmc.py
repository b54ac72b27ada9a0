"""Schedules, Metropolis dynamics, RNG streams, exhaustive references."""

import numpy as np
import pytest

from wscbench.instance import ProblemInstance, ValidationError, generate_network, ladder_layout
from wscbench.mcmc import (
    SpinState,
    derive_rng,
    energy_visit_counts,
    exhaustive_energy_distribution,
    geometric_temperature_ladder,
    linear_beta_schedule,
    metropolis_sweep,
    pt_energy_visit_counts,
)


def total_variation(p, q):
    return 0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum()


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------


def test_linear_schedule_values():
    sched = linear_beta_schedule(0.5, 3.0, 5)
    assert np.allclose(sched.betas, [0.5, 1.125, 1.75, 2.375, 3.0])
    assert sched.betas[0] == 0.5 and sched.betas[-1] == 3.0


def test_linear_schedule_allows_infinite_temperature_start():
    sched = linear_beta_schedule(0.0, 1.0, 2)
    assert sched.betas.tolist() == [0.0, 1.0]


def test_linear_schedule_rejections():
    with pytest.raises(ValidationError):
        linear_beta_schedule(1.0, 1.0, 3)
    with pytest.raises(ValidationError):
        linear_beta_schedule(0.5, 3.0, 1)
    with pytest.raises(ValidationError):
        linear_beta_schedule(3.0, 0.5, 4)


def test_geometric_ladder_values():
    sched = geometric_temperature_ladder(1.0, 4.0, 3)
    assert np.allclose(sched.temperatures(), [4.0, 2.0, 1.0])
    # betas ascend (hot first)
    assert np.all(np.diff(sched.betas) > 0)


def test_geometric_ladder_exact_endpoints():
    sched = geometric_temperature_ladder(0.2279, 2.5, 21)
    temps = sched.temperatures()
    assert temps[0] == 2.5
    assert temps[-1] == 0.2279
    ratios = temps[:-1] / temps[1:]
    assert np.allclose(ratios, ratios[0])


def test_geometric_ladder_rejections():
    with pytest.raises(ValidationError):
        geometric_temperature_ladder(1.0, 1.0, 2)
    with pytest.raises(ValidationError):
        geometric_temperature_ladder(0.0, 1.0, 2)
    with pytest.raises(ValidationError):
        geometric_temperature_ladder(1.0, 4.0, 1)


# ---------------------------------------------------------------------------
# rng streams
# ---------------------------------------------------------------------------


def test_derived_streams_reproduce_and_differ():
    a = derive_rng(42, 0, 3).random(8)
    b = derive_rng(42, 0, 3).random(8)
    c = derive_rng(42, 1, 3).random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_derived_streams_reject_negative_path():
    with pytest.raises(ValidationError):
        derive_rng(-1)
    with pytest.raises(ValidationError):
        derive_rng(1, -2)


# ---------------------------------------------------------------------------
# metropolis dynamics
# ---------------------------------------------------------------------------


def pair_instance():
    return generate_network(ladder_layout(1), 25)


def test_beta_zero_accepts_every_proposal():
    # at infinite temperature each site is proposed once per sweep and every
    # proposal is accepted, so a single sweep flips the whole state
    inst = pair_instance()
    st = SpinState.random(inst, derive_rng(3, 0))
    before = st.spins.copy()
    metropolis_sweep(inst, st, 0.0, derive_rng(3, 1))
    assert np.array_equal(st.spins, -before)
    assert st.energy_scaled == st.recompute(inst)


def test_deep_cold_never_leaves_the_optimum():
    inst = ProblemInstance(n=2, scale=25, fields=(), couplings=((0, 1, 25),))
    st = SpinState.from_spins(inst, np.array([-1, -1], dtype=np.int8))
    metropolis_sweep(inst, st, 50.0, derive_rng(9), sweeps=10_000)
    assert st.spins.tolist() == [-1, -1]
    assert st.energy_scaled == -25


def test_cached_energy_stays_coherent():
    inst = pair_instance()
    st = SpinState.random(inst, derive_rng(7, 0))
    rng = derive_rng(7, 1)
    for beta in (0.2, 0.7, 1.5, 3.0):
        metropolis_sweep(inst, st, beta, rng, sweeps=100)
        assert st.energy_scaled == st.recompute(inst)


def test_trajectories_are_seed_deterministic():
    inst = pair_instance()
    runs = []
    for _ in range(2):
        st = SpinState.random(inst, derive_rng(5, 0))
        metropolis_sweep(inst, st, 1.0, derive_rng(5, 1), sweeps=50)
        runs.append(st.spins.copy())
    assert np.array_equal(runs[0], runs[1])


def test_single_proposal_draw_even_when_forced():
    # a site whose flip is certain to be accepted must still consume one draw:
    # two instances identical except for an irrelevant far-away field keep
    # identical trajectories under the same seed
    inst = pair_instance()
    st1 = SpinState.random(inst, derive_rng(8, 0))
    st2 = SpinState.from_spins(inst, st1.spins.copy())
    metropolis_sweep(inst, st1, 2.0, derive_rng(8, 1), sweeps=25)
    metropolis_sweep(inst, st2, 2.0, derive_rng(8, 1), sweeps=25)
    assert np.array_equal(st1.spins, st2.spins)


def test_sampled_energies_match_boltzmann():
    # 8-site single cell analogue: intra-cell couplers +25, mixed fields
    couplings = tuple((a, 4 + b, 25) for a in range(4) for b in range(4))
    fields = tuple((i, -25) for i in range(4)) + tuple((i, 11) for i in range(4, 8))
    inst = ProblemInstance(n=8, scale=25, fields=fields, couplings=couplings)
    beta = 0.5

    st = SpinState.random(inst, derive_rng(21, 0))
    rng = derive_rng(21, 1)
    sweeps = 200_000
    burn = sweeps // 100
    levels, probs = exhaustive_energy_distribution(inst, beta)
    counts = {int(e): 0 for e in levels}
    metropolis_sweep(inst, st, beta, rng, sweeps=burn)
    for _ in range(sweeps):
        metropolis_sweep(inst, st, beta, rng)
        counts[st.energy_scaled] += 1
    sampled = np.array([counts[int(e)] for e in levels], dtype=float) / sweeps
    assert total_variation(sampled, probs) < 0.02


def test_exhaustive_distribution_normalizes():
    inst = pair_instance()
    levels, probs = exhaustive_energy_distribution(inst, 1.3)
    assert levels[0] == -1012
    assert probs.sum() == pytest.approx(1.0)
    assert np.all(probs >= 0)


def test_sweep_argument_validation():
    inst = pair_instance()
    st = SpinState.random(inst, derive_rng(1))
    with pytest.raises(ValidationError):
        metropolis_sweep(inst, st, -0.5, derive_rng(2))
    with pytest.raises(ValidationError):
        metropolis_sweep(inst, st, 0.5, derive_rng(2), sweeps=-1)


def ring_instance():
    couplings = tuple(
        sorted((min(i, k), max(i, k), 25 if i % 2 else -25) for i, k in ((i, (i + 1) % 6) for i in range(6)))
    )
    return ProblemInstance(n=6, scale=25, fields=((0, -25), (3, 11)), couplings=couplings)


def test_visit_counts_match_boltzmann():
    inst = ring_instance()
    levels, probs = exhaustive_energy_distribution(inst, 1.3)
    e_min, counts = energy_visit_counts(inst, 1.3, 200_000, derive_rng(31), burn_in=2_000)
    assert counts.sum() == 200_000
    sampled = counts[levels - e_min] / counts.sum()
    assert total_variation(sampled, probs) < 0.02
    # every visited energy is an actual level of the instance
    visited = np.nonzero(counts)[0] + e_min
    assert set(visited) <= set(int(e) for e in levels)


def test_pt_visit_counts_match_boltzmann_at_every_level():
    inst = ring_instance()
    ladder = geometric_temperature_ladder(0.4, 2.5, 5)
    e_min, hists = pt_energy_visit_counts(inst, ladder, 200_000, derive_rng(32), burn_in=2_000)
    assert hists.shape[0] == 5
    for t, beta in enumerate(ladder.betas):
        levels, probs = exhaustive_energy_distribution(inst, beta)
        sampled = hists[t, levels - e_min] / hists[t].sum()
        assert total_variation(sampled, probs) < 0.02


def test_visit_counts_deterministic():
    inst = ring_instance()
    a = energy_visit_counts(inst, 0.8, 5_000, derive_rng(33))
    b = energy_visit_counts(inst, 0.8, 5_000, derive_rng(33))
    assert a[0] == b[0]
    assert np.array_equal(a[1], b[1])


def test_visit_counts_validation():
    inst = ring_instance()
    with pytest.raises(ValidationError):
        energy_visit_counts(inst, -1.0, 100, derive_rng(1))
    with pytest.raises(ValidationError):
        energy_visit_counts(inst, 1.0, 0, derive_rng(1))
    with pytest.raises(ValidationError):
        energy_visit_counts(inst, 1.0, 100, derive_rng(1), burn_in=-1)
    with pytest.raises(ValidationError):
        pt_energy_visit_counts(inst, geometric_temperature_ladder(0.4, 2.5, 3), 0, derive_rng(1))
