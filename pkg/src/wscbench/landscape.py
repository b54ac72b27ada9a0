"""Overlap-distribution tooling: P(q) histograms, sampling, peak structure.

The overlap q between two independently equilibrated replicas is the order
parameter that separates single-basin instances (one peak near q = 1) from
multi-basin ones (extra peaks at smaller q, one per competing valley).  The
fraction of multi-peak instances per size is the ruggedness signal the
benchmark tracks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from .instance import ProblemInstance, ValidationError
from .mcmc import Schedule, _pt_round, acceptance_table, compiled_problem, enumerate_states
from .solvers.common import COLD_LEVELS
from .solvers.icm import _cluster_pair_move, default_ladder

N_BINS = 101
BIN_WIDTH = 2.0 / (N_BINS - 1)
BIN_CENTERS = np.linspace(-1.0, 1.0, N_BINS)

#: exact-enumeration cutoff (2^16 Boltzmann weights)
EXACT_SITE_LIMIT = 16


def spin_overlap(sa, sb) -> Fraction:
    """Site overlap (1/n) sum_i a_i b_i as an exact rational."""
    a = np.asarray(sa, dtype=np.int64)
    b = np.asarray(sb, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValidationError("overlap needs two equal-length 1-d states")
    for arr in (a, b):
        if not np.all(np.abs(arr) == 1):
            raise ValidationError("states must be -1/+1 vectors")
    return Fraction(int(a @ b), a.size)


def _bin_of(q: float) -> int:
    idx = int(round((q + 1.0) * 50.0))
    if not 0 <= idx < N_BINS or abs(q) > 1.0:
        raise ValidationError(f"overlap {q} outside [-1, 1]")
    return idx


@dataclass
class OverlapHistogram:
    """101-bin histogram of overlaps in [-1, 1] (bin width 0.02).

    ``counts`` are float so the same container holds Monte Carlo tallies and
    exact Boltzmann weights.  ``beta`` records the temperature the samples
    were taken at; merging requires matching beta and site count.
    """

    n_sites: int
    beta: float
    counts: np.ndarray
    total_weight: float = 0.0

    @classmethod
    def empty(cls, n_sites: int, beta: float) -> "OverlapHistogram":
        return cls(n_sites, beta, np.zeros(N_BINS), 0.0)

    def add(self, q: float, weight: float = 1.0) -> None:
        self.counts[_bin_of(q)] += weight
        self.total_weight += weight

    def probability(self) -> np.ndarray:
        if self.total_weight <= 0:
            raise ValidationError("empty histogram")
        return self.counts / self.total_weight

    def density(self) -> np.ndarray:
        """P(q) with the non-negative half normalized to unit integral.

        The designed instances put essentially all overlap mass at q >= 0,
        so the convention integral_0^1 P(q) dq = 1 keeps densities comparable
        across sizes.  If (pathologically) no mass lands there, fall back to
        normalizing over the full range instead of dividing by zero.
        """
        if self.total_weight <= 0:
            raise ValidationError("empty histogram")
        positive = float(self.counts[N_BINS // 2 :].sum())
        norm = positive if positive > 0 else self.total_weight
        return self.counts / (norm * BIN_WIDTH)

    def merge(self, other: "OverlapHistogram") -> "OverlapHistogram":
        if (self.n_sites, self.beta) != (other.n_sites, other.beta):
            raise ValidationError("histograms from different ensembles cannot merge")
        return OverlapHistogram(
            self.n_sites,
            self.beta,
            self.counts + other.counts,
            self.total_weight + other.total_weight,
        )


def sample_overlap_distribution(
    inst: ProblemInstance,
    sweeps: int,
    rng: np.random.Generator,
    ladder: Schedule | None = None,
    n_cold: int = COLD_LEVELS,
) -> OverlapHistogram:
    """Estimate P(q) at the coldest ladder temperature.

    Runs two tempered chains that never exchange configurations with each
    other (cluster moves between them would correlate exactly the quantity
    being measured).  Within each chain, a second replica per temperature
    plus equal-temperature cluster moves at the ``n_cold`` coldest levels
    lets the chain hop between distant valleys that single-flip dynamics
    cannot reach on these instances; the moves preserve each replica's
    Boltzmann marginal, so the overlap stays unbiased.  The first half of
    the sweeps is burn-in; afterwards each sweep contributes one overlap
    between the chains' coldest replicas.
    """
    if sweeps < 100:
        raise ValidationError(f"overlap sampling needs >= 100 sweeps, got {sweeps}")
    ladder = default_ladder() if ladder is None else ladder
    betas = ladder.betas
    if np.any(betas <= 0):
        raise ValidationError("overlap sampling needs strictly positive betas")
    nt = len(betas)
    if not 0 <= n_cold <= nt:
        raise ValidationError(f"n_cold must be in 0..{nt}, got {n_cold}")

    prob = compiled_problem(inst)
    off = inst.max_abs_delta
    tables = acceptance_table(betas, prob.scale, off)
    inv_scale = 1.0 / prob.scale
    streams = rng.spawn(2)

    states = np.empty((2, 2, nt, inst.n), dtype=np.int8)
    energies = np.empty((2, 2, nt), dtype=np.int64)
    ci, cj, cJ = inst.coupling_arrays
    for c in range(2):
        states[c] = (streams[c].integers(0, 2, size=(2, nt, inst.n)) * 2 - 1).astype(np.int8)
        s64 = states[c].astype(np.int64)
        energies[c] = -(s64[:, :, ci] * s64[:, :, cj]) @ cJ - s64 @ prob.hv

    members = np.empty(inst.n, dtype=np.int64)
    in_cluster = np.zeros(inst.n, dtype=np.bool_)

    burn_in = sweeps // 2
    hist = OverlapHistogram.empty(inst.n, float(betas[-1]))
    for s in range(sweeps):
        for c in range(2):
            for r in range(2):
                _pt_round(
                    states[c, r], energies[c, r], prob.indptr, prob.nbr, prob.jv, prob.hv,
                    tables, off, betas, inv_scale, streams[c],
                )
            for t in range(nt - 1, nt - 1 - n_cold, -1):
                de_a, de_b, _, _ = _cluster_pair_move(
                    states[c, 0, t], states[c, 1, t], prob.indptr, prob.nbr, prob.jv, prob.hv,
                    0.0, streams[c], members, in_cluster,
                )
                energies[c, 0, t] += de_a
                energies[c, 1, t] += de_b
        if s >= burn_in:
            hist.add(float(spin_overlap(states[0, 0, nt - 1], states[1, 0, nt - 1])))
    return hist


def _fwht(values: np.ndarray) -> np.ndarray:
    """Fast Walsh-Hadamard transform (unnormalized, self-inverse up to N)."""
    a = values.astype(np.float64, copy=True)
    half = 1
    while half < a.size:
        b = a.reshape(-1, 2, half)
        top = b[:, 0, :] + b[:, 1, :]
        bottom = b[:, 0, :] - b[:, 1, :]
        a = np.stack([top, bottom], axis=1).reshape(-1)
        half *= 2
    return a


def exact_overlap_distribution(inst: ProblemInstance, beta: float) -> OverlapHistogram:
    """Exact P(q) for a tiny instance, with no sampling error.

    The overlap between states x and y depends only on the XOR popcount of
    their bit encodings, so P(q) is the XOR-autocorrelation of the Boltzmann
    distribution collapsed onto popcount classes.  The autocorrelation comes
    from one squared Walsh-Hadamard transform pass: O(n 2^n) instead of the
    O(4^n) double sum over state pairs.
    """
    if inst.n > EXACT_SITE_LIMIT:
        raise ValidationError(
            f"exact overlap enumeration supports at most {EXACT_SITE_LIMIT} sites, got {inst.n}"
        )
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    states = enumerate_states(inst.n).astype(np.int64)
    ci, cj, cJ = inst.coupling_arrays
    energies = -(states[:, ci] * states[:, cj]) @ cJ - states @ inst.field_array
    weights = np.exp(-beta * (energies - energies.min()) / inst.scale)
    weights /= weights.sum()

    transformed = _fwht(weights)
    pair_mass = np.maximum(_fwht(transformed * transformed) / weights.size, 0.0)

    popcount = (states > 0).sum(axis=1)
    overlaps = (inst.n - 2 * popcount) / inst.n
    bins = np.rint((overlaps + 1.0) * 50.0).astype(np.int64)
    hist = OverlapHistogram.empty(inst.n, beta)
    np.add.at(hist.counts, bins, pair_mass)
    hist.total_weight = float(pair_mass.sum())
    return hist


@dataclass
class PeakReport:
    """Peaks of a smoothed P(q); ``multi_peak`` is the per-instance verdict."""

    positions: list[float]
    heights: list[float]

    @property
    def multi_peak(self) -> bool:
        return len(self.positions) >= 2


def classify_peaks(
    hist: OverlapHistogram,
    smooth_sigma_q: float = 0.02,
    height_fraction: float = 0.10,
    min_separation_q: float = 0.10,
) -> PeakReport:
    """Find the peaks of P(q) after light Gaussian smoothing.

    Smoothing uses zero padding so a spike in the q = 1 bin stays a peak at
    the array edge; candidates below ``height_fraction`` of the tallest peak
    or closer than ``min_separation_q`` to a taller one are discarded.
    """
    if smooth_sigma_q < 0 or not 0 < height_fraction <= 1 or min_separation_q <= 0:
        raise ValidationError("bad peak-classification parameters")
    density = hist.density()
    smoothed = gaussian_filter1d(density, smooth_sigma_q / BIN_WIDTH, mode="constant", cval=0.0)
    padded = np.concatenate([[0.0], smoothed, [0.0]])
    distance = max(1, round(min_separation_q / BIN_WIDTH))
    idx, _ = find_peaks(padded, height=height_fraction * padded.max(), distance=distance)
    idx = idx - 1
    return PeakReport(
        positions=[float(BIN_CENTERS[i]) for i in idx],
        heights=[float(smoothed[i]) for i in idx],
    )


@dataclass
class PeakFraction:
    fraction: float
    ci: tuple[float, float]
    n_instances: int
    verdicts: list[bool]


def peak_fraction(reports: Sequence) -> PeakFraction:
    """Fraction of instances with a multi-peak P(q), with Wilson 95% CI.

    Accepts :class:`PeakReport` objects or plain booleans.  Fewer than 10
    instances cannot support the interval comparison downstream, so that is
    rejected rather than silently widened.
    """
    from .tts import wilson_interval

    verdicts = [bool(getattr(r, "multi_peak", r)) for r in reports]
    if len(verdicts) < 10:
        raise ValidationError(
            f"peak-fraction estimates need at least 10 instances, got {len(verdicts)}"
        )
    k = sum(verdicts)
    return PeakFraction(k / len(verdicts), wilson_interval(k, len(verdicts)), len(verdicts), verdicts)
