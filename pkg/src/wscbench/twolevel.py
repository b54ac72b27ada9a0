"""Closed two-level model of the annealing bottleneck, with dephasing noise.

A weak-strong network's slow degree of freedom is the tunnel between the
false and true valleys; across the anneal it reduces to a two-level system
whose coupling alpha = 2^(-n/2) shrinks exponentially with the number of
sites taking part in the tunnel event.  The model is cheap to integrate
exactly, which makes it the yardstick for how coherence (and per-site
dephasing) moves the scaling curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .instance import ValidationError
from .tts import UNSOLVED, is_unsolved, repetitions


def tunneling_amplitude(n: int) -> float:
    """alpha = 2^(-n/2): the matrix element between the two valleys."""
    if n < 1:
        raise ValidationError(f"need at least one site, got {n}")
    return 2.0 ** (-n / 2)


def hamiltonian(s: float, n: int) -> np.ndarray:
    """2x2 Hamiltonian at anneal fraction s in [0, 1].

    Basis: index 0 is the true valley (the target), index 1 the false one.
    At s = 0 the ground state is (alpha, sqrt(1-alpha^2)); at s = 1 the
    valleys decouple and the target is (1, 0).
    """
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"anneal fraction must be in [0, 1], got {s}")
    a = tunneling_amplitude(n)
    off = -(1.0 - s) * a * math.sqrt(1.0 - a * a)
    return np.array(
        [
            [-s - (1.0 - s) * a * a, off],
            [off, -(1.0 - s) * (1.0 - a * a)],
        ]
    )


def gap(s: float, n: int) -> float:
    """Exact spectral gap sqrt((1-2s)^2 + 4 s (1-s) alpha^2)."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"anneal fraction must be in [0, 1], got {s}")
    a = tunneling_amplitude(n)
    return math.sqrt((1.0 - 2.0 * s) ** 2 + 4.0 * s * (1.0 - s) * a * a)


def min_gap(n: int) -> tuple[float, float]:
    """The avoided-crossing minimum: gap alpha at s = 1/2 (both exact)."""
    return tunneling_amplitude(n), 0.5


@njit(cache=True)
def _evolve(alpha: float, t_total: float, dt: float) -> tuple[float, float]:
    """Integrate the Schroedinger equation with exact midpoint-step unitaries.

    Each step applies exp(-i H(s_mid) dt) in closed form (2x2 Pauli
    decomposition), so the only discretization error is the time dependence
    of H within a step; the step itself is exactly unitary.
    Returns (success probability, final norm).
    """
    steps = int(round(t_total / dt))
    h = t_total / steps
    root = math.sqrt(1.0 - alpha * alpha)
    phi0 = complex(alpha, 0.0)
    phi1 = complex(root, 0.0)
    for k in range(steps):
        s = (k + 0.5) * h / t_total
        h00 = -s - (1.0 - s) * alpha * alpha
        h11 = -(1.0 - s) * (1.0 - alpha * alpha)
        c = -(1.0 - s) * alpha * root
        m = 0.5 * (h00 + h11)
        d = 0.5 * (h00 - h11)
        w = math.sqrt(d * d + c * c)
        phase = complex(math.cos(m * h), -math.sin(m * h))
        if w == 0.0:
            phi0 *= phase
            phi1 *= phase
            continue
        cw = math.cos(w * h)
        sw = math.sin(w * h) / w
        new0 = cw * phi0 - 1j * sw * (d * phi0 + c * phi1)
        new1 = cw * phi1 - 1j * sw * (c * phi0 - d * phi1)
        phi0 = phase * new0
        phi1 = phase * new1
    norm = abs(phi0) ** 2 + abs(phi1) ** 2
    return abs(phi0) ** 2, norm


def integrate_schrodinger(n: int, t_total: float, dt: float) -> tuple[float, float]:
    """Anneal the two-level model for time ``t_total``.

    Starts in the exact s = 0 ground state and returns (success probability
    of ending in the target valley, final state norm).  ``dt`` is snapped to
    divide ``t_total`` exactly.
    """
    if t_total <= 0 or dt <= 0 or dt > t_total:
        raise ValidationError(f"need 0 < dt <= t_total, got dt={dt}, t_total={t_total}")
    return _evolve(tunneling_amplitude(n), float(t_total), float(dt))


def noisy_success(p_succ: float, n: int, q: float) -> float:
    """Success after independent per-site dephasing: p (1-q)^n.

    Each of the n sites decoheres the tunnel event independently with
    probability q, and any single hit spoils the coherent transfer.
    """
    if not 0.0 <= q < 1.0:
        raise ValidationError(f"noise rate must be in [0, 1), got {q}")
    if not 0.0 <= p_succ <= 1.0:
        raise ValidationError(f"success probability must be in [0, 1], got {p_succ}")
    if n < 1:
        raise ValidationError(f"need at least one site, got {n}")
    return p_succ * (1.0 - q) ** n


@dataclass(frozen=True)
class CurvePoint:
    n: int
    sqrt_n: float
    q: float
    p_succ: float
    p_succ_noisy: float
    tts: float


def double_scaling_curve(
    n_max: int = 16,
    t_ann: float = 500.0,
    dt: float = 0.01,
    noise: Sequence[float] = (0.0, 0.1),
) -> list[CurvePoint]:
    """tts(sqrt n) of the coherent model at each dephasing rate.

    One integration per size; the noise factor is applied analytically, so
    adding rates is free.  tts uses the same 99%-confidence repetition count
    as the Monte Carlo benchmarks, with the per-run budget ``t_ann``.
    """
    if n_max < 1:
        raise ValidationError(f"need at least one size, got n_max={n_max}")
    points: list[CurvePoint] = []
    for n in range(1, n_max + 1):
        p, _ = integrate_schrodinger(n, t_ann, dt)
        for q in noise:
            p_noisy = noisy_success(p, n, q)
            reps = repetitions(p_noisy)
            tts = UNSOLVED if is_unsolved(reps) else t_ann * reps
            points.append(CurvePoint(n, math.sqrt(n), q, p, p_noisy, tts))
    return points
