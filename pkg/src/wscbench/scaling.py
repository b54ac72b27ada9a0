"""Scaling fits of log10(tts) against sqrt(n), and solver comparisons.

The working hypothesis for these benchmarks is stretched-exponential cost,
log10 tts = a + b*sqrt(n); the slope b is the headline number.  A variant
adds a logarithmic correction term c*log10(sqrt(n)) to absorb prefactors.
Fits run on the largest sizes (``last_k``) because small sizes are dominated
by constant overheads.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .instance import ValidationError
from .tts import nearest_rank

CONDITION_WARN = 1e8


@dataclass
class FitResult:
    model: str
    coef: dict[str, float]
    ci: dict[str, tuple[float, float]]
    ci_method: str
    points: list[tuple[float, float]]
    residual_rms: float
    condition_number: float
    warnings: list[str] = field(default_factory=list)

    def predict(self, n: float) -> float:
        root = math.sqrt(n)
        out = self.coef["a"] + self.coef["b"] * root
        if "c" in self.coef:
            out += self.coef["c"] * math.log10(root)
        return out


_COEF_NAMES = {"linear": ("a", "b"), "log-corrected": ("a", "b", "c")}


def _design(model: str, n_values: np.ndarray) -> np.ndarray:
    root = np.sqrt(n_values)
    if model == "linear":
        return np.column_stack([np.ones_like(root), root])
    return np.column_stack([np.ones_like(root), root, np.log10(root)])


def _select(points: Sequence[tuple[float, float]], last_k: int) -> list[tuple[float, float]]:
    pts = sorted((float(n), float(y)) for n, y in points)
    if last_k < 0:
        raise ValidationError(f"last_k must be >= 0, got {last_k}")
    return pts[-last_k:] if last_k else pts


def _fit(
    model: str,
    points: Sequence[tuple[float, float]],
    last_k: int,
    per_instance: Mapping[float, Sequence[float]] | None,
    percentile: float,
    n_bootstrap: int,
    rng: np.random.Generator | None,
) -> FitResult:
    names = _COEF_NAMES[model]
    pts = _select(points, last_k)
    if len(pts) < len(names):
        raise ValidationError(
            f"{model} fit needs at least {len(names)} points after selection, got {len(pts)}"
        )
    n_values = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(n_values <= 0) or not np.all(np.isfinite(y)):
        raise ValidationError("fit points need positive sizes and finite log10 tts")

    x = _design(model, n_values)
    if np.linalg.matrix_rank(x) < len(names):
        raise ValidationError(f"rank-deficient basis for the {model} fit (degenerate sizes)")
    notes: list[str] = []
    cond = float(np.linalg.cond(x))
    if cond > CONDITION_WARN:
        notes.append(f"ill-conditioned basis (condition number {cond:.3g})")
        _warnings.warn(notes[-1], RuntimeWarning, stacklevel=3)

    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    residuals = y - x @ beta
    rms = float(np.sqrt(np.mean(residuals**2)))
    coef = dict(zip(names, map(float, beta)))

    if per_instance is not None:
        rng = np.random.default_rng(0) if rng is None else rng
        groups = {float(n): np.asarray(per_instance[n], dtype=float) for n in n_values}
        boot = np.empty((n_bootstrap, len(names)))
        for b in range(n_bootstrap):
            yb = np.empty(len(n_values))
            for k, n in enumerate(n_values):
                vals = groups[float(n)]
                sample = vals[rng.integers(0, len(vals), size=len(vals))]
                yb[k] = math.log10(nearest_rank(np.sort(sample), percentile))
            boot[b], *_ = np.linalg.lstsq(x, yb, rcond=None)
        lo = np.quantile(boot, 0.025, axis=0)
        hi = np.quantile(boot, 0.975, axis=0)
        ci = {
            name: (min(float(l), coef[name]), max(float(h), coef[name]))
            for name, l, h in zip(names, lo, hi)
        }
        method = "bootstrap"
    else:
        dof = len(pts) - len(names)
        if dof > 0:
            sigma2 = float(residuals @ residuals) / dof
            cov = sigma2 * np.linalg.inv(x.T @ x)
            se = np.sqrt(np.diag(cov))
        else:
            se = np.zeros(len(names))
            notes.append("no residual degrees of freedom; CIs collapse to the estimate")
        z = 1.959963984540054
        ci = {name: (coef[name] - z * s, coef[name] + z * s) for name, s in zip(names, se)}
        method = "normal"

    return FitResult(
        model=model,
        coef=coef,
        ci=ci,
        ci_method=method,
        points=pts,
        residual_rms=rms,
        condition_number=cond,
        warnings=notes,
    )


def fit_linear(
    points: Sequence[tuple[float, float]],
    last_k: int = 3,
    per_instance: Mapping[float, Sequence[float]] | None = None,
    percentile: float = 50.0,
    n_bootstrap: int = 1000,
    rng: np.random.Generator | None = None,
) -> FitResult:
    """OLS of log10(tts) on sqrt(n) over the ``last_k`` largest sizes (0 = all).

    With ``per_instance`` (size -> raw per-instance tts values) the CIs come
    from a 1000-resample bootstrap that recomputes the percentile per size;
    otherwise they are normal-theory intervals from the OLS covariance.
    """
    return _fit("linear", points, last_k, per_instance, percentile, n_bootstrap, rng)


def fit_log_corrected(
    points: Sequence[tuple[float, float]],
    last_k: int = 0,
    per_instance: Mapping[float, Sequence[float]] | None = None,
    percentile: float = 50.0,
    n_bootstrap: int = 1000,
    rng: np.random.Generator | None = None,
) -> FitResult:
    """Like :func:`fit_linear` with an extra c*log10(sqrt(n)) basis term.

    Needs at least three points; warns (and records) when the basis is
    ill-conditioned, and rejects rank-deficient size sets outright.
    """
    return _fit("log-corrected", points, last_k, per_instance, percentile, n_bootstrap, rng)


@dataclass
class ComparisonRow:
    label: str
    slope: float
    ci: tuple[float, float]


@dataclass
class Comparison:
    """Solvers ranked by scaling slope, with CI-overlap caveats attached."""

    rows: list[ComparisonRow]
    indistinguishable: list[tuple[str, str]]


def compare_solvers(fits: Mapping[str, FitResult]) -> Comparison:
    """Rank fitted solvers by slope b; flag pairs whose slope CIs overlap
    as statistically indistinguishable."""
    if not fits:
        raise ValidationError("nothing to compare")
    rows = [ComparisonRow(label, f.coef["b"], f.ci["b"]) for label, f in fits.items()]
    rows.sort(key=lambda r: (r.slope, r.label))
    overlap = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            a, b = rows[i], rows[j]
            if a.ci[1] >= b.ci[0] and b.ci[1] >= a.ci[0]:
                overlap.append((a.label, b.label))
    return Comparison(rows=rows, indistinguishable=overlap)
