"""Tests for the sqrt(n) scaling fits."""

import math

import numpy as np
import pytest

from wscbench.instance import ValidationError
from wscbench.scaling import Comparison, compare_solvers, fit_linear, fit_log_corrected


def _linear_points(a, b, sizes):
    return [(n, a + b * math.sqrt(n)) for n in sizes]


class TestLinearFit:
    def test_exact_recovery(self):
        fit = fit_linear(_linear_points(-1.5, 0.35, [64, 144, 256, 400]), last_k=0)
        assert fit.coef["a"] == pytest.approx(-1.5, abs=1e-9)
        assert fit.coef["b"] == pytest.approx(0.35, abs=1e-9)
        assert fit.residual_rms < 1e-9

    def test_last_k_selects_largest_sizes(self):
        # Corrupt the smallest size; a last-3 fit must not see it.
        pts = _linear_points(-1.5, 0.35, [64, 144, 256, 400])
        pts[0] = (64, 99.0)
        fit = fit_linear(pts, last_k=3)
        assert fit.coef["b"] == pytest.approx(0.35, abs=1e-9)
        assert len(fit.points) == 3
        assert min(n for n, _ in fit.points) == 144

    def test_shift_equivariance(self):
        # Scaling every tts by 10 shifts the intercept by exactly one decade.
        base = _linear_points(-1.5, 0.35, [64, 144, 256])
        shifted = [(n, y + 1.0) for n, y in base]
        f0 = fit_linear(base, last_k=0)
        f1 = fit_linear(shifted, last_k=0)
        assert f1.coef["a"] == pytest.approx(f0.coef["a"] + 1.0, abs=1e-9)
        assert f1.coef["b"] == pytest.approx(f0.coef["b"], abs=1e-9)

    def test_predict(self):
        fit = fit_linear(_linear_points(0.5, 0.2, [64, 144, 256]), last_k=0)
        assert fit.predict(400) == pytest.approx(0.5 + 0.2 * 20.0, abs=1e-9)

    def test_normal_ci_brackets_estimate(self):
        rng = np.random.default_rng(11)
        pts = [(n, -1.0 + 0.3 * math.sqrt(n) + rng.normal(0, 0.05)) for n in [64, 144, 256, 400]]
        fit = fit_linear(pts, last_k=0)
        assert fit.ci_method == "normal"
        for name in ("a", "b"):
            lo, hi = fit.ci[name]
            assert lo <= fit.coef[name] <= hi
            assert hi > lo

    def test_two_point_fit_collapsed_ci(self):
        fit = fit_linear(_linear_points(0.0, 0.1, [64, 144]), last_k=0)
        assert fit.ci["b"] == (fit.coef["b"], fit.coef["b"])
        assert any("degrees of freedom" in w for w in fit.warnings)

    def test_bootstrap_ci(self):
        rng = np.random.default_rng(5)
        sizes = [64, 144, 256]
        per_instance = {
            n: list(rng.lognormal(mean=0.3 * math.sqrt(n) * math.log(10), sigma=0.4, size=30))
            for n in sizes
        }
        pts = [(n, math.log10(np.median(per_instance[n]))) for n in sizes]
        fit = fit_linear(
            pts, last_k=0, per_instance=per_instance, n_bootstrap=200, rng=np.random.default_rng(2)
        )
        assert fit.ci_method == "bootstrap"
        lo, hi = fit.ci["b"]
        assert lo <= fit.coef["b"] <= hi
        assert 0.1 < fit.coef["b"] < 0.5

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            fit_linear([(64, 1.0)], last_k=0)
        with pytest.raises(ValidationError):
            fit_linear(_linear_points(0, 0.1, [64, 144, 256]), last_k=-1)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            fit_linear([(64, 1.0), (144, math.inf)], last_k=0)


class TestLogCorrectedFit:
    def test_exact_recovery(self):
        pts = [
            (n, -0.8 + 0.25 * math.sqrt(n) + 0.6 * math.log10(math.sqrt(n)))
            for n in [64, 144, 256, 400]
        ]
        fit = fit_log_corrected(pts)
        assert fit.coef["a"] == pytest.approx(-0.8, abs=1e-9)
        assert fit.coef["b"] == pytest.approx(0.25, abs=1e-9)
        assert fit.coef["c"] == pytest.approx(0.6, abs=1e-9)

    def test_reduces_to_linear_when_no_correction(self):
        pts = _linear_points(-1.0, 0.3, [64, 144, 256, 400])
        fit = fit_log_corrected(pts)
        assert fit.coef["c"] == pytest.approx(0.0, abs=1e-8)

    def test_needs_three_points(self):
        with pytest.raises(ValidationError):
            fit_log_corrected(_linear_points(0, 0.1, [64, 144]))

    def test_degenerate_sizes_rejected(self):
        with pytest.raises(ValidationError, match="rank"):
            fit_log_corrected([(64, 1.0), (64, 1.1), (64, 0.9)])


class TestComparison:
    def _fit(self, b, half_width):
        pts = _linear_points(0.0, b, [64, 144, 256])
        fit = fit_linear(pts, last_k=0)
        fit.ci["b"] = (b - half_width, b + half_width)
        return fit

    def test_sorted_by_slope(self):
        cmp = compare_solvers({"sa": self._fit(0.40, 0.01), "pt-icm": self._fit(0.25, 0.01)})
        assert isinstance(cmp, Comparison)
        assert [r.label for r in cmp.rows] == ["pt-icm", "sa"]
        assert cmp.indistinguishable == []

    def test_overlap_flagged(self):
        cmp = compare_solvers({"sa": self._fit(0.30, 0.05), "pa": self._fit(0.27, 0.05)})
        assert ("pa", "sa") in cmp.indistinguishable

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            compare_solvers({})
