"""Rate aggregation, trial-function fitting, resource arithmetic."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shuttleqec import analysis
from shuttleqec.analysis import FitResult
from shuttleqec.noise import NoiseParams


class TestWilson:
    def test_zero_failures(self):
        pt = analysis.logical_rate(0, 10_000)
        assert pt.p_L == 0.0
        assert pt.ci_low == 0.0
        assert pt.ci_high > 0.0

    def test_hundred_in_ten_thousand(self):
        pt = analysis.logical_rate(100, 10_000)
        assert pt.p_L == pytest.approx(0.01)
        # [DERIVED] Wilson 95% bounds for 100/10000
        assert pt.ci_low == pytest.approx(0.008229, abs=2e-5)
        assert pt.ci_high == pytest.approx(0.012147, abs=2e-5)

    def test_all_failures(self):
        pt = analysis.logical_rate(10_000, 10_000)
        assert pt.p_L == 1.0
        assert pt.ci_high == 1.0

    @given(st.integers(1, 10_000), st.integers(0, 10_000))
    @settings(max_examples=100, deadline=None)
    def test_interval_brackets_estimate(self, shots, failures):
        failures = min(failures, shots)
        pt = analysis.logical_rate(failures, shots)
        assert 0.0 <= pt.ci_low <= pt.p_L <= pt.ci_high <= 1.0


class TestPerRound:
    def test_identity_cases(self):
        assert analysis.per_round_per_qubit(0.0, 3, 8) == 0.0
        assert analysis.per_round_per_qubit(0.37, 1, 1) == pytest.approx(0.37)

    @given(st.floats(1e-9, 1 - 1e-9), st.integers(1, 6), st.integers(1, 40))
    @settings(max_examples=200, deadline=None)
    def test_inversion_identity(self, P, k, d):
        p = analysis.per_round_per_qubit(P, k, d)
        assert 1 - (1 - p) ** (k * d) == pytest.approx(P, abs=1e-12)

    def test_monotonicity(self):
        assert analysis.per_round_per_qubit(0.2, 1, 5) < \
            analysis.per_round_per_qubit(0.3, 1, 5)
        assert analysis.per_round_per_qubit(0.2, 2, 5) < \
            analysis.per_round_per_qubit(0.2, 1, 5)


class TestFit:
    def make_truth(self):
        return FitResult(A=50.0, alpha=0.14, beta=0.004, gamma=0.5,
                         delta=0.4, residual=0.0)

    def test_recovers_synthetic(self):
        truth = self.make_truth()
        ds = [3, 5, 7, 9, 11]
        fit = analysis.fit_trial([(d, truth.predict(d)) for d in ds], seed=1)
        for d in ds:
            assert fit.predict(d) == pytest.approx(truth.predict(d),
                                                   rel=0.01)

    def test_monotone_on_monotone_data(self):
        truth = self.make_truth()
        ds = [3, 5, 7, 9, 11]
        fit = analysis.fit_trial([(d, truth.predict(d)) for d in ds], seed=1)
        vals = [fit.predict(d) for d in ds]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_constant_data(self):
        fit = analysis.fit_trial([(d, 1e-3) for d in (3, 5, 7, 9, 11)],
                                 seed=2)
        assert fit.predict(7) == pytest.approx(1e-3, rel=0.01)

    def test_zero_points_excluded(self):
        pts = [(3, 1e-2), (5, 3e-3), (7, 1e-3), (9, 3e-4), (11, 1e-4),
               (13, 0.0)]
        fit = analysis.fit_trial(pts, seed=0)
        assert fit.excluded == (13.0,)
        assert fit.n_points == 5

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            analysis.fit_trial([(3, 1e-3), (5, 1e-4)])
        with pytest.raises(ValueError):
            analysis.fit_trial([(3, 0.0), (5, 0.0), (7, 0.0), (9, 0.0),
                                (11, 0.0)])


class TestSelectDistance:
    def test_picks_smallest_odd(self):
        truth = FitResult(A=1.0, alpha=0.1, beta=0.0, gamma=0.5, delta=0.0,
                          residual=0.0)
        # p_log(d) = 0.1^(d/2): d=11 gives 3.2e-6 <= 1e-5, d=9 gives 3e-5
        assert analysis.select_distance(truth, 1e-5) == 11

    def test_unreachable_when_curve_turns(self):
        # base > 1 at large d: rate eventually grows, target never met
        turning = FitResult(A=1e-2, alpha=0.5, beta=0.06, gamma=0.5,
                            delta=0.0, residual=0.0)
        assert analysis.select_distance(turning, 1e-30) == "unreachable"


class TestResources:
    def test_nisq_numbers(self):
        np_ = NoiseParams(p=1e-3, T2_star=20e-6)
        rep = analysis.resource_estimate("nisq-beating", np_)
        assert rep["patches"] == 130
        assert rep["distance"] == 9
        # [PAPER] N ~ 2e4 data qubits, within 5%
        assert rep["data_qubits"] == pytest.approx(2e4, rel=0.06)
        # [PAPER] p_mag ~ p + p_sh = 0.105%
        assert rep["p_mag"] == pytest.approx(1.054e-3, rel=1e-3)
        # formula value, with the paper's printed 6e-8 footnoted
        assert rep["distilled_error_15_to_1"] == pytest.approx(
            35 * rep["p_mag"] ** 3, rel=1e-12)
        assert "note" in rep

    def test_hubbard_target_rate(self):
        np_ = NoiseParams(p=1e-3, T2_star=20e-6)
        steep = FitResult(A=1.0, alpha=0.05, beta=1e-4, gamma=0.5,
                          delta=0.0, residual=0.0)
        rep = analysis.resource_estimate("hubbard-6x6", np_, fit=steep)
        # [PAPER] p_L < 0.1 / (288 * 10.27e8) = 3e-13
        assert rep["target_p_log"] == pytest.approx(3.38e-13, rel=0.01)
        assert rep["patches"] == 288
        d = rep["distance"]
        assert rep["physical_qubits"] == 288 * 4 * d * d
        assert rep["cycles"] == pytest.approx(10.27 * d * 1e8)

    def test_hubbard_needs_fit(self):
        with pytest.raises(ValueError):
            analysis.resource_estimate("hubbard-6x6", NoiseParams())

    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            analysis.resource_estimate("nope", NoiseParams())


class TestCsv:
    def test_roundtrippable_floats(self, tmp_path):
        rows = [(3, 1e-3, 20e-6, 0.00123456789, 0.001, 0.0015)]
        path = tmp_path / "curve.csv"
        text = analysis.curve_to_csv(rows, path)
        assert path.read_text() == text
        header, line = text.strip().split("\n")
        assert header == "d,p,T2_star,p_log,ci_low,ci_high"
        vals = line.split(",")
        assert float(vals[3]) == 0.00123456789
