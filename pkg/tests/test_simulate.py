"""Monte Carlo recursion traces and the estimators that sit on top of them.

Estimator checks compare single seeded traces against closed forms.  The
seeds are regression inputs chosen once and calibrated: at 1e5 post-burn-in
samples the slowly mixing reference parameters leave only a modest margin
inside the quoted tolerances, so reseeding requires recalibration.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from swarmpattern import (
    AttractorMoments,
    DegenerateParameterError,
    FixedAttractors,
    IidUniformAttractors,
    IpsoParams,
    MovementPattern,
    RandomWalkAttractors,
    SampleError,
    SimConfig,
    SimTrace,
    autocorrelation,
    empirical_autocorrelation,
    empirical_focus,
    empirical_moments,
    empirical_movement_distance,
    expectation_fixed_point,
    iid_uniform_for_moments,
    ipso_to_moments,
    rho1,
    simulate,
    solve_coefficients,
    variance_fixed_point,
)

SLOW_MIXING = IpsoParams(0.73084, 1.6443, 1.0)
FAST_MIXING = IpsoParams(0.98237, 0.19824, 1.0)
REFERENCE = IpsoParams(0.7298, 1.49618, 1.0)

WIDE_IID = IidUniformAttractors((-9.0, 11.0), (-5.0, 15.0))
WALK = RandomWalkAttractors(p0=1.0, g0=5.0)

LONG = SimConfig(iterations=101_000, burn_in=1000, seed=0)


def _constant_trace(value, n):
    pad = np.full(n, np.nan)
    return SimTrace(np.full(n, float(value)), pad, pad)


class TestSimulate:
    def test_same_seed_is_bit_identical(self):
        config = SimConfig(iterations=5000, burn_in=0, seed=1234)
        first = simulate(SLOW_MIXING, WIDE_IID, config)
        second = simulate(SLOW_MIXING, WIDE_IID, config)
        assert np.array_equal(first.positions, second.positions)
        assert np.array_equal(first.p_values, second.p_values, equal_nan=True)
        assert np.array_equal(first.g_values, second.g_values, equal_nan=True)

    def test_identity_recursion_never_moves(self):
        config = SimConfig(iterations=500, burn_in=0, seed=0, x0=3.7, x1=3.7)
        trace = simulate(IpsoParams(0.0, 0.0, 1.0), FixedAttractors(1.0, 2.0), config)
        assert np.all(trace.positions == 3.7)
        assert not trace.diverged

    def test_fixed_equal_attractors_contract_onto_them(self):
        trace = simulate(IpsoParams(0.0, 1.0, 1.0), FixedAttractors(4.0, 4.0),
                         SimConfig(iterations=20_000, burn_in=1000, seed=0))
        mean, variance = empirical_moments(trace, 1000)
        assert mean == pytest.approx(4.0, abs=1e-9)
        assert variance == pytest.approx(0.0, abs=1e-9)

    def test_trace_layout(self):
        trace = simulate(SLOW_MIXING, WIDE_IID, SimConfig(iterations=100, burn_in=0, seed=9))
        assert len(trace) == 100
        # The two seed positions predate any attractor draw.
        assert np.all(np.isnan(trace.p_values[:2]))
        assert np.all(np.isnan(trace.g_values[:2]))
        assert np.all(np.isfinite(trace.p_values[2:]))
        with pytest.raises(ValueError):
            trace.positions[0] = 0.0

    def test_divergence_truncates_and_flags(self):
        trace = simulate(IpsoParams(2.0, 0.1, 1.0), WIDE_IID,
                         SimConfig(iterations=5000, burn_in=0, seed=0))
        assert trace.diverged
        assert len(trace) < 5000
        assert len(trace.p_values) == len(trace.positions)
        last = trace.positions[-1]
        assert not np.isfinite(last) or abs(last) > 1e100

    def test_config_validation(self):
        with pytest.raises(ValueError, match="iterations must be at least 2"):
            SimConfig(iterations=1, burn_in=0, seed=0)
        with pytest.raises(ValueError, match="burn_in must satisfy"):
            SimConfig(iterations=10, burn_in=10, seed=0)
        with pytest.raises(ValueError, match="seed must fit in 64 bits"):
            SimConfig(iterations=10, burn_in=0, seed=2 ** 64)
        with pytest.raises(ValueError, match="x0 must be finite when given"):
            SimConfig(iterations=10, burn_in=0, seed=0, x0=float("nan"))

    def test_process_validation(self):
        with pytest.raises(ValueError, match="p_range must be a finite ordered interval"):
            IidUniformAttractors((2.0, 1.0), (0.0, 1.0))
        with pytest.raises(ValueError, match="step_range must be a finite ordered interval"):
            RandomWalkAttractors(0.0, 1.0, step_range=(1.0, -1.0))
        with pytest.raises(ValueError, match="must be finite"):
            FixedAttractors(float("inf"), 0.0)

    def test_trace_arrays_must_align(self):
        with pytest.raises(ValueError, match="share one length"):
            SimTrace(np.zeros(3), np.zeros(2), np.zeros(3))


class TestProcessMoments:
    def test_iid_uniform_round_trip(self):
        attractors = AttractorMoments(1.5, 0.25, -2.0, 3.0)
        process = iid_uniform_for_moments(attractors)
        back = process.moments()
        assert back.mu_p == pytest.approx(1.5, rel=1e-12)
        assert back.sigma_p == pytest.approx(0.25, rel=1e-12)
        assert back.mu_g == pytest.approx(-2.0, rel=1e-12)
        assert back.sigma_g == pytest.approx(3.0, rel=1e-12)

    def test_fixed_attractors_have_no_spread(self):
        moments = FixedAttractors(2.0, -1.0).moments()
        assert moments.mu_p == 2.0 and moments.sigma_p == 0.0
        assert moments.mu_g == -1.0 and moments.sigma_g == 0.0


class TestEmpiricalMoments:
    def test_constant_trace_has_zero_variance(self):
        mean, variance = empirical_moments(_constant_trace(2.5, 50), 0)
        assert mean == 2.5 and variance == 0.0

    def test_reference_run_matches_fixed_points(self):
        coeffs = ipso_to_moments(REFERENCE)
        attractors = AttractorMoments(0.0, 1.0, 0.0, 1.0)
        trace = simulate(REFERENCE, iid_uniform_for_moments(attractors),
                         SimConfig(iterations=101_000, burn_in=1000, seed=27))
        mean, variance = empirical_moments(trace, 1000)
        v_x = variance_fixed_point(coeffs, attractors)
        standard_error = math.sqrt(variance / (len(trace) - 1000))
        assert abs(mean - expectation_fixed_point(coeffs, attractors)) < 3 * standard_error
        assert variance == pytest.approx(v_x, rel=0.05)
        # The same run also carries the movement-distance law.
        movement = empirical_movement_distance(trace, 1000)
        assert movement == pytest.approx(2.0 * v_x * (1.0 - rho1(coeffs)), rel=0.05)

    def test_needs_two_samples(self):
        with pytest.raises(SampleError, match="post-burn-in samples"):
            empirical_moments(_constant_trace(0.0, 3), 2)


class TestEmpiricalAutocorrelation:
    def test_lag1_anchor_slow_mixing(self):
        trace = simulate(SLOW_MIXING, WIDE_IID, LONG)
        estimate = empirical_autocorrelation(trace, 1000, 1)
        analytic = autocorrelation(ipso_to_moments(SLOW_MIXING), 1)
        assert estimate[1] == pytest.approx(analytic[1], abs=0.02)

    def test_lag1_anchor_fast_mixing(self):
        trace = simulate(FAST_MIXING, WIDE_IID, LONG)
        estimate = empirical_autocorrelation(trace, 1000, 1)
        analytic = autocorrelation(ipso_to_moments(FAST_MIXING), 1)
        assert estimate[1] == pytest.approx(analytic[1], abs=0.02)

    def test_matches_pearson_per_lag(self):
        trace = simulate(REFERENCE, WIDE_IID, SimConfig(iterations=6000, burn_in=1000, seed=3))
        estimate = empirical_autocorrelation(trace, 1000, 10)
        window = trace.positions[1000:]
        assert estimate[0] == 1.0
        for lag in range(1, 11):
            reference = np.corrcoef(window[:-lag], window[lag:])[0, 1]
            assert estimate[lag] == pytest.approx(reference, abs=1e-10)

    def test_attractor_process_does_not_move_the_correlations(self):
        # Correlations depend on the coefficients alone; iid and walk runs
        # must agree within the sum of their individual tolerances.
        config = SimConfig(iterations=101_000, burn_in=1000, seed=2)
        for params in (SLOW_MIXING, FAST_MIXING):
            via_iid = empirical_autocorrelation(simulate(params, WIDE_IID, config), 1000, 20)
            via_walk = empirical_autocorrelation(simulate(params, WALK, config), 1000, 20)
            gap = max(abs(via_iid[i] - via_walk[i]) for i in range(1, 21))
            assert gap < 0.06

    def test_window_size_guard(self):
        with pytest.raises(SampleError, match="post-burn-in samples"):
            empirical_autocorrelation(_constant_trace(1.0, 10), 0, 8)

    def test_constant_series_has_no_correlation_structure(self):
        with pytest.raises(SampleError, match="zero-variance series"):
            empirical_autocorrelation(_constant_trace(1.0, 50), 0, 2)

    def test_constant_lag_window_is_reported(self):
        trace = SimTrace(np.array([1.0, 1.0, 1.0, 2.0]), np.full(4, np.nan),
                         np.full(4, np.nan))
        with pytest.raises(SampleError, match="zero variance in the lag-1 window"):
            empirical_autocorrelation(trace, 0, 1)


class TestEmpiricalMovementDistance:
    def test_constant_trace_never_moves(self):
        assert empirical_movement_distance(_constant_trace(3.0, 20), 0) == 0.0

    def test_high_correlation_moves_less_than_it_spreads(self):
        trace = simulate(FAST_MIXING, WIDE_IID, LONG)
        _, variance = empirical_moments(trace, 1000)
        assert empirical_movement_distance(trace, 1000) < variance

    def test_needs_two_samples(self):
        with pytest.raises(SampleError, match="post-burn-in samples"):
            empirical_movement_distance(_constant_trace(0.0, 2), 1)


class TestEmpiricalFocus:
    def test_balanced_pulls_split_the_attractors_evenly(self):
        params = solve_coefficients(MovementPattern(0.3, 1.0, 1.0), alpha_sign=1)
        attractors = AttractorMoments(0.0, 1.0, 10.0, 1.0)
        trace = simulate(params, iid_uniform_for_moments(attractors), LONG)
        assert empirical_focus(trace, 1000, 0.0, 10.0) == pytest.approx(1.0, abs=0.10)

    def test_degenerate_when_mean_sits_on_the_global_attractor(self):
        with pytest.raises(DegenerateParameterError, match="coincides with mu_g"):
            empirical_focus(_constant_trace(10.0, 50), 0, 0.0, 10.0)
