import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voterlab.dual_coalescer import sample_batch
from voterlab.estimators import (
    batch_means_stderr,
    dual_meeting_prob,
    exact_exceedance_prob,
    fit_scaling,
    magnetization_tail,
    mean_window_count,
    neglog_stderr,
    persistence_dual,
    persistence_series,
    resampled_exceedance_prob,
    tail_dual,
    tail_from_batch,
    tail_profile,
    tail_series,
    variance_identity_check,
)
from voterlab.forward_voter import TorusConfig, forward_covariance_mc
from voterlab.streams import replica_keys


class TestPersistenceDual:
    def test_preconditions(self):
        with pytest.raises(ValueError):
            persistence_dual(4.0, 0.5, 1, 1)
        with pytest.raises(ValueError):
            persistence_dual(4.0, 0.0, 100, 1)
        with pytest.raises(ValueError):
            persistence_dual(4.0, 1.0, 100, 1)

    def test_rho_near_one(self):
        est = persistence_dual(4.0, 1.0 - 1e-12, 200, 2)
        assert est.mean == pytest.approx(1.0, abs=1e-9)

    def test_tiny_horizon_tends_to_rho(self):
        est = persistence_dual(1e-6, 0.37, 2000, 3)
        assert est.mean == pytest.approx(0.37, abs=1e-4)

    def test_mean_bounded_by_rho(self):
        est = persistence_dual(8.0, 0.8, 3000, 4)
        assert est.mean <= 0.8

    def test_monotone_in_horizon(self):
        # longer horizons cannot have more persistence (statistically)
        short = persistence_dual(4.0, 0.5, 20_000, 5)
        long = persistence_dual(8.0, 0.5, 20_000, 6)
        assert long.mean < short.mean + 4 * math.hypot(short.stderr, long.stderr)


class TestExactExceedance:
    def brute_force(self, masses, rho, threshold):
        total = 0.0
        n = len(masses)
        for bits in itertools.product((0, 1), repeat=n):
            s = sum(m for m, b in zip(masses, bits) if b)
            if s >= threshold:
                k = sum(bits)
                total += rho**k * (1 - rho) ** (n - k)
        return total

    @given(
        n=st.integers(1, 10),
        rho=st.floats(0.05, 0.95),
        frac=st.floats(0.0, 1.2),
        seed=st.integers(0, 10_000),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force(self, n, rho, frac, seed):
        rng = np.random.default_rng(seed)
        masses = rng.random(n) + 0.01
        threshold = frac * masses.sum()
        fast = exact_exceedance_prob(masses, rho, threshold)
        slow = self.brute_force(masses, rho, threshold)
        assert fast == pytest.approx(slow, abs=1e-12)

    def test_edges(self):
        masses = np.array([2.0, 1.0])
        assert exact_exceedance_prob(masses, 0.3, 0.0) == 1.0
        assert exact_exceedance_prob(masses, 0.3, 3.5) == 0.0
        # single lineage at level just below the full mass: probability rho
        assert exact_exceedance_prob(np.array([5.0]), 0.42, 4.99) == 0.42
        with pytest.raises(ValueError):
            exact_exceedance_prob(np.ones(26), 0.5, 1.0)

    def test_resampling_agrees_with_exact(self):
        rng = np.random.default_rng(0)
        masses = rng.random(12)
        threshold = 0.55 * masses.sum()
        exact = exact_exceedance_prob(masses, 0.5, threshold)
        approx = resampled_exceedance_prob(masses, 0.5, threshold, 20_000, 1)
        stderr = math.sqrt(exact * (1 - exact) / 20_000)
        assert abs(approx - exact) < 4 * stderr


class TestTailDual:
    def test_preconditions(self):
        with pytest.raises(ValueError):
            tail_dual(8.0, 0.5, 0.5, 100, 8, 1)  # level == rho
        with pytest.raises(ValueError):
            tail_dual(8.0, 0.5, 0.4, 100, 8, 1)  # level < rho
        with pytest.raises(ValueError):
            tail_dual(8.0, 0.5, 1.0, 100, 8, 1)  # level == 1
        with pytest.raises(ValueError):
            tail_dual(8.0, 0.5, 0.75, 100, 0, 1)  # no marks

    def test_bounds_and_consistency(self):
        pers = persistence_dual(8.0, 0.5, 4000, 7)
        tail = tail_dual(8.0, 0.5, 0.75, 4000, 64, 7)
        assert pers.mean - 4 * pers.stderr <= tail.prob <= 1.0
        assert tail.replicas == 4000

    def test_monotone_in_level_on_shared_samples(self):
        ests = tail_profile(8.0, 0.5, [0.55, 0.7, 0.85, 0.95], 2000, 64, 8)
        probs = [e.prob for e in ests]
        assert all(a >= b for a, b in zip(probs, probs[1:]))

    def test_monotone_in_rho_on_shared_samples(self):
        keys = replica_keys(9, 2000)
        mark_keys = replica_keys(9, 2000, stream=1)
        batch = sample_batch(8.0, 2000, keys, want_masses=True)
        lo = tail_from_batch(batch, 0.45, 0.8, 64, mark_keys)
        hi = tail_from_batch(batch, 0.55, 0.8, 64, mark_keys)
        assert hi.prob >= lo.prob

    def test_key_arrays_rejected_for_multistream_ops(self):
        # a raw key array cannot be split into simulation and mark streams
        keys = replica_keys(9, 200)
        with pytest.raises(TypeError, match="substreams"):
            tail_dual(8.0, 0.5, 0.75, 200, 8, keys)
        with pytest.raises(TypeError, match="substreams"):
            tail_profile(8.0, 0.5, [0.75], 200, 8, keys)
        with pytest.raises(TypeError, match="substreams"):
            variance_identity_check(8.0, 0.5, 200, keys)


class TestWindowCounts:
    def test_mean_at_least_one(self):
        est = mean_window_count(16.0, 500, 10)
        assert est.mean >= 1.0

    def test_widening_window_grows_mean(self):
        keys = replica_keys(11, 800)
        batch = sample_batch(64.0, 800, keys, windows=[(32.0, 64.0), (16.0, 64.0)])
        half = batch.window_counts[batch.valid, 0].mean()
        wide = batch.window_counts[batch.valid, 1].mean()
        assert half <= wide


class TestFitScaling:
    def test_exact_power_law(self):
        ts = [100.0, 300.0, 1000.0, 3000.0, 10_000.0]
        points = [(t, t**-2.0, 0.0) for t in ts]
        fit = fit_scaling(points, "log")
        assert fit.slope == pytest.approx(2.0, rel=1e-10)
        assert fit.intercept == pytest.approx(0.0, abs=1e-9)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.slope_stderr == 0.0

    def test_exact_log_squared_law(self):
        ts = [100.0, 300.0, 1000.0, 3000.0, 10_000.0]
        points = [(t, math.exp(-0.3 * math.log(t) ** 2), 0.0) for t in ts]
        fit = fit_scaling(points, "log2")
        assert fit.slope == pytest.approx(0.3, rel=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    @given(
        slope=st.floats(0.05, 4.0),
        intercept=st.floats(-3.0, 3.0),
        model=st.sampled_from(["log", "log2"]),
    )
    @settings(max_examples=40, deadline=None)
    def test_recovers_synthetic_parameters(self, slope, intercept, model):
        ts = [50.0, 200.0, 900.0, 4000.0]
        points = []
        for t in ts:
            u = math.log(t) if model == "log" else math.log(t) ** 2
            y = intercept + slope * u
            if y > 500 or y < 0:  # keep p inside (0, 1]
                return
            points.append((t, math.exp(-y), 0.0))
        fit = fit_scaling(points, model)
        assert fit.slope == pytest.approx(slope, rel=1e-9, abs=1e-12)
        assert fit.intercept == pytest.approx(intercept, rel=1e-7, abs=1e-9)

    def test_zero_points_dropped_with_warning(self):
        points = [(100.0, 1e-3, 1e-4), (300.0, 1e-4, 1e-5),
                  (1000.0, 0.0, 0.0), (3000.0, 1e-6, 1e-7)]
        with pytest.warns(UserWarning, match="underflow"):
            fit = fit_scaling(points, "log")
        assert fit.n_points == 3

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            fit_scaling([(10.0, 0.1, 0.01), (100.0, 0.01, 0.001)], "log")
        with pytest.raises(ValueError):
            fit_scaling([(10.0, 0.1, 0.01)] * 5, "bad-model")

    def test_weighted_fit_downweights_noisy_points(self):
        # a wildly uncertain outlier should barely move the fit
        ts = [100.0, 300.0, 1000.0, 3000.0]
        clean = [(t, t**-1.0, 1e-6 * t**-1.0) for t in ts]
        noisy = clean + [(550.0, 550.0**-1.0 * 5.0, 10.0)]
        fit = fit_scaling(noisy, "log")
        assert fit.slope == pytest.approx(1.0, abs=1e-3)

    def test_residuals_accessor(self):
        ts = [100.0, 300.0, 1000.0]
        points = [(t, t**-1.5, 0.0) for t in ts]
        fit = fit_scaling(points, "log")
        assert np.allclose(fit.residuals(), 0.0, atol=1e-10)


class TestDeltaMethod:
    def test_neglog_stderr(self):
        assert neglog_stderr(0.1, 0.01) == pytest.approx(0.1)
        with pytest.raises(ValueError):
            neglog_stderr(0.0, 0.01)

    def test_delta_vs_bootstrap(self):
        # one configuration: -log of a persistence mean
        batch = sample_batch(16.0, 4000, 21)
        values = 0.5 ** batch.n_lineages[batch.valid].astype(np.float64)
        p = values.mean()
        plain_se = values.std(ddof=1) / math.sqrt(values.size)
        delta = plain_se / p
        rng = np.random.default_rng(5)
        boots = np.empty(2000)
        for b in range(boots.size):
            boots[b] = -math.log(
                values[rng.integers(0, values.size, values.size)].mean()
            )
        bootstrap = boots.std(ddof=1)
        assert abs(delta - bootstrap) / bootstrap < 0.2


class TestVarianceIdentity:
    def test_degenerate_densities(self):
        for rho in (0.0, 1.0):
            rep = variance_identity_check(16.0, rho, 500, 22)
            assert rep.lhs == pytest.approx(0.0, abs=1e-15)
            assert rep.rhs == pytest.approx(0.0, abs=1e-15)
            assert rep.passed

    def test_identity_holds(self):
        rep = variance_identity_check(36.0, 0.5, 4000, 23)
        assert rep.passed, f"lhs={rep.lhs} rhs={rep.rhs} se={rep.combined_stderr}"

    def test_replica_floor(self):
        with pytest.raises(ValueError):
            variance_identity_check(16.0, 0.5, 50, 1)


class TestMagnetizationTail:
    def test_extreme_level_redirects_to_persistence(self):
        mag = magnetization_tail(8.0, 1.0, 2000, 16, 24)
        pers = persistence_dual(8.0, 0.5, 2000, 24)
        assert mag.prob == pers.mean
        assert mag.level_alpha == 1.0

    def test_interior_level_matches_tail(self):
        mag = magnetization_tail(8.0, 0.5, 2000, 64, 25)
        tail = tail_dual(8.0, 0.5, 0.75, 2000, 64, 25)
        assert mag.prob == tail.prob

    def test_validation(self):
        with pytest.raises(ValueError):
            magnetization_tail(8.0, 0.0, 100, 8, 1)
        with pytest.raises(ValueError):
            magnetization_tail(8.0, 1.2, 100, 8, 1)
        # x -> 0+ drives the level to the density itself: rejected
        with pytest.raises(ValueError):
            magnetization_tail(8.0, 1e-17, 100, 8, 1)

    def test_deviation_rate_increases_with_level(self):
        # fitted decay slope I(x) grows with x (toward infinity at x=1)
        slopes = []
        for x in (0.2, 0.5, 0.8):
            points = []
            for t in (64.0, 256.0, 1024.0):
                est = magnetization_tail(t, x, 4000, 128, 26)
                points.append((t, est.prob, est.stderr))
            slopes.append(fit_scaling(points, "log").slope)
        assert slopes[0] < slopes[1] < slopes[2]


class TestCovarianceDuality:
    def test_forward_covariance_equals_dual_meeting(self):
        # Cov(eta_s(0), eta_s2(0)) = rho(1-rho) P(duals coalesce)
        cfg = TorusConfig(32, 16.0, 0.5)
        fwd = forward_covariance_mc(cfg, 2.0, 6.0, 60_000, 27)
        dual = dual_meeting_prob(16.0, 2.0, 6.0, 20_000, 28)
        lhs = fwd.value
        rhs = 0.25 * dual.mean
        se = math.hypot(fwd.stderr, 0.25 * dual.stderr)
        assert abs(lhs - rhs) < 4 * se

    def test_meeting_prob_decays_with_separation(self):
        near = dual_meeting_prob(16.0, 6.0, 7.0, 20_000, 29)
        far = dual_meeting_prob(16.0, 1.0, 15.0, 20_000, 30)
        assert near.mean > far.mean


class TestSeries:
    def test_persistence_series_meets_target(self):
        target = 0.2
        ests = persistence_series(
            [64.0, 256.0], 0.5, 31, target_neglog_stderr=target,
            pilot=200, min_replicas=200,
        )
        for est in ests:
            assert est.stderr / est.mean <= target

    def test_tail_series_shares_samples_across_levels(self):
        per_t = tail_series([64.0], 0.5, [0.6, 0.8], 64, 32, pilot=100,
                            min_replicas=400, max_replicas=2000)
        (ests,) = per_t
        assert ests[0].replicas == ests[1].replicas
        assert ests[0].prob >= ests[1].prob

    def test_series_need_integer_seed(self):
        with pytest.raises(TypeError):
            persistence_series([16.0], 0.5, np.random.default_rng(0))


def test_batch_means_stderr_matches_plain_stderr_for_iid():
    rng = np.random.default_rng(3)
    values = rng.normal(size=6400)
    plain = values.std(ddof=1) / math.sqrt(values.size)
    batched = batch_means_stderr(values)
    assert 0.5 * plain < batched < 2.0 * plain
