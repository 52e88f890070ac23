import math

import numpy as np
import pytest

from voterlab.forward_voter import (
    ForwardState,
    TorusConfig,
    coupled_occupations,
    evolve,
    forward_covariance_mc,
    forward_occupation_mc,
    forward_persistence_mc,
    forward_tail_mc,
    init_bernoulli,
    survival_from_state_mc,
)
from voterlab.streams import replica_keys


def test_config_validation_and_wrap_guard():
    TorusConfig(side=32, horizon=16.0, rho=0.5)
    with pytest.raises(ValueError):
        TorusConfig(side=3, horizon=1.0, rho=0.5)
    with pytest.raises(ValueError):
        TorusConfig(side=8, horizon=1.0, rho=1.5)
    with pytest.warns(UserWarning, match="wrap-around"):
        TorusConfig(side=8, horizon=100.0, rho=0.5)


class TestInitBernoulli:
    def test_extreme_densities(self):
        zero = init_bernoulli(TorusConfig(16, 1.0, 0.0), 1)
        ones = init_bernoulli(TorusConfig(16, 1.0, 1.0), 1)
        assert not zero.eta.any()
        assert ones.eta.all()
        assert zero.clock == 0.0 and zero.origin_occupation == 0.0

    def test_half_density_concentration(self):
        state = init_bernoulli(TorusConfig(32, 1.0, 0.5), 2)
        mean = state.eta.mean()
        assert abs(mean - 0.5) < 4 * 0.5 / 32  # binomial CI


class TestEvolve:
    def test_consensus_is_absorbing(self):
        for rho, target in ((1.0, 16.0), (0.0, 0.0)):
            cfg = TorusConfig(16, 16.0, rho)
            state = init_bernoulli(cfg, 3)
            before = state.eta.copy()
            evolve(state, 16.0, 4)
            assert np.array_equal(state.eta, before)
            assert state.origin_occupation == pytest.approx(target, abs=1e-9)
            assert state.clock == 16.0

    def test_rejects_past_times(self):
        state = init_bernoulli(TorusConfig(8, 1.0, 0.5), 5)
        evolve(state, 1.0, 6)
        with pytest.raises(ValueError):
            evolve(state, 0.5, 6)

    def test_occupation_is_lipschitz_and_monotone(self):
        state = init_bernoulli(TorusConfig(16, 8.0, 0.5), 7)
        prev_occ = 0.0
        prev_clock = 0.0
        for until in (1.0, 2.5, 4.0, 8.0):
            evolve(state, until, 8)
            assert state.clock == until
            gained = state.origin_occupation - prev_occ
            assert -1e-12 <= gained <= (until - prev_clock) + 1e-12
            prev_occ = state.origin_occupation
            prev_clock = until

    def test_single_dissenter_self_consistency(self):
        # one opinion-1 site at the origin on an 8-torus: survival of
        # opinion 1 at time 1, measured with two independent seed sets
        eta = np.zeros((8, 8), dtype=np.uint8)
        eta[0, 0] = 1
        state = ForwardState(eta=eta)
        a = survival_from_state_mc(state, 1.0, 40_000, 11)
        b = survival_from_state_mc(state, 1.0, 40_000, 12)
        assert abs(a.mean - b.mean) < 4 * math.hypot(a.stderr, b.stderr)
        assert 0.0 < a.mean < 1.0


class TestPersistence:
    def test_rho_one_is_certain(self):
        est = forward_persistence_mc(TorusConfig(8, 4.0, 1.0), 500, 1)
        assert est.mean == 1.0

    def test_zero_horizon_matches_density(self):
        est = forward_persistence_mc(TorusConfig(16, 0.0, 0.3), 20_000, 2)
        assert abs(est.mean - 0.3) < 4 * est.stderr

    def test_low_hit_warning(self):
        est = forward_persistence_mc(TorusConfig(16, 4.0, 0.01), 200, 3)
        assert est.warning is not None


class TestTail:
    def test_level_validation(self):
        cfg = TorusConfig(8, 2.0, 0.5)
        with pytest.raises(ValueError):
            forward_tail_mc(cfg, 0.0, 10, 1)
        with pytest.raises(ValueError):
            forward_tail_mc(cfg, 1.1, 10, 1)

    def test_tiny_level_approaches_one(self):
        # level -> 0+: {T_t >= level*t} misses only replicas with T = 0,
        # i.e. an origin that holds opinion 0 throughout; at density 1/2
        # that event has the persistence probability by 0<->1 symmetry
        cfg = TorusConfig(16, 4.0, 0.5)
        tiny = forward_tail_mc(cfg, 1e-9, 40_000, 6)
        pers = forward_persistence_mc(cfg, 40_000, 7)
        assert tiny.mean > 0.85
        assert abs(tiny.mean - (1.0 - pers.mean)) < 4 * math.hypot(
            tiny.stderr, pers.stderr
        )

    def test_level_one_equals_persistence(self):
        # T_t >= t iff the origin never flips; with shared replica keys
        # the two kernels decide each replica identically
        cfg = TorusConfig(16, 4.0, 0.5)
        keys = replica_keys(77, 5000)
        tail = forward_tail_mc(cfg, 1.0, 5000, keys)
        pers = forward_persistence_mc(cfg, 5000, keys)
        assert tail.mean == pers.mean

class TestOccupationStatistics:
    def test_occupation_lln_and_marginal(self):
        # E T_t = rho * t (marginal conservation integrated over time)
        cfg = TorusConfig(32, 16.0, 0.5)
        occ = forward_occupation_mc(cfg, 20_000, 9)
        stderr = occ.std(ddof=1) / math.sqrt(occ.size)
        assert abs(occ.mean() - 8.0) < 4 * stderr
        assert np.all(occ >= 0) and np.all(occ <= 16.0 + 1e-9)

    def test_covariance_equal_times_is_bernoulli_variance(self):
        cfg = TorusConfig(16, 4.0, 0.3)
        est = forward_covariance_mc(cfg, 2.0, 2.0, 30_000, 10)
        assert abs(est.value - 0.21) < 4 * est.stderr

    def test_covariance_nonnegative_at_long_lag(self):
        cfg = TorusConfig(16, 4.0, 0.5)
        est = forward_covariance_mc(cfg, 0.0, 4.0, 30_000, 11)
        assert est.value > -4 * est.stderr

    def test_covariance_validation(self):
        cfg = TorusConfig(16, 4.0, 0.5)
        with pytest.raises(ValueError):
            forward_covariance_mc(cfg, 3.0, 2.0, 100, 1)
        with pytest.raises(ValueError):
            forward_covariance_mc(cfg, 0.0, 5.0, 100, 1)


def test_monotone_coupling_in_density():
    pairs = coupled_occupations(16, 8.0, 0.3, 0.7, 4000, 13)
    assert np.all(pairs[:, 0] <= pairs[:, 1] + 1e-9)
    assert pairs[:, 1].mean() > pairs[:, 0].mean()


def test_marginal_density_is_conserved():
    # E eta_t(0) = rho at every t: the origin's marginal stays Bernoulli(rho)
    from voterlab.forward_voter import _two_time_kernel

    rho = 0.35
    out = _two_time_kernel(16, 2.0, 6.0, rho, replica_keys(55, 40_000))
    tol = 4 * math.sqrt(rho * (1 - rho) / 40_000)
    assert abs(out[:, 0].mean() - rho) < tol
    assert abs(out[:, 1].mean() - rho) < tol
