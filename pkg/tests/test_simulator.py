"""Tests for the path-wise Monte Carlo engine."""

import math

import numpy as np
import pytest

from cbmopt.errors import DomainError, HorizonCapError
from cbmopt.failure_model import SystemModel
from cbmopt.maintenance_policy import (
    CostParams,
    Policy,
    cost_rate,
    expected_cycle_length,
)
from cbmopt.simulator import (
    CycleOutcome,
    SimulationConfig,
    empirical_first_passage_cdf,
    estimate_cost_rate,
    simulate_cycle,
    simulate_many,
)
from cbmopt.system_reliability import series_survival_over_times

from conftest import random_system


@pytest.fixture(scope="module")
def model():
    rng = np.random.default_rng(161)
    return random_system(rng, 3)


def make_policy(model, frac=0.6, tau=5.0):
    return Policy(tau=tau, h2=tuple(frac * c.h1 for c in model.components))


class TestSimulateCycle:
    def test_zero_thresholds_end_at_first_inspection(self, model):
        policy = Policy(tau=3.0, h2=(0.0,) * model.n)
        for seed in range(20):
            outcome = simulate_cycle(model, policy, np.random.default_rng(seed))
            assert outcome.inspections == 1
            assert outcome.cycle_length == 3.0

    def test_no_shocks_means_no_hard_failures(self, model):
        quiet = SystemModel(components=model.components, lam=0.0)
        policy = make_policy(quiet)
        for seed in range(100):
            outcome = simulate_cycle(quiet, policy, np.random.default_rng(seed))
            assert outcome.failure_kind != "hard"

    def test_determinism(self, model):
        policy = make_policy(model)
        a = simulate_cycle(model, policy, np.random.default_rng(42))
        b = simulate_cycle(model, policy, np.random.default_rng(42))
        assert a == b

    def test_outcome_invariants(self, model):
        policy = make_policy(model)
        for seed in range(300):
            o = simulate_cycle(model, policy, np.random.default_rng(seed))
            assert o.cycle_length == o.inspections * policy.tau
            assert 0.0 <= o.downtime < policy.tau
            if o.downtime > 0.0:
                assert not o.ended_preventively
                assert o.failure_time is not None
                assert o.failure_time < o.cycle_length
            if o.ended_preventively:
                assert o.failure_time is None
                assert o.failure_kind == "none"

    def test_detection_at_failure_threshold_accounts_downtime_exactly(self, model):
        policy = Policy(tau=6.0, h2=model.h1_vector)
        seen_corrective = 0
        for seed in range(150):
            o = simulate_cycle(model, policy, np.random.default_rng(seed))
            if not o.ended_preventively:
                seen_corrective += 1
                assert o.downtime == pytest.approx(
                    o.inspections * policy.tau - o.failure_time, abs=1e-12
                )
        assert seen_corrective > 0

    def test_horizon_cap(self, model):
        # thresholds at the failure level with a tiny interval: no detection
        # within a handful of inspections
        policy = Policy(tau=1e-5, h2=model.h1_vector)
        config = SimulationConfig(replications=1, seed=0, horizon_cap=20)
        with pytest.raises(HorizonCapError):
            simulate_cycle(model, policy, np.random.default_rng(3), config)


class TestEstimateCostRate:
    def test_replacement_only_matches_analytic(self, model):
        policy = make_policy(model)
        costs = CostParams(c_i=0.0, c_rho=0.0, c_r=100.0)
        est = estimate_cost_rate(
            model, policy, costs, SimulationConfig(replications=20_000, seed=7)
        )
        analytic = 100.0 / expected_cycle_length(model, policy)
        assert abs(est.mean_cr - analytic) < 3.0 * est.stderr_cr

    def test_unambiguous_regime_full_agreement(self, model):
        # detection at the failure threshold, failure mass almost surely in
        # the first interval: the closed form and the paths must agree
        from test_maintenance_policy import tau_at_quantile

        tau = tau_at_quantile(model, 1.0 - 1e-4)
        policy = Policy(tau=tau, h2=model.h1_vector)
        costs = CostParams(c_i=1.0, c_rho=200.0, c_r=50.0)
        est = estimate_cost_rate(
            model, policy, costs, SimulationConfig(replications=30_000, seed=23)
        )
        analytic = cost_rate(model, policy, costs).cr
        assert abs(est.mean_cr - analytic) < 3.0 * est.stderr_cr

    def test_stderr_shrinks_like_root_n(self, model):
        policy = make_policy(model)
        costs = CostParams(1.0, 200.0, 50.0)
        a = estimate_cost_rate(
            model, policy, costs, SimulationConfig(replications=4_000, seed=5)
        )
        b = estimate_cost_rate(
            model, policy, costs, SimulationConfig(replications=8_000, seed=5)
        )
        ratio = b.stderr_cr / a.stderr_cr
        assert 0.8 / math.sqrt(2.0) < ratio < 1.2 / math.sqrt(2.0)

    def test_single_replication_flags_stderr(self, model):
        est = estimate_cost_rate(
            model,
            make_policy(model),
            CostParams(1.0, 1.0, 1.0),
            SimulationConfig(replications=1, seed=9),
        )
        assert math.isnan(est.stderr_cr)

    def test_preventive_fraction_bounds(self, model):
        est = estimate_cost_rate(
            model,
            make_policy(model),
            CostParams(1.0, 1.0, 1.0),
            SimulationConfig(replications=2_000, seed=31),
        )
        assert 0.0 <= est.preventive_fraction <= 1.0


class TestFirstPassage:
    def test_zero_at_origin_and_nondecreasing(self, model):
        grid = np.linspace(0.0, 20.0, 41)
        curve = empirical_first_passage_cdf(
            model,
            model.h1_vector,
            SimulationConfig(replications=5_000, seed=3),
            grid,
        )
        assert curve[0] == (0.0, 0.0)
        values = [v for _, v in curve]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_ks_distance_to_analytic_cdf(self, model):
        n = 100_000
        grid = np.linspace(0.0, 25.0, 126)
        curve = empirical_first_passage_cdf(
            model,
            model.h1_vector,
            SimulationConfig(replications=n, seed=41),
            grid,
        )
        analytic = 1.0 - series_survival_over_times(model, grid, model.h1_vector)
        empirical = np.array([v for _, v in curve])
        ks = float(np.max(np.abs(empirical - analytic)))
        assert ks < 1.63 / math.sqrt(n) + 0.002  # sampling band plus sub-step bias

    def test_grid_validation(self, model):
        config = SimulationConfig(replications=10, seed=0)
        with pytest.raises(DomainError):
            empirical_first_passage_cdf(model, model.h1_vector, config, [2.0, 1.0])
        with pytest.raises(DomainError):
            empirical_first_passage_cdf(model, model.h1_vector, config, [])


class TestBridgeRefinement:
    def test_halving_the_step_never_detects_later_and_moves_by_at_most_one(self):
        # one wear path sampled on a coarse grid, then refined in place by
        # conditional bridge draws: the fine crossing must sit inside the
        # coarse bracketing step
        rng = np.random.default_rng(77)
        alpha, beta, limit = 0.9, 0.5, 6.0
        horizon, coarse_n = 40.0, 256
        for _ in range(50):
            coarse_dt = horizon / coarse_n
            grid = np.linspace(0.0, horizon, coarse_n + 1)
            increments = rng.gamma(alpha * coarse_dt, 1.0 / beta, size=coarse_n)
            levels = np.concatenate([[0.0], np.cumsum(increments)])
            crossed = levels >= limit
            if not crossed.any():
                continue
            idx = int(np.argmax(crossed))
            t_coarse = grid[idx]
            # refine the bracketing cell with one bridge midpoint
            lo, hi = grid[idx - 1], grid[idx]
            x_lo, x_hi = levels[idx - 1], levels[idx]
            mid = 0.5 * (lo + hi)
            frac = rng.beta(alpha * (mid - lo), alpha * (hi - mid))
            x_mid = x_lo + (x_hi - x_lo) * frac
            t_fine = mid if x_mid >= limit else hi
            assert t_fine <= t_coarse
            assert t_coarse - t_fine <= coarse_dt

    def test_config_validation(self):
        with pytest.raises(DomainError):
            SimulationConfig(replications=0)
        with pytest.raises(DomainError):
            SimulationConfig(sub_step=0.0)
