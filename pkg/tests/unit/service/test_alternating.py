import itertools
from typing import Callable

import numpy as np
import pytest
from structlog.testing import capture_logs

from hybrid_precoding._core.mapping import make_mapping
from hybrid_precoding._core.phases import phase_grid
from hybrid_precoding._core.throughput import (
    effective_channels,
    is_power_feasible,
    throughput,
)
from hybrid_precoding._service.alternating import (
    Algorithm,
    AlgorithmSettings,
    AlternatingOptimizer,
    MaxMinOptimizer,
    PenaltySchedule,
    RunResult,
    RunTrace,
    SoftMaxMinOptimizer,
    SumOptimizer,
    TraceEntry,
    init_gamma,
    init_state,
    run_maxmin,
    run_softmaxmin,
    run_sum,
    update_gamma,
)
from hybrid_precoding._solvers.saddle import SaddleSettings
from hybrid_precoding.exceptions import ConfigurationError, DomainError
from hybrid_precoding.models import ChannelSet, PrecoderState, Scenario

FAST_SETTINGS = AlgorithmSettings(max_iterations=20, saddle=SaddleSettings(max_outer_iters=60))


def _entry(iteration: int, objective: float, gamma: float) -> TraceEntry:
    return TraceEntry(iteration, objective, 1.0, gamma, np.ones(2), 0.0)


class TestPenaltySchedule:
    def test_halved_penalty_keeps_gamma(self) -> None:
        assert update_gamma(PenaltySchedule(gamma=2.0), 0.5, 1.0).gamma == 2.0

    def test_stagnant_penalty_grows_gamma(self) -> None:
        assert update_gamma(PenaltySchedule(gamma=2.0), 1.0, 1.0).gamma == pytest.approx(2.4)

    def test_boundary_keeps_gamma(self) -> None:
        assert update_gamma(PenaltySchedule(gamma=2.0), 0.9, 1.0).gamma == 2.0

    @pytest.mark.parametrize(
        "kwargs",
        [{"gamma": 0.0}, {"gamma": 1.0, "growth": 1.0}, {"gamma": 1.0, "trigger_ratio": 1.0}],
    )
    def test_invalid_schedules_are_rejected(self, kwargs: dict) -> None:
        with pytest.raises(ConfigurationError):
            PenaltySchedule(**kwargs)

    def test_initial_gamma(self) -> None:
        assert init_gamma(3.0, 1.5) == pytest.approx(2.0)
        assert init_gamma(3.0, 0.0) == 1.0
        assert init_gamma(0.0, 1.5) == 1.0


class TestInitialState:
    def test_initial_state_is_feasible(self, tiny_scenario: Scenario) -> None:
        state = init_state(tiny_scenario, np.random.default_rng(0))
        assert state.precoders.shape == (3, 2, 2)
        assert np.sum(np.abs(state.precoders) ** 2) == pytest.approx(tiny_scenario.power_budget, rel=1e-10)
        assert np.all(np.abs(state.analog) < 1.0)
        assert np.all(np.isin(state.phases, phase_grid(tiny_scenario.resolution_bits)))

    def test_initial_state_is_deterministic(self, tiny_scenario: Scenario) -> None:
        first = init_state(tiny_scenario, np.random.default_rng(4))
        second = init_state(tiny_scenario, np.random.default_rng(4))
        np.testing.assert_array_equal(first.precoders, second.precoders)
        np.testing.assert_array_equal(first.analog, second.analog)


class TestRunTrace:
    def test_violations_within_a_stage(self) -> None:
        trace = RunTrace([_entry(0, 1.0, 1.0), _entry(1, 2.0, 1.0), _entry(2, 1.5, 1.0)])
        assert trace.stage_violations(direction=1) == [2]
        assert trace.stage_violations(direction=-1) == [1]

    def test_gamma_changes_reset_the_comparison(self) -> None:
        trace = RunTrace([_entry(0, 2.0, 1.0), _entry(1, 1.0, 1.2), _entry(2, 1.5, 1.2)])
        assert trace.stage_violations(direction=1) == []

    def test_frame(self) -> None:
        trace = RunTrace([_entry(0, 1.0, 1.0), _entry(1, 2.0, 1.0)])
        frame = trace.to_frame()
        assert list(frame.columns) == [
            "iteration",
            "objective",
            "penalty",
            "gamma",
            "min_throughput_bps_hz",
            "sum_throughput_bps_hz",
        ]
        assert "wall_time_s" in trace.to_frame(record_timing=True).columns


class TestFactory:
    @pytest.mark.parametrize(
        "algorithm,expected",
        [(Algorithm.MAXMIN, MaxMinOptimizer), (Algorithm.SUM, SumOptimizer), (Algorithm.SOFTMAXMIN, SoftMaxMinOptimizer)],
    )
    def test_dispatch(
        self, algorithm: Algorithm, expected: type, tiny_scenario: Scenario, tiny_channels: ChannelSet
    ) -> None:
        optimizer = AlternatingOptimizer.factory(algorithm, tiny_scenario, tiny_channels, FAST_SETTINGS, 0.5)
        assert isinstance(optimizer, expected)

    def test_soft_max_min_needs_delta(self, tiny_scenario: Scenario, tiny_channels: ChannelSet) -> None:
        with pytest.raises(ConfigurationError):
            AlternatingOptimizer.factory(Algorithm.SOFTMAXMIN, tiny_scenario, tiny_channels, FAST_SETTINGS)

    def test_soft_max_min_checks_delta(self, tiny_scenario: Scenario, tiny_channels: ChannelSet) -> None:
        with pytest.raises(DomainError):
            SoftMaxMinOptimizer(tiny_scenario, tiny_channels, FAST_SETTINGS, 1.5)

    def test_channels_must_match_the_scenario(self, tiny_scenario: Scenario, tiny_channels: ChannelSet) -> None:
        channels = ChannelSet(tiny_channels.matrices[:2], 2, tiny_channels.distances_m[:2], tiny_channels.path_loss_db[:2])
        with pytest.raises(ConfigurationError):
            MaxMinOptimizer(tiny_scenario, channels, FAST_SETTINGS)


class TestRuns:
    @pytest.mark.parametrize(
        "optimizer_class,kwargs",
        [(MaxMinOptimizer, {}), (SumOptimizer, {}), (SoftMaxMinOptimizer, {"delta": 0.5})],
    )
    def test_stage_objective_is_monotone(
        self, optimizer_class: type, kwargs: dict, tiny_scenario: Scenario, tiny_channels: ChannelSet
    ) -> None:
        optimizer = optimizer_class(tiny_scenario, tiny_channels, FAST_SETTINGS, **kwargs)
        result = optimizer.run(np.random.default_rng(5))
        assert len(result.trace) == result.iterations + 1
        assert result.trace.stage_violations(optimizer.direction) == []

    @pytest.mark.parametrize("runner", [run_maxmin, run_sum, run_softmaxmin])
    def test_result_is_hard_feasible(
        self, runner: Callable[..., RunResult], tiny_scenario: Scenario, tiny_channels: ChannelSet
    ) -> None:
        result = runner(tiny_scenario, tiny_channels, FAST_SETTINGS)
        assert np.all(np.isin(result.state.phases, phase_grid(tiny_scenario.resolution_bits)))
        assert is_power_feasible(result.state.precoders, tiny_scenario.power_budget)
        assert np.all(result.report.rates >= 0.0)
        mapping = make_mapping(tiny_scenario.mapping, tiny_scenario.subarray_size, tiny_scenario.n_ps_per_rf)
        expected = throughput(tiny_channels, mapping, result.state.quantized(), tiny_scenario.noise_power_mw)
        np.testing.assert_allclose(result.report.rates, expected.rates)

    def test_runs_are_deterministic(self, tiny_scenario: Scenario, tiny_channels: ChannelSet) -> None:
        first = run_sum(tiny_scenario, tiny_channels, FAST_SETTINGS, np.random.default_rng(8))
        second = run_sum(tiny_scenario, tiny_channels, FAST_SETTINGS, np.random.default_rng(8))
        np.testing.assert_array_equal(first.report.rates, second.report.rates)
        np.testing.assert_array_equal(first.trace.objectives, second.trace.objectives)

    def test_given_initial_state_is_used(
        self, tiny_scenario: Scenario, tiny_channels: ChannelSet, tiny_state: PrecoderState
    ) -> None:
        optimizer = SumOptimizer(tiny_scenario, tiny_channels, FAST_SETTINGS)
        result = optimizer.run(np.random.default_rng(0), initial=tiny_state)
        first = result.trace.entries[0]
        assert first.penalty == pytest.approx(tiny_state.penalty)
        assert first.objective == pytest.approx(optimizer.objective(tiny_state, first.gamma))

    def test_iteration_cap_is_reported(self, tiny_scenario: Scenario, tiny_channels: ChannelSet) -> None:
        settings = AlgorithmSettings(max_iterations=1, saddle=SaddleSettings(max_outer_iters=20))
        with capture_logs() as cap_logs:
            result = run_maxmin(tiny_scenario, tiny_channels, settings)
        assert not result.converged
        assert result.iterations == 1
        warning = next((log for log in cap_logs if log.get("event") == "Run hit the iteration cap before converging."), None)
        assert warning is not None
        assert warning["log_level"] == "warning"


class TestConvergence:
    def test_max_min_watches_its_objective(self, tiny_scenario: Scenario, tiny_channels: ChannelSet) -> None:
        optimizer = MaxMinOptimizer(tiny_scenario, tiny_channels, FAST_SETTINGS)
        assert optimizer.relative_change(2.0, 2.1, np.ones(3), np.full(3, 5.0)) == pytest.approx(0.05)

    def test_soft_max_min_keeps_going_while_throughput_moves(
        self, tiny_scenario: Scenario, tiny_channels: ChannelSet
    ) -> None:
        optimizer = SoftMaxMinOptimizer(tiny_scenario, tiny_channels, FAST_SETTINGS, 0.5)
        settled = np.array([0.5, 1.0, 1.5])
        assert optimizer.relative_change(2.8, 2.8, settled, settled) == 0.0
        assert optimizer.relative_change(2.8, 2.8, settled, np.array([0.55, 1.0, 1.5])) == pytest.approx(0.1)
        assert optimizer.relative_change(2.8, 2.8, settled, np.array([0.5, 1.0, 1.8])) == pytest.approx(0.1)

    def test_converged_soft_run_has_settled_throughput(
        self, tiny_scenario: Scenario, tiny_channels: ChannelSet
    ) -> None:
        settings = AlgorithmSettings(saddle=SaddleSettings(max_outer_iters=60))
        result = run_softmaxmin(tiny_scenario, tiny_channels, settings, delta=0.5, rng=np.random.default_rng(2))
        assert result.converged
        last, before = result.trace.entries[-1], result.trace.entries[-2]
        assert abs(np.min(last.rates) - np.min(before.rates)) <= settings.objective_tolerance * np.min(before.rates)
        assert abs(np.sum(last.rates) - np.sum(before.rates)) <= settings.objective_tolerance * np.sum(before.rates)


class TestSingleUserOracle:
    @staticmethod
    def _best_grid_throughput(scenario: Scenario, channels: ChannelSet) -> float:
        """Exhaustive search over every phase combination with the optimal single-user, single-stream digital precoder."""
        mapping = make_mapping(scenario.mapping, scenario.subarray_size, scenario.n_ps_per_rf)
        grid = phase_grid(scenario.resolution_bits)
        best = 0.0
        for phases in itertools.product(grid, repeat=scenario.n_phase_shifters):
            effective = effective_channels(channels, mapping, np.exp(1j * np.array(phases)))[0]
            gain = float(np.linalg.norm(effective, 2) ** 2)
            best = max(best, np.log1p(scenario.power_budget * gain / scenario.noise_power_mw))
        return best

    def test_max_min_is_close_to_the_grid_optimum(self, high_snr_single_user: tuple) -> None:
        scenario, channels = high_snr_single_user
        best = self._best_grid_throughput(scenario, channels)
        result = run_maxmin(scenario, channels, AlgorithmSettings(max_iterations=200))
        assert result.report.min >= 0.95 * best
        assert result.report.min <= best * (1 + 1e-9)

    def test_soft_max_min_agrees_with_max_min_for_one_user(self, high_snr_single_user: tuple) -> None:
        scenario, channels = high_snr_single_user
        settings = AlgorithmSettings(max_iterations=200)
        hard = run_maxmin(scenario, channels, settings, np.random.default_rng(1))
        soft = run_softmaxmin(scenario, channels, settings, delta=1.0, rng=np.random.default_rng(1))
        assert soft.report.min == pytest.approx(hard.report.min, rel=0.02)
