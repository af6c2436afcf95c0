"""Penalized alternating optimization of the hybrid precoder.

Every algorithm iterates the triple (V, z, theta): a digital step at fixed z, an analog
step at the new V anchored at the current theta, and a projection of z onto the phase
grid. The penalty gamma ||z - e^{j theta}||^2 pushes z towards the grid and gamma grows
whenever the penalty stops shrinking.
"""

from __future__ import annotations

import dataclasses
import enum
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
import structlog

from hybrid_precoding._core.mapping import make_mapping
from hybrid_precoding._core.throughput import (
    check_delta,
    cross_gains,
    effective_channels,
    rates_from_gains,
    soft_objective_matrix,
    stacked_operator,
    throughput,
)
from hybrid_precoding._solvers.closed_form import (
    BallConstraint,
    project_theta,
    solve_quadratic_ap,
    solve_weighted_dp,
)
from hybrid_precoding._solvers.saddle import (
    PenaltyAnchor,
    SaddleSettings,
    solve_maxmin_saddle,
)
from hybrid_precoding._surrogates.majorants import (
    softmin_majorant_ap,
    softmin_majorant_dp,
)
from hybrid_precoding._surrogates.minorants import ap_minorant, dp_minorant
from hybrid_precoding._utils.constants import BITS_PER_NAT
from hybrid_precoding._utils.linalg import logdet_pd
from hybrid_precoding.exceptions import ConfigurationError
from hybrid_precoding.models import (
    ChannelSet,
    PrecoderState,
    Scenario,
    ThroughputReport,
)

logger = structlog.get_logger(__name__)

DEFAULT_GAMMA = 1.0


class Algorithm(str, enum.Enum):
    """Optimization objective of a run."""

    MAXMIN = "maxmin"
    SUM = "sum"
    SOFTMAXMIN = "softmaxmin"


@dataclass(frozen=True)
class PenaltySchedule:
    """Current penalty factor and the rule that grows it."""

    gamma: float
    growth: float = 1.2
    trigger_ratio: float = 0.9
    termination_threshold: float = 0.1

    def __post_init__(self) -> None:
        """Validate the schedule."""
        if self.gamma <= 0 or self.growth <= 1 or not 0 < self.trigger_ratio < 1 or self.termination_threshold <= 0:
            raise ConfigurationError(f"Invalid penalty schedule {self}.")


def update_gamma(schedule: PenaltySchedule, penalty_now: float, penalty_prev: float) -> PenaltySchedule:
    """Grow gamma if the penalty did not drop below trigger_ratio times its previous value.

    :param schedule: Current schedule.
    :param penalty_now: ||z - e^{j theta}||^2 after the iteration.
    :param penalty_prev: The same term before the iteration.
    :return: The schedule to use for the next iteration.
    """
    if penalty_now > schedule.trigger_ratio * penalty_prev:
        return dataclasses.replace(schedule, gamma=schedule.gamma * schedule.growth)
    return schedule


def _relative(previous: float, current: float) -> float:
    return abs(current - previous) / max(abs(previous), 1e-12)


def init_gamma(numerator: float, penalty: float) -> float:
    """Match the initial penalty term in magnitude to the objective.

    Falls back to 1 when either the numerator or the penalty vanishes.
    """
    if penalty <= 0 or numerator <= 0 or not np.isfinite(numerator):
        return DEFAULT_GAMMA
    return numerator / penalty


def init_state(scenario: Scenario, rng: np.random.Generator) -> PrecoderState:
    """Random starting point.

    z has entries with modulus in [0, 1) and uniform phase, V is complex Gaussian scaled
    to meet the power budget with equality and theta is the projection of z.
    """
    n_phase = scenario.n_phase_shifters
    analog = rng.uniform(0.0, 1.0, n_phase) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n_phase))
    shape = (scenario.n_users, scenario.n_rf, scenario.geometry.n_t)
    precoders = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    precoders *= np.sqrt(scenario.power_budget / np.sum(np.abs(precoders) ** 2))
    return PrecoderState(precoders=precoders, analog=analog, phases=project_theta(analog, scenario.resolution_bits))


@dataclass(frozen=True)
class AlgorithmSettings:
    """Loop limits and solver settings shared by all algorithms."""

    max_iterations: int = 500
    objective_tolerance: float = 1e-4
    growth: float = 1.2
    trigger_ratio: float = 0.9
    termination_threshold: float = 0.1
    saddle: SaddleSettings = field(default_factory=SaddleSettings)

    def __post_init__(self) -> None:
        """Validate the settings."""
        if self.max_iterations < 1 or self.objective_tolerance <= 0:
            raise ConfigurationError(f"Invalid algorithm settings {self}.")


@dataclass
class TraceEntry:
    """Snapshot after one full (V, z, theta) iteration; iteration 0 is the initial point."""

    iteration: int
    objective: float
    penalty: float
    gamma: float
    rates: np.ndarray
    wall_time_s: float


@dataclass
class RunTrace:
    """Iteration history of one run."""

    entries: List[TraceEntry] = field(default_factory=list)

    def append(self, entry: TraceEntry) -> None:
        """Add an entry."""
        self.entries.append(entry)

    def __len__(self) -> int:
        """Number of recorded entries."""
        return len(self.entries)

    @property
    def objectives(self) -> np.ndarray:
        """Stage objective per entry."""
        return np.array([entry.objective for entry in self.entries])

    @property
    def penalties(self) -> np.ndarray:
        """Penalty term per entry."""
        return np.array([entry.penalty for entry in self.entries])

    @property
    def gammas(self) -> np.ndarray:
        """Penalty factor per entry."""
        return np.array([entry.gamma for entry in self.entries])

    def stage_violations(self, direction: int, slack: float = 1e-8) -> List[int]:
        """Iterations whose objective moved the wrong way relative to the previous one at the same gamma.

        :param direction: +1 for maximization, -1 for minimization.
        :param slack: Absolute tolerance, scaled by max(1, |objective|).
        :return: Offending iteration numbers.
        """
        violations = []
        for prev, entry in zip(self.entries, self.entries[1:]):
            if entry.gamma != prev.gamma:
                continue
            change = direction * (entry.objective - prev.objective)
            if change < -slack * max(1.0, abs(prev.objective)):
                violations.append(entry.iteration)
        return violations

    def to_frame(self, record_timing: bool = False) -> pd.DataFrame:
        """Tabulate the trace with throughputs in bps/Hz."""
        frame = pd.DataFrame(
            {
                "iteration": [entry.iteration for entry in self.entries],
                "objective": self.objectives,
                "penalty": self.penalties,
                "gamma": self.gammas,
                "min_throughput_bps_hz": [np.min(entry.rates) * BITS_PER_NAT for entry in self.entries],
                "sum_throughput_bps_hz": [np.sum(entry.rates) * BITS_PER_NAT for entry in self.entries],
            }
        )
        if record_timing:
            frame["wall_time_s"] = [entry.wall_time_s for entry in self.entries]
        return frame


@dataclass
class RunResult:
    """Final state of a run together with its hard-feasible throughputs."""

    algorithm: Algorithm
    state: PrecoderState
    trace: RunTrace
    report: ThroughputReport
    converged: bool
    iterations: int

    @property
    def penalty(self) -> float:
        """Penalty term at exit."""
        return self.state.penalty


class AlternatingOptimizer(ABC):
    """Shared loop of the three algorithms.

    Subclasses supply the digital and analog steps, the unpenalized objective and the
    numerator of the initial penalty factor.
    """

    algorithm: Algorithm
    # +1 if the objective is maximized, -1 if minimized
    direction: int = 1

    def __init__(self, scenario: Scenario, channels: ChannelSet, settings: AlgorithmSettings):
        """Bind the optimizer to a scenario and its channels.

        :param scenario: System dimensions and budgets.
        :param channels: Channels matching the scenario.
        :param settings: Loop and solver settings.
        """
        if channels.n_rf != scenario.n_rf or channels.matrices.shape[2] != scenario.geometry.n_antennas:
            raise ConfigurationError("The channel set does not match the scenario's array layout.")
        if channels.n_users != scenario.n_users or channels.n_t != scenario.geometry.n_t:
            raise ConfigurationError("The channel set does not match the scenario's users.")
        self.scenario = scenario
        self.channels = channels
        self.settings = settings
        self.mapping = make_mapping(scenario.mapping, scenario.subarray_size, scenario.n_ps_per_rf)
        self.sigma = scenario.noise_power_mw
        self.ball = BallConstraint(scenario.power_budget)

    @classmethod
    def factory(
        cls,
        algorithm: Algorithm,
        scenario: Scenario,
        channels: ChannelSet,
        settings: AlgorithmSettings,
        delta: Optional[float] = None,
    ) -> AlternatingOptimizer:
        """Create the optimizer for an algorithm.

        :param delta: Throughput scaling, only used by the soft max-min algorithm.
        """
        if algorithm == Algorithm.MAXMIN:
            return MaxMinOptimizer(scenario, channels, settings)
        if algorithm == Algorithm.SUM:
            return SumOptimizer(scenario, channels, settings)
        if delta is None:
            raise ConfigurationError("The soft max-min algorithm needs delta.")
        return SoftMaxMinOptimizer(scenario, channels, settings, delta)

    def _effective(self, state: PrecoderState) -> np.ndarray:
        return effective_channels(self.channels, self.mapping, state.analog)

    def _operator(self, state: PrecoderState) -> np.ndarray:
        return stacked_operator(self.channels, self.mapping, state.precoders)

    def _rates(self, state: PrecoderState) -> np.ndarray:
        return throughput(self.channels, self.mapping, state, self.sigma).rates

    @abstractmethod
    def _digital_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        """Return the next V at fixed z."""

    @abstractmethod
    def _analog_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        """Return the next z at fixed V, anchored at the current theta."""

    @abstractmethod
    def base_objective(self, state: PrecoderState) -> float:
        """Objective without the penalty term."""

    @abstractmethod
    def gamma_numerator(self, state: PrecoderState) -> float:
        """Magnitude the initial penalty term is matched to."""

    def objective(self, state: PrecoderState, gamma: float) -> float:
        """Penalized stage objective for a given gamma."""
        return self.base_objective(state) - self.direction * gamma * state.penalty

    def relative_change(
        self, base_prev: float, base_now: float, rates_prev: np.ndarray, rates_now: np.ndarray
    ) -> float:
        """Relative change of the unpenalized objective between two iterations."""
        return _relative(base_prev, base_now)

    def run(self, rng: np.random.Generator, initial: Optional[PrecoderState] = None) -> RunResult:
        """Iterate until the penalty is small and the objective settles, or the iteration cap.

        :param rng: Generator for the random starting point.
        :param initial: Optional starting point that replaces the random one.
        :return: The run result; its report uses z = e^{j theta}.
        """
        state = initial.copy() if initial is not None else init_state(self.scenario, rng)
        settings = self.settings
        schedule = PenaltySchedule(
            gamma=init_gamma(self.gamma_numerator(state), state.penalty),
            growth=settings.growth,
            trigger_ratio=settings.trigger_ratio,
            termination_threshold=settings.termination_threshold,
        )
        start = time.perf_counter()
        trace = RunTrace()
        rates_prev = self._rates(state)
        trace.append(
            TraceEntry(0, self.objective(state, schedule.gamma), state.penalty, schedule.gamma, rates_prev, 0.0)
        )
        base_prev = self.base_objective(state)
        converged = False
        iteration = 0
        for iteration in range(1, settings.max_iterations + 1):
            gamma = schedule.gamma
            precoders = self._digital_step(state, gamma)
            with_precoders = PrecoderState(precoders, state.analog, state.phases)
            analog = self._analog_step(with_precoders, gamma)
            new_state = PrecoderState(precoders, analog, project_theta(analog, self.scenario.resolution_bits))
            objective = self.objective(new_state, gamma)
            penalty_now, penalty_prev = new_state.penalty, state.penalty
            rates_now = self._rates(new_state)
            trace.append(TraceEntry(iteration, objective, penalty_now, gamma, rates_now, time.perf_counter() - start))
            base_now = self.base_objective(new_state)
            change = self.relative_change(base_prev, base_now, rates_prev, rates_now)
            logger.debug(
                "Finished iteration.",
                algorithm=self.algorithm.value,
                iteration=iteration,
                objective=objective,
                penalty=penalty_now,
                gamma=gamma,
            )
            state, base_prev, rates_prev = new_state, base_now, rates_now
            if penalty_now < schedule.termination_threshold and change < settings.objective_tolerance:
                converged = True
                break
            schedule = update_gamma(schedule, penalty_now, penalty_prev)
        report = throughput(self.channels, self.mapping, state.quantized(), self.sigma)
        if converged:
            logger.info(
                "Finished run.",
                algorithm=self.algorithm.value,
                iterations=iteration,
                penalty=state.penalty,
                min_throughput=report.min,
            )
        else:
            logger.warning(
                "Run hit the iteration cap before converging.",
                algorithm=self.algorithm.value,
                iterations=iteration,
                penalty=state.penalty,
            )
        return RunResult(self.algorithm, state, trace, report, converged, iteration)


class MaxMinOptimizer(AlternatingOptimizer):
    """Nonsmooth max-min throughput: both steps solve a max-min over per-user minorants."""

    algorithm = Algorithm.MAXMIN

    def _digital_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        bundle = dp_minorant(self._effective(state), state.precoders, self.sigma)
        return solve_maxmin_saddle(bundle, self.ball, state.precoders, self.settings.saddle).point

    def _analog_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        bundle = ap_minorant(self._operator(state), state.analog, self.sigma)
        anchor = PenaltyAnchor(gamma=gamma, phases=state.phases)
        return solve_maxmin_saddle(bundle, anchor, state.analog, self.settings.saddle).point

    def base_objective(self, state: PrecoderState) -> float:
        """min_k r_k."""
        return float(np.min(self._rates(state)))

    def gamma_numerator(self, state: PrecoderState) -> float:
        """min_k r_k at the starting point."""
        return self.base_objective(state)


class SumOptimizer(AlternatingOptimizer):
    """Sum throughput with closed-form steps on the summed minorants."""

    algorithm = Algorithm.SUM

    def _digital_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        bundle = dp_minorant(self._effective(state), state.precoders, self.sigma)
        linear, quadratic = bundle.weighted(np.ones(bundle.n_users))
        return solve_weighted_dp(linear, quadratic, self.ball).precoders

    def _analog_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        bundle = ap_minorant(self._operator(state), state.analog, self.sigma)
        linear, quadratic = bundle.weighted(np.ones(bundle.n_users))
        return solve_quadratic_ap(linear, quadratic, gamma, state.phases)

    def base_objective(self, state: PrecoderState) -> float:
        """sum_k r_k."""
        return float(np.sum(self._rates(state)))

    def gamma_numerator(self, state: PrecoderState) -> float:
        """sum_k r_k at the starting point."""
        return self.base_objective(state)


class SoftMaxMinOptimizer(AlternatingOptimizer):
    """Soft max-min: minimize ln|Xi_delta| with closed-form steps on its majorants."""

    algorithm = Algorithm.SOFTMAXMIN
    direction = -1

    def __init__(self, scenario: Scenario, channels: ChannelSet, settings: AlgorithmSettings, delta: float):
        """Bind the optimizer and fix the throughput scaling delta in (0, 1]."""
        check_delta(delta)
        super().__init__(scenario, channels, settings)
        self.delta = delta

    def _digital_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        majorant = softmin_majorant_dp(self._effective(state), state.precoders, self.sigma, self.delta)
        return solve_weighted_dp(majorant.linear, majorant.quadratic, self.ball).precoders

    def _analog_step(self, state: PrecoderState, gamma: float) -> np.ndarray:
        majorant = softmin_majorant_ap(self._operator(state), state.analog, self.sigma, self.delta)
        return solve_quadratic_ap(majorant.aggregate_linear, majorant.aggregate_quadratic, gamma, state.phases)

    def base_objective(self, state: PrecoderState) -> float:
        """ln|Xi_delta(V, z)|."""
        gains = cross_gains(self._effective(state), state.precoders)
        return logdet_pd(soft_objective_matrix(gains, self.sigma, self.delta))

    def gamma_numerator(self, state: PrecoderState) -> float:
        """|ln|Xi_delta|| at the starting point."""
        return abs(self.base_objective(state))

    def relative_change(
        self, base_prev: float, base_now: float, rates_prev: np.ndarray, rates_now: np.ndarray
    ) -> float:
        """Largest relative change among ln|Xi_delta|, the min throughput and the sum throughput.

        ln|Xi_delta| can settle while the throughputs it trades off are still moving.
        """
        return max(
            _relative(base_prev, base_now),
            _relative(float(np.min(rates_prev)), float(np.min(rates_now))),
            _relative(float(np.sum(rates_prev)), float(np.sum(rates_now))),
        )

    def scaled_rates(self, state: PrecoderState) -> np.ndarray:
        """r_{k,delta} at a state."""
        gains = cross_gains(self._effective(state), state.precoders)
        return rates_from_gains(gains, self.sigma, self.delta)


def run_maxmin(
    scenario: Scenario,
    channels: ChannelSet,
    settings: AlgorithmSettings = AlgorithmSettings(),
    rng: Optional[np.random.Generator] = None,
) -> RunResult:
    """Run the nonsmooth max-min throughput algorithm."""
    return MaxMinOptimizer(scenario, channels, settings).run(rng if rng is not None else np.random.default_rng(0))


def run_sum(
    scenario: Scenario,
    channels: ChannelSet,
    settings: AlgorithmSettings = AlgorithmSettings(),
    rng: Optional[np.random.Generator] = None,
) -> RunResult:
    """Run the sum-throughput algorithm."""
    return SumOptimizer(scenario, channels, settings).run(rng if rng is not None else np.random.default_rng(0))


def run_softmaxmin(
    scenario: Scenario,
    channels: ChannelSet,
    settings: AlgorithmSettings = AlgorithmSettings(),
    delta: float = 0.5,
    rng: Optional[np.random.Generator] = None,
) -> RunResult:
    """Run the soft max-min throughput algorithm with throughput scaling delta."""
    optimizer = SoftMaxMinOptimizer(scenario, channels, settings, delta)
    return optimizer.run(rng if rng is not None else np.random.default_rng(0))
