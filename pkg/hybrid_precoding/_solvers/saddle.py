"""Max-min of per-user quadratic minorants by multiplicative weights on the user simplex.

For weights lambda on the simplex, the weighted sum of the minorants is maximized in
closed form. Its value is an upper bound on the max-min optimum, while the min over users
at any candidate point is a lower bound. The weights follow exponentiated-gradient steps
that push mass to the users with the smallest surrogate value, and the loop stops when
the two bounds meet.
"""
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
import structlog

from hybrid_precoding._solvers.closed_form import (
    BallConstraint,
    solve_quadratic_ap,
    solve_weighted_dp,
)
from hybrid_precoding._surrogates.bundles import (
    AnalogMinorant,
    DigitalMinorant,
    MinorantBundle,
)
from hybrid_precoding.exceptions import ConfigurationError

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class SaddleSettings:
    """Budget and accuracy of the saddle solver."""

    max_outer_iters: int = 500
    weight_step: float = 0.1
    kkt_tolerance: float = 1e-6

    def __post_init__(self) -> None:
        """Validate the settings."""
        if self.max_outer_iters < 1 or self.weight_step <= 0 or self.kkt_tolerance <= 0:
            raise ConfigurationError(f"Saddle settings must be positive, got {self}.")


@dataclass(frozen=True)
class PenaltyAnchor:
    """Penalty -gamma ||z - e^{j theta}||^2 added to the analog max-min objective."""

    gamma: float
    phases: np.ndarray

    def penalty(self, analog: np.ndarray) -> float:
        """Return gamma ||z - e^{j theta}||^2."""
        return float(self.gamma * np.sum(np.abs(analog - np.exp(1j * self.phases)) ** 2))


@dataclass
class SaddleResult:
    """Outcome of a max-min solve.

    :param point: The returned V or z.
    :param weights: Final user weights.
    :param value: min_k surrogate_k(point), minus the penalty for analog solves.
    :param gap: Best dual bound minus `value` at exit.
    :param iterations: Outer iterations used.
    :param stalled: True if no point beat the expansion point, which is then returned.
    """

    point: np.ndarray
    weights: np.ndarray
    value: float
    gap: float
    iterations: int
    stalled: bool


Constraint = Union[BallConstraint, PenaltyAnchor]


def _oracles(
    bundle: MinorantBundle, constraint: Constraint
) -> Tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], float]]:
    if isinstance(bundle, DigitalMinorant) and isinstance(constraint, BallConstraint):

        def argmax_digital(weights: np.ndarray) -> np.ndarray:
            linear, quadratic = bundle.weighted(weights)
            return solve_weighted_dp(linear, quadratic, constraint).precoders

        return argmax_digital, lambda point: 0.0
    if isinstance(bundle, AnalogMinorant) and isinstance(constraint, PenaltyAnchor):

        def argmax_analog(weights: np.ndarray) -> np.ndarray:
            linear, quadratic = bundle.weighted(weights)
            return solve_quadratic_ap(linear, quadratic, constraint.gamma, constraint.phases)

        return argmax_analog, lambda point: -constraint.penalty(point)
    raise ConfigurationError(
        f"Cannot combine {type(bundle).__name__} with {type(constraint).__name__}; "
        "digital minorants take a BallConstraint and analog minorants a PenaltyAnchor."
    )


def solve_maxmin_saddle(
    bundle: MinorantBundle,
    constraint: Constraint,
    expansion: np.ndarray,
    settings: SaddleSettings = SaddleSettings(),
) -> SaddleResult:
    """Approximately maximize min_k surrogate_k(x) (minus the penalty for z).

    The returned value is never below the value at the expansion point.

    :param bundle: Per-user minorants built at `expansion`.
    :param constraint: Power ball for V or penalty anchor for z.
    :param expansion: The current iterate.
    :param settings: Iteration budget, weight step and stopping tolerance.
    :return: The best point found with its value and final duality gap.
    """
    argmax, extra = _oracles(bundle, constraint)

    def primal(point: np.ndarray) -> float:
        return float(np.min(bundle.values(point))) + extra(point)

    start_value = primal(expansion)
    best_point, best_value, improved = expansion, start_value, False
    n_users = bundle.n_users
    weights = np.full(n_users, 1.0 / n_users)
    average = np.zeros_like(expansion)
    dual_bound = np.inf
    iteration = 0
    for iteration in range(1, settings.max_outer_iters + 1):
        candidate = argmax(weights)
        values = bundle.values(candidate)
        bonus = extra(candidate)
        dual_bound = min(dual_bound, float(weights @ values) + bonus)
        average += (candidate - average) / iteration
        for point, value in ((candidate, float(np.min(values)) + bonus), (average.copy(), primal(average))):
            if value >= best_value:
                best_point, best_value = point, value
                improved = improved or value > start_value
        gap = dual_bound - best_value
        if n_users == 1 or gap <= settings.kkt_tolerance * max(1.0, abs(best_value)):
            break
        step = settings.weight_step / np.sqrt(iteration)
        weights = weights * np.exp(-step * (values - values.min()))
        weights /= weights.sum()
    gap = max(dual_bound - best_value, 0.0)
    if not improved:
        logger.debug("Saddle solve did not improve on the expansion point.", value=start_value, gap=gap)
        best_point, best_value = expansion, start_value
    return SaddleResult(
        point=best_point,
        weights=weights,
        value=best_value,
        gap=gap,
        iterations=iteration,
        stalled=not improved,
    )
