import numpy as np
import pytest

from hybrid_precoding._core.phases import phase_grid
from hybrid_precoding._solvers.closed_form import (
    BallConstraint,
    bisect_power_multiplier,
    project_theta,
    solve_quadratic_ap,
    solve_weighted_dp,
)
from hybrid_precoding.exceptions import ConfigurationError, NumericalError


def _complex(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_psd(rng: np.random.Generator, dim: int) -> np.ndarray:
    factor = _complex(rng, (dim, dim))
    return factor @ factor.conj().T + 0.5 * np.eye(dim)


class TestBisection:
    def test_feasible_at_zero(self) -> None:
        assert bisect_power_multiplier(lambda mu: 1.0 / (1.0 + mu) ** 2, 2.0) == 0.0

    def test_scalar_root(self) -> None:
        assert bisect_power_multiplier(lambda mu: 4.0 / (1.0 + mu) ** 2, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_root_beyond_the_first_bracket(self) -> None:
        def power(mu: float) -> float:
            return 1.0 / (mu + 0.5) ** 2

        multiplier = bisect_power_multiplier(power, 0.01)
        assert multiplier == pytest.approx(9.5, rel=1e-10)
        assert abs(power(multiplier) - 0.01) <= 1e-8 * 0.01

    def test_missing_bracket_is_an_error(self) -> None:
        with pytest.raises(NumericalError):
            bisect_power_multiplier(lambda mu: 10.0, 1.0)


class TestWeightedDigitalSolve:
    def test_zero_linear_term(self, rng: np.random.Generator) -> None:
        update = solve_weighted_dp(np.zeros((2, 1, 3), dtype=complex), _random_psd(rng, 3), BallConstraint(1.0))
        np.testing.assert_array_equal(update.precoders, 0)
        assert update.multiplier == 0.0

    def test_inactive_constraint_is_stationary(self, rng: np.random.Generator) -> None:
        linear, quadratic = _complex(rng, (3, 2, 4)), _random_psd(rng, 4)
        update = solve_weighted_dp(linear, quadratic, BallConstraint(1e6))
        assert update.multiplier == 0.0
        for user in range(3):
            residual = quadratic @ update.precoders[user] - linear[user].conj().T
            assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(linear[user])

    def test_active_constraint_meets_the_budget(self, rng: np.random.Generator) -> None:
        linear, quadratic = 10.0 * _complex(rng, (3, 2, 4)), _random_psd(rng, 4)
        budget = 0.5
        update = solve_weighted_dp(linear, quadratic, BallConstraint(budget))
        assert update.multiplier > 0.0
        assert abs(np.sum(np.abs(update.precoders) ** 2) - budget) <= 1e-8 * budget
        shifted = quadratic + update.multiplier * np.eye(4)
        for user in range(3):
            residual = shifted @ update.precoders[user] - linear[user].conj().T
            assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(linear[user])

    def test_per_user_quadratic_terms(self, rng: np.random.Generator) -> None:
        linear = _complex(rng, (2, 2, 3))
        quadratic = np.stack([_random_psd(rng, 3), _random_psd(rng, 3)])
        update = solve_weighted_dp(linear, quadratic, BallConstraint(1e6))
        for user in range(2):
            np.testing.assert_allclose(
                quadratic[user] @ update.precoders[user], linear[user].conj().T, rtol=1e-8, atol=1e-10
            )

    def test_empty_ball_is_rejected(self) -> None:
        with pytest.raises(ConfigurationError):
            BallConstraint(0.0)


class TestAnalogSolve:
    def test_without_a_surrogate_returns_the_anchor(self) -> None:
        phases = phase_grid(3)[[1, 4, 6]]
        analog = solve_quadratic_ap(np.zeros(3), np.zeros((3, 3)), 2.0, phases)
        np.testing.assert_allclose(analog, np.exp(1j * phases), atol=1e-14)

    def test_stationarity(self, rng: np.random.Generator) -> None:
        linear, quadratic = _complex(rng, 4), _random_psd(rng, 4)
        phases, gamma = rng.uniform(0, 2 * np.pi, 4), 0.7
        analog = solve_quadratic_ap(linear, quadratic, gamma, phases)
        residual = (quadratic + gamma * np.eye(4)) @ analog - linear.conj() - gamma * np.exp(1j * phases)
        assert np.linalg.norm(residual) <= 1e-10 * np.linalg.norm(linear.conj() + gamma * np.exp(1j * phases))

    def test_large_penalty_pins_the_anchor(self, rng: np.random.Generator) -> None:
        linear, quadratic = _complex(rng, 4), _random_psd(rng, 4)
        phases = rng.uniform(0, 2 * np.pi, 4)
        gamma = 1e6 * np.linalg.norm(quadratic, 2) * max(1.0, np.linalg.norm(linear))
        analog = solve_quadratic_ap(linear, quadratic, gamma, phases)
        assert np.linalg.norm(analog - np.exp(1j * phases)) <= 1e-3

    def test_penalty_must_be_positive(self) -> None:
        with pytest.raises(ConfigurationError):
            solve_quadratic_ap(np.zeros(2), np.eye(2), 0.0, np.zeros(2))


class TestProjection:
    def test_positive_reals_project_to_zero(self) -> None:
        np.testing.assert_array_equal(project_theta(np.array([0.3, 1.0, 7.0]), 3), 0.0)

    def test_zero_entries_project_to_zero(self) -> None:
        np.testing.assert_array_equal(project_theta(np.zeros(2, dtype=complex), 2), 0.0)

    def test_grid_points_are_fixed(self) -> None:
        grid = phase_grid(3)
        np.testing.assert_allclose(project_theta(0.8 * np.exp(1j * grid), 3), grid, atol=1e-12)

    @pytest.mark.parametrize("bits", [1, 2, 3, 4, 5, 6])
    def test_projection_minimizes_the_penalty(self, bits: int, rng: np.random.Generator) -> None:
        analog = rng.uniform(0.05, 1.5, 300) * np.exp(1j * rng.uniform(0, 2 * np.pi, 300))
        grid = phase_grid(bits)
        penalties = np.abs(analog[:, None] - np.exp(1j * grid)[None, :]) ** 2
        np.testing.assert_allclose(project_theta(analog, bits), grid[np.argmin(penalties, axis=1)], atol=1e-12)

    @pytest.mark.parametrize("bits", [1, 3, 6])
    def test_projection_is_idempotent(self, bits: int, rng: np.random.Generator) -> None:
        phases = project_theta(_complex(rng, (50,)), bits)
        np.testing.assert_allclose(project_theta(np.exp(1j * phases), bits), phases, atol=1e-12)
