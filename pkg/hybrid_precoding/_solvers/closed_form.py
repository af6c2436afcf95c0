"""Closed-form solutions of the quadratic subproblems."""
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.optimize
import structlog

from hybrid_precoding._core.phases import quantize_phase
from hybrid_precoding._utils.linalg import hermitian
from hybrid_precoding.exceptions import ConfigurationError, NumericalError

logger = structlog.get_logger(__name__)

REGULARIZATION = 1e-12
MAX_DOUBLINGS = 200
BISECTION_RTOL = 1e-15
BISECTION_MAXITER = 400


@dataclass(frozen=True)
class BallConstraint:
    """Total digital power budget sum_k ||V_k||^2 <= P_L."""

    radius_sq: float

    def __post_init__(self) -> None:
        """Reject empty balls."""
        if self.radius_sq <= 0:
            raise ConfigurationError(f"The power budget must be positive, got {self.radius_sq}.")


@dataclass
class DigitalUpdate:
    """Result of a DP closed-form solve.

    :param precoders: New V with shape (K, N_c, N_t).
    :param multiplier: Lagrange multiplier mu of the power constraint (0 if inactive).
    """

    precoders: np.ndarray
    multiplier: float


def bisect_power_multiplier(power_of_mu: Callable[[float], float], target: float) -> float:
    """Find mu >= 0 with power_of_mu(mu) = target for a decreasing power function.

    The upper end of the bracket starts at 1 and doubles until the power drops below the target.

    :param power_of_mu: Transmit power as a function of the multiplier.
    :param target: The power budget P_L.
    :return: 0 if the unconstrained solution is feasible, otherwise the multiplier.
    """
    if power_of_mu(0.0) <= target:
        return 0.0
    lower, upper = 0.0, 1.0
    doublings = 0
    while power_of_mu(upper) > target:
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise NumericalError(f"No bracket for the power multiplier after {MAX_DOUBLINGS} doublings.")
        lower, upper = upper, 2.0 * upper
    if power_of_mu(upper) == target:
        return upper
    return float(
        scipy.optimize.bisect(
            lambda mu: power_of_mu(mu) - target,
            lower,
            upper,
            xtol=upper * 1e-17,
            rtol=BISECTION_RTOL,
            maxiter=BISECTION_MAXITER,
            disp=False,
        )
    )


def _regularize(quadratic: np.ndarray) -> np.ndarray:
    dim = quadratic.shape[-1]
    scale = np.real(np.trace(quadratic, axis1=-2, axis2=-1)) / dim
    return hermitian(quadratic) + REGULARIZATION * scale[..., None, None] * np.eye(dim)


def solve_weighted_dp(linear: np.ndarray, quadratic: np.ndarray, ball: BallConstraint) -> DigitalUpdate:
    """Maximize sum_k 2 Re<B_k V_k> - <C_k, [V_k]^2> subject to the power ball.

    The solution is V_k = (C_k + mu I)^{-1} B_k^H, with mu = 0 when that is feasible and
    otherwise found by bisection so the budget is met with equality.

    :param linear: B_k with shape (K, N_t, N_c).
    :param quadratic: A shared C with shape (N_c, N_c) or per-user C_k with shape (K, N_c, N_c).
    :param ball: The power constraint.
    """
    n_users = linear.shape[0]
    if quadratic.ndim == 2:
        quadratic = np.broadcast_to(quadratic, (n_users,) + quadratic.shape)
    eigvals, eigvecs = np.linalg.eigh(_regularize(quadratic))
    eigvals = np.clip(eigvals, 0.0, None)
    # coordinates of B_k^H in the eigenbasis of C_k, shape (K, N_c, N_t)
    rotated = np.conj(np.swapaxes(eigvecs, -1, -2)) @ np.conj(np.swapaxes(linear, -1, -2))
    weights = np.sum(np.abs(rotated) ** 2, axis=-1)

    def power(mu: float) -> float:
        denom = (eigvals + mu) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(weights > 0, weights / denom, 0.0)
        return float(np.sum(terms))

    multiplier = bisect_power_multiplier(power, ball.radius_sq)
    shifted = eigvals + multiplier
    if np.any((shifted <= 0) & (weights > 0)):
        raise NumericalError("The regularized quadratic coefficient is singular.")
    with np.errstate(divide="ignore", invalid="ignore"):
        scaling = np.where(shifted > 0, 1.0 / shifted, 0.0)
    precoders = eigvecs @ (scaling[..., None] * rotated)
    return DigitalUpdate(precoders=precoders, multiplier=multiplier)


def solve_quadratic_ap(linear: np.ndarray, quadratic: np.ndarray, gamma: float, phases: np.ndarray) -> np.ndarray:
    """Return z = (C + gamma I)^{-1} (b^H + gamma e^{j theta}).

    This maximizes 2 Re(b z) - z^H C z - gamma ||z - e^{j theta}||^2, which is the same
    as minimizing a majorant of the form a - 2 Re(b z) + z^H C z plus the penalty.
    """
    if gamma <= 0:
        raise ConfigurationError(f"The penalty factor must be positive, got {gamma}.")
    system = hermitian(quadratic) + gamma * np.eye(quadratic.shape[0])
    rhs = np.conj(linear) + gamma * np.exp(1j * phases)
    return scipy.linalg.solve(system, rhs, assume_a="her")


def project_theta(analog: np.ndarray, bits: int) -> np.ndarray:
    """Grid phases closest to the entries of z; the phase of 0 is taken as 0."""
    return np.asarray(quantize_phase(np.angle(analog), bits))
