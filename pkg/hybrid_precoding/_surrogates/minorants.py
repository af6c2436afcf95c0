"""Tight concave quadratic minorants of the log-det throughput."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from hybrid_precoding._core.throughput import cross_gains, interference_covariances
from hybrid_precoding._surrogates.bundles import AnalogMinorant, DigitalMinorant
from hybrid_precoding._utils.linalg import (
    gram,
    hermitian,
    inv_pd,
    logdet_pd,
    psd_sqrt,
    real_trace,
)
from hybrid_precoding.exceptions import DomainError


@dataclass
class LogdetMinorant:
    """Minorant of ln|I + [X]^2 Y^{-1}| at (Xbar, Ybar).

    The bound reads `constant + 2 Re<linear X> - <upsilon, [X]^2 + Y>`.
    """

    constant: float
    linear: np.ndarray
    upsilon: np.ndarray

    def evaluate(self, matrix_x: np.ndarray, matrix_y: np.ndarray) -> float:
        """Evaluate the bound at (X, Y)."""
        linear = real_trace(self.linear @ matrix_x)
        return self.constant + 2.0 * linear - real_trace(self.upsilon @ (gram(matrix_x) + matrix_y))


def logdet_minorant(x_bar: np.ndarray, y_bar: np.ndarray) -> LogdetMinorant:
    """Build the minorant of ln|I + [X]^2 Y^{-1}| that touches it at (Xbar, Ybar).

    :param x_bar: Expansion point X (n x m).
    :param y_bar: Expansion point Y (n x n), positive definite.
    :return: The minorant coefficients.
    """
    y_bar = hermitian(y_bar)
    if np.min(scipy.linalg.eigvalsh(y_bar)) <= 0:
        raise DomainError("The expansion matrix Y must be positive definite.")
    y_inv = inv_pd(y_bar)
    signal = gram(x_bar)
    ratio = real_trace(signal @ y_inv)
    constant = logdet_pd(y_bar + signal) - logdet_pd(y_bar) - ratio
    upsilon = hermitian(y_inv - inv_pd(y_bar + signal))
    return LogdetMinorant(constant=constant, linear=x_bar.conj().T @ y_inv, upsilon=upsilon)


def dp_minorant(effective: np.ndarray, precoders: np.ndarray, sigma: float) -> DigitalMinorant:
    """Minorants of every user's throughput as functions of V at fixed z.

    :param effective: Effective channels at the fixed analog vector, shape (K, N_t, N_c).
    :param precoders: Expansion point V, shape (K, N_c, N_t).
    :param sigma: Noise power.
    """
    gains = cross_gains(effective, precoders)
    psi = interference_covariances(gains, sigma)
    n_users, n_t, n_rf = effective.shape
    constant = np.empty(n_users)
    linear = np.empty((n_users, n_t, n_rf), dtype=complex)
    quadratic = np.empty((n_users, n_rf, n_rf), dtype=complex)
    upsilon = np.empty((n_users, n_t, n_t), dtype=complex)
    for user in range(n_users):
        bound = logdet_minorant(gains[user, user], psi[user])
        weighted = psd_sqrt(bound.upsilon) @ effective[user]
        constant[user] = bound.constant - sigma * real_trace(bound.upsilon)
        linear[user] = bound.linear @ effective[user]
        quadratic[user] = weighted.conj().T @ weighted
        upsilon[user] = bound.upsilon
    return DigitalMinorant(constant=constant, linear=linear, quadratic=quadratic, upsilon=upsilon)


def ap_minorant(operator: np.ndarray, analog: np.ndarray, sigma: float) -> AnalogMinorant:
    """Minorants of every user's throughput as functions of z at fixed V.

    :param operator: Stacked operators with shape (K, K, N_t, N_t, n), see `stacked_operator`.
    :param analog: Expansion point z.
    :param sigma: Noise power.
    """
    gains = np.einsum("kjtmn,n->kjtm", operator, analog)
    psi = interference_covariances(gains, sigma)
    n_users, n_t, n_phase = operator.shape[0], operator.shape[2], operator.shape[4]
    constant = np.empty(n_users)
    linear = np.empty((n_users, n_phase), dtype=complex)
    quadratic = np.empty((n_users, n_phase, n_phase), dtype=complex)
    upsilon = np.empty((n_users, n_t, n_t), dtype=complex)
    for user in range(n_users):
        bound = logdet_minorant(gains[user, user], psi[user])
        weighted = np.einsum("st,jtmn->jsmn", psd_sqrt(bound.upsilon), operator[user])
        constant[user] = bound.constant - sigma * real_trace(bound.upsilon)
        linear[user] = np.einsum("mt,tmn->n", bound.linear, operator[user, user])
        quadratic[user] = hermitian(np.einsum("jsmn,jsmp->np", weighted.conj(), weighted))
        upsilon[user] = bound.upsilon
    return AnalogMinorant(constant=constant, linear=linear, quadratic=quadratic, upsilon=upsilon)
