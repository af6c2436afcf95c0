"""Effective channels, log-det throughputs and transmit power of a hybrid precoder."""
import numpy as np
from scipy.special import logsumexp

from hybrid_precoding._core.mapping import MappingMatrix
from hybrid_precoding._utils.linalg import gram, inv_pd, logdet_pd
from hybrid_precoding.exceptions import DomainError
from hybrid_precoding.models import (
    ChannelSet,
    PrecoderState,
    SoftThroughputReport,
    ThroughputReport,
)

POWER_RTOL = 1e-8


def effective_channels(channels: ChannelSet, mapping: MappingMatrix, analog: np.ndarray) -> np.ndarray:
    """Return the effective channels with shape (K, N_t, N_c).

    Column n_c of user k is H_{k,n_c} A z_{n_c}.
    """
    if analog.size != channels.n_rf * mapping.n_ps_per_rf or mapping.subarray_size != channels.subarray_size:
        raise DomainError(
            f"Analog vector of length {analog.size} and mapping {mapping.entries.shape} do not fit "
            f"{channels.n_rf} subarrays of {channels.subarray_size} antennas."
        )
    fanned = analog.reshape(channels.n_rf, mapping.n_ps_per_rf) @ mapping.entries.T
    return np.einsum("ktcl,cl->ktc", channels.blocks, fanned)


def cross_gains(effective: np.ndarray, precoders: np.ndarray) -> np.ndarray:
    """Return X[k, j] = effective_k V_j with shape (K, K, N_t, N_t)."""
    return np.einsum("ktc,jcm->kjtm", effective, precoders)


def stacked_operator(channels: ChannelSet, mapping: MappingMatrix, precoders: np.ndarray) -> np.ndarray:
    """Linear operators in z of the cross gains, with shape (K, K, N_t, N_t, N_c * L_c).

    Contracting the last axis with z gives `cross_gains(effective_channels(z), V)`.
    """
    shifted = np.einsum("ktcl,lp->ktcp", channels.blocks, mapping.entries)
    operator = np.einsum("jcm,ktcp->kjtmcp", precoders, shifted)
    n_users, n_t = channels.n_users, channels.n_t
    return operator.reshape(n_users, n_users, n_t, n_t, -1)


def interference_covariances(gains: np.ndarray, sigma: float) -> np.ndarray:
    """Return Psi_k = sum over j != k of [X_kj]^2 plus sigma I, shape (K, N_t, N_t)."""
    if sigma <= 0:
        raise DomainError(f"Noise power must be positive, got {sigma}.")
    n_users, n_t = gains.shape[0], gains.shape[2]
    total = gram(gains).sum(axis=1)
    own = gram(gains[np.arange(n_users), np.arange(n_users)])
    return total - own + sigma * np.eye(n_t)


def rates_from_gains(gains: np.ndarray, sigma: float, delta: float = 1.0) -> np.ndarray:
    """Return ln|I + (1/delta) [X_kk]^2 Psi_k^{-1}| for every user."""
    psi = delta * interference_covariances(gains, sigma)
    rates = np.empty(gains.shape[0])
    for user in range(gains.shape[0]):
        signal = gram(gains[user, user])
        rates[user] = logdet_pd(psi[user] + signal) - logdet_pd(psi[user])
    return np.maximum(rates, 0.0)


def soft_objective_matrix(gains: np.ndarray, sigma: float, delta: float) -> np.ndarray:
    """Return Xi = sum_k (I - X_kk^H (X_kk X_kk^H + delta Psi_k)^{-1} X_kk)."""
    psi = interference_covariances(gains, sigma)
    n_t = gains.shape[3]
    xi = np.zeros((n_t, n_t), dtype=complex)
    for user in range(gains.shape[0]):
        own = gains[user, user]
        xi += np.eye(n_t) - own.conj().T @ inv_pd(gram(own) + delta * psi[user]) @ own
    return xi


def throughput(
    channels: ChannelSet, mapping: MappingMatrix, state: PrecoderState, sigma: float
) -> ThroughputReport:
    """Evaluate r_k = ln|I + [H_k V_k]^2 Psi_k^{-1}| for all users at the given state.

    :param channels: Channels of all users.
    :param mapping: Mapping matrix of the analog stage.
    :param state: Precoder state; its analog vector z is used as is.
    :param sigma: Noise power.
    :return: Per-user throughputs in nats.
    """
    gains = cross_gains(effective_channels(channels, mapping, state.analog), state.precoders)
    return ThroughputReport(rates=rates_from_gains(gains, sigma))


def check_delta(delta: float) -> None:
    """Raise a DomainError unless 0 < delta <= 1."""
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must lie in (0, 1], got {delta}.")


def scaled_throughput(
    channels: ChannelSet, mapping: MappingMatrix, state: PrecoderState, sigma: float, delta: float
) -> SoftThroughputReport:
    """Evaluate the delta-scaled throughputs together with the soft-min and log-det soft objectives."""
    check_delta(delta)
    gains = cross_gains(effective_channels(channels, mapping, state.analog), state.precoders)
    rates = rates_from_gains(gains, sigma, delta)
    return SoftThroughputReport(
        rates=rates,
        delta=delta,
        soft_min=float(logsumexp(-rates)),
        xi_logdet=logdet_pd(soft_objective_matrix(gains, sigma, delta)),
    )


def transmit_power(precoders: np.ndarray) -> float:
    """Return sum_k ||V_k||^2."""
    return float(np.sum(np.abs(precoders) ** 2))


def is_power_feasible(precoders: np.ndarray, budget: float, rtol: float = POWER_RTOL) -> bool:
    """Whether the digital precoders respect the budget P_L up to a relative tolerance."""
    return transmit_power(precoders) <= budget * (1.0 + rtol)
