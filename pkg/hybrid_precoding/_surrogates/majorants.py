"""Tight convex quadratic majorants of ln|Xi_delta| for the soft max-min objective.

Both builders expand ln|sum_k (I - X_k^H Y_k^{-1} X_k)| around the current point with
X_k the own-signal gain and Y_k = [X_k]^2 + delta Psi_k. Y_k dominates [X_k]^2 because
Psi_k contains sigma I, so the bound is valid for every V and z.
"""
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg
import structlog

from hybrid_precoding._core.throughput import (
    check_delta,
    cross_gains,
    interference_covariances,
)
from hybrid_precoding._surrogates.bundles import AnalogMajorant, DigitalMajorant
from hybrid_precoding._utils.linalg import (
    gram,
    hermitian,
    inv_pd,
    logdet_pd,
    psd_sqrt,
    real_trace,
)
from hybrid_precoding.exceptions import DomainError

logger = structlog.get_logger(__name__)


@dataclass
class _SoftExpansion:
    xi_logdet: float
    xi_inv: np.ndarray
    # per user: X^H Y^{-1}, X^H Y^{-1} X and Y^{-1} X Xi^{-1} X^H Y^{-1}
    projections: List[np.ndarray]
    captured: List[np.ndarray]
    weights: List[np.ndarray]

    @property
    def base_constant(self) -> float:
        return self.xi_logdet + sum(real_trace(self.xi_inv @ term) for term in self.captured)


def _expand(gains: np.ndarray, sigma: float, delta: float) -> _SoftExpansion:
    check_delta(delta)
    psi = interference_covariances(gains, sigma)
    n_users, n_t = gains.shape[0], gains.shape[2]
    xi = np.zeros((n_t, n_t), dtype=complex)
    projections, captured = [], []
    for user in range(n_users):
        own = gains[user, user]
        projection = own.conj().T @ inv_pd(gram(own) + delta * psi[user])
        projections.append(projection)
        captured.append(hermitian(projection @ own))
        xi += np.eye(n_t) - captured[-1]
    xi = hermitian(xi)
    min_eig = float(np.min(scipy.linalg.eigvalsh(xi)))
    if min_eig <= 0:
        raise DomainError(f"Xi is not positive definite (min eigenvalue {min_eig}); delta may be too small.")
    xi_inv = inv_pd(xi)
    weights = [hermitian(projection.conj().T @ xi_inv @ projection) for projection in projections]
    return _SoftExpansion(logdet_pd(xi), xi_inv, projections, captured, weights)


def softmin_majorant_dp(effective: np.ndarray, precoders: np.ndarray, sigma: float, delta: float) -> DigitalMajorant:
    """Majorant of ln|Xi_delta| as a function of V at fixed z.

    :param effective: Effective channels at the fixed analog vector, shape (K, N_t, N_c).
    :param precoders: Expansion point V, shape (K, N_c, N_t).
    :param sigma: Noise power.
    :param delta: Throughput scaling in (0, 1].
    :return: The majorant, with per-user C_{1,k} = D_k + delta * sum_{j != k} D_j.
    """
    expansion = _expand(cross_gains(effective, precoders), sigma, delta)
    n_users = effective.shape[0]
    linear = np.stack([expansion.xi_inv @ expansion.projections[k] @ effective[k] for k in range(n_users)])
    own_terms = []
    for user in range(n_users):
        weighted = psd_sqrt(expansion.weights[user]) @ effective[user]
        own_terms.append(weighted.conj().T @ weighted)
    own = np.stack(own_terms)
    quadratic = own + delta * (own.sum(axis=0) - own)
    constant = expansion.base_constant + delta * sigma * sum(real_trace(w) for w in expansion.weights)
    return DigitalMajorant(
        constant=constant, linear=linear, quadratic=quadratic, auxiliary=np.stack(expansion.weights)
    )


def softmin_majorant_ap(operator: np.ndarray, analog: np.ndarray, sigma: float, delta: float) -> AnalogMajorant:
    """Majorant of ln|Xi_delta| as a function of z at fixed V.

    :param operator: Stacked operators with shape (K, K, N_t, N_t, n).
    :param analog: Expansion point z.
    :param sigma: Noise power.
    :param delta: Throughput scaling in (0, 1].
    """
    gains = np.einsum("kjtmn,n->kjtm", operator, analog)
    expansion = _expand(gains, sigma, delta)
    n_users, n_phase = operator.shape[0], operator.shape[4]
    linear = np.empty((n_users, n_phase), dtype=complex)
    quadratic = np.empty((n_users, n_phase, n_phase), dtype=complex)
    for user in range(n_users):
        coefficient = expansion.xi_inv @ expansion.projections[user]
        linear[user] = np.einsum("mt,tmn->n", coefficient, operator[user, user])
        scaled = np.einsum("st,jtmn->jsmn", psd_sqrt(expansion.weights[user]), operator[user])
        interference = np.full(n_users, delta)
        interference[user] = 1.0
        quadratic[user] = hermitian(np.einsum("j,jsmn,jsmp->np", interference, scaled.conj(), scaled))
    constant = expansion.base_constant + delta * sigma * sum(real_trace(w) for w in expansion.weights)
    logger.debug("Built analog majorant.", xi_logdet=expansion.xi_logdet)
    return AnalogMajorant(constant=constant, linear=linear, quadratic=quadratic, auxiliary=np.stack(expansion.weights))
