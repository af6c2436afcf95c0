"""Coefficient bundles of the quadratic surrogates built at an expansion point."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from hybrid_precoding._utils.linalg import gram


@dataclass
class MinorantBundle(ABC):
    """Per-user concave quadratic minorants.

    :param constant: Constants a_k, shape (K,).
    :param linear: Linear coefficients B_k (or b_k), one per user.
    :param quadratic: PSD quadratic coefficients C_k, one per user.
    :param upsilon: Gap matrices Upsilon_k of the log-det inequality, shape (K, N_t, N_t).
    """

    constant: np.ndarray
    linear: np.ndarray
    quadratic: np.ndarray
    upsilon: np.ndarray

    @property
    def n_users(self) -> int:
        """Number of users K."""
        return int(self.constant.shape[0])

    @abstractmethod
    def values(self, point: np.ndarray) -> np.ndarray:
        """Evaluate every user's surrogate at a point."""

    @abstractmethod
    def weighted(self, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return linear and quadratic coefficients of sum_k w_k * surrogate_k."""


class DigitalMinorant(MinorantBundle):
    """Minorants over V: a_k + 2 Re<B_k V_k> - <C_k, sum_j [V_j]^2>.

    `linear` has shape (K, N_t, N_c) and `quadratic` (K, N_c, N_c).
    """

    def values(self, point: np.ndarray) -> np.ndarray:
        """Evaluate the minorants at V with shape (K, N_c, N_t)."""
        linear = np.real(np.einsum("kmc,kcm->k", self.linear, point))
        covariance = gram(point).sum(axis=0)
        quadratic = np.real(np.einsum("kab,ba->k", self.quadratic, covariance))
        return self.constant + 2.0 * linear - quadratic

    def weighted(self, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Weighted B_k per user and the aggregate C."""
        return weights[:, None, None] * self.linear, np.einsum("k,kab->ab", weights, self.quadratic)


class AnalogMinorant(MinorantBundle):
    """Minorants over z: a_k + 2 Re(b_k z) - z^H C_k z.

    `linear` has shape (K, n) and `quadratic` (K, n, n) with n = N_c * L_c.
    """

    def values(self, point: np.ndarray) -> np.ndarray:
        """Evaluate the minorants at z."""
        linear = np.real(self.linear @ point)
        quadratic = np.real(np.einsum("n,knp,p->k", point.conj(), self.quadratic, point))
        return self.constant + 2.0 * linear - quadratic

    def weighted(self, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Aggregate b and C."""
        return weights @ self.linear, np.einsum("k,knp->np", weights, self.quadratic)


@dataclass
class MajorantBundle(ABC):
    """A convex quadratic majorant of ln|Xi|, summed over users.

    :param constant: The constant a.
    :param linear: Per-user linear coefficients.
    :param quadratic: Per-user PSD quadratic coefficients.
    :param auxiliary: Per-user weight matrices (C-tilde or Upsilon_2), shape (K, N_t, N_t).
    """

    constant: float
    linear: np.ndarray
    quadratic: np.ndarray
    auxiliary: np.ndarray

    @abstractmethod
    def value(self, point: np.ndarray) -> float:
        """Evaluate the majorant at a point."""


class DigitalMajorant(MajorantBundle):
    """a_1 - 2 sum_k Re<B_k V_k> + sum_k <C_k, [V_k]^2> with per-user C_k."""

    def value(self, point: np.ndarray) -> float:
        """Evaluate at V with shape (K, N_c, N_t)."""
        linear = np.real(np.einsum("kmc,kcm->", self.linear, point))
        quadratic = np.real(np.einsum("kcm,kcd,kdm->", point.conj(), self.quadratic, point))
        return float(self.constant - 2.0 * linear + quadratic)


class AnalogMajorant(MajorantBundle):
    """a_2 - 2 Re(b z) + z^H C z with the user-aggregated b and C."""

    @property
    def aggregate_linear(self) -> np.ndarray:
        """b_2 = sum_k b_{2,k}."""
        return self.linear.sum(axis=0)

    @property
    def aggregate_quadratic(self) -> np.ndarray:
        """C_2 = sum_k C_{2,k}."""
        return self.quadratic.sum(axis=0)

    def value(self, point: np.ndarray) -> float:
        """Evaluate at z."""
        linear = np.real(self.aggregate_linear @ point)
        quadratic = np.real(point.conj() @ self.aggregate_quadratic @ point)
        return float(self.constant - 2.0 * linear + quadratic)
