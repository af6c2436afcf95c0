"""Binary mapping matrices that fan phase shifters out to the antennas of a subarray."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from hybrid_precoding.exceptions import ConfigurationError
from hybrid_precoding.models import MappingKind


@dataclass(frozen=True)
class MappingMatrix:
    """An L x L_c binary matrix with exactly one 1 per row.

    Row l selects the phase shifter that drives antenna l of the subarray.
    """

    entries: np.ndarray
    kind: MappingKind

    def __post_init__(self) -> None:
        """Check that every antenna is driven by exactly one phase shifter."""
        if self.entries.ndim != 2 or self.entries.shape[1] > self.entries.shape[0]:
            raise ConfigurationError(f"Mapping must be L x L_c with L_c <= L, got {self.entries.shape}.")
        if not np.array_equal(self.entries.sum(axis=1), np.ones(self.entries.shape[0])):
            raise ConfigurationError("Every row of a mapping matrix needs exactly one nonzero entry.")

    @property
    def subarray_size(self) -> int:
        """L."""
        return int(self.entries.shape[0])

    @property
    def n_ps_per_rf(self) -> int:
        """L_c."""
        return int(self.entries.shape[1])

    @property
    def shifter_of_antenna(self) -> np.ndarray:
        """Index of the phase shifter each antenna hangs off."""
        return np.argmax(self.entries, axis=1)


def _check_sizes(subarray_size: int, n_ps_per_rf: int, divisible: bool) -> None:
    if not 1 <= n_ps_per_rf <= subarray_size:
        raise ConfigurationError(f"L_c must lie in [1, L], got L = {subarray_size}, L_c = {n_ps_per_rf}.")
    if divisible and subarray_size % n_ps_per_rf:
        raise ConfigurationError(f"L_c = {n_ps_per_rf} does not divide L = {subarray_size}.")


def _from_assignment(assignment: np.ndarray, n_ps_per_rf: int, kind: MappingKind) -> MappingMatrix:
    entries = np.zeros((assignment.size, n_ps_per_rf), dtype=int)
    entries[np.arange(assignment.size), assignment] = 1
    return MappingMatrix(entries=entries, kind=kind)


def make_adjacent_mapping(subarray_size: int, n_ps_per_rf: int) -> MappingMatrix:
    """Each phase shifter drives L / L_c neighbouring antennas (block-diagonal of all-ones columns)."""
    _check_sizes(subarray_size, n_ps_per_rf, divisible=True)
    group = subarray_size // n_ps_per_rf
    return _from_assignment(np.arange(subarray_size) // group, n_ps_per_rf, MappingKind.ADJACENT)


def make_interleaved_mapping(subarray_size: int, n_ps_per_rf: int) -> MappingMatrix:
    """Stack L / L_c identity matrices so antenna l hangs off shifter l mod L_c."""
    _check_sizes(subarray_size, n_ps_per_rf, divisible=True)
    return _from_assignment(np.arange(subarray_size) % n_ps_per_rf, n_ps_per_rf, MappingKind.INTERLEAVED)


def make_balanced_mapping(subarray_size: int, n_ps_per_rf: int) -> MappingMatrix:
    """Adjacent grouping for any L_c.

    The antennas form L_c contiguous groups whose sizes differ by at most one; the first
    L mod L_c groups take the extra antenna. Coincides with the adjacent mapping when L_c
    divides L.
    """
    _check_sizes(subarray_size, n_ps_per_rf, divisible=False)
    base, extra = divmod(subarray_size, n_ps_per_rf)
    sizes = np.full(n_ps_per_rf, base)
    sizes[:extra] += 1
    return _from_assignment(np.repeat(np.arange(n_ps_per_rf), sizes), n_ps_per_rf, MappingKind.BALANCED)


def make_identity_mapping(subarray_size: int) -> MappingMatrix:
    """One phase shifter per antenna (conventional AoSA)."""
    return _from_assignment(np.arange(subarray_size), subarray_size, MappingKind.IDENTITY)


def make_mapping(kind: MappingKind, subarray_size: int, n_ps_per_rf: int) -> MappingMatrix:
    """Build the mapping matrix of the requested kind.

    :param kind: Mapping kind.
    :param subarray_size: Antennas per subarray L.
    :param n_ps_per_rf: Phase shifters per RF chain L_c.
    :return: The mapping matrix.
    """
    if kind == MappingKind.ADJACENT:
        return make_adjacent_mapping(subarray_size, n_ps_per_rf)
    if kind == MappingKind.INTERLEAVED:
        return make_interleaved_mapping(subarray_size, n_ps_per_rf)
    if kind == MappingKind.BALANCED:
        return make_balanced_mapping(subarray_size, n_ps_per_rf)
    if n_ps_per_rf != subarray_size:
        raise ConfigurationError("The identity mapping requires L_c = L.")
    return make_identity_mapping(subarray_size)


def analog_precoder(mapping: MappingMatrix, analog: np.ndarray, n_rf: int) -> np.ndarray:
    """Assemble the N x N_c analog precoder blkdiag(A z_1, ..., A z_{N_c}).

    :param mapping: Mapping matrix A shared by all RF chains.
    :param analog: Vector z of length N_c * L_c in RF-chain-major order.
    :param n_rf: Number of RF chains N_c.
    """
    per_chain = np.asarray(analog).reshape(n_rf, mapping.n_ps_per_rf)
    columns = [(mapping.entries @ z_chain)[:, None] for z_chain in per_chain]
    return scipy.linalg.block_diag(*columns)
