"""General data classes for the hybrid precoding package."""
import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from hybrid_precoding._utils.constants import (
    BITS_PER_NAT,
    DEFAULT_BANDWIDTH_HZ,
    NOISE_DENSITY_DBM_HZ,
)
from hybrid_precoding.exceptions import ConfigurationError


def noise_power_mw(density_dbm_hz: float = NOISE_DENSITY_DBM_HZ, bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ) -> float:
    """Integrate a noise power density over a bandwidth.

    :param density_dbm_hz: Noise density in dBm/Hz.
    :param bandwidth_hz: Bandwidth in Hz.
    :return: Noise power in mW.
    """
    if bandwidth_hz <= 0:
        raise ConfigurationError(f"Bandwidth must be positive, got {bandwidth_hz}.")
    return float(10.0 ** ((density_dbm_hz + 10.0 * np.log10(bandwidth_hz)) / 10.0))


class MappingKind(str, enum.Enum):
    """How the phase shifters of an RF chain fan out to its subarray."""

    ADJACENT = "adjacent"
    INTERLEAVED = "interleaved"
    BALANCED = "balanced"
    IDENTITY = "identity"


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna geometry of the base station (UCyA) and the users (ULA)."""

    n_e: int = 12
    n_a: int = 12
    n_t: int = 2
    ucya_radius_wavelengths: float = 2.0
    vertical_spacing_wavelengths: float = 0.5

    def __post_init__(self) -> None:
        """Validate the geometry."""
        if min(self.n_e, self.n_a, self.n_t) < 1:
            raise ConfigurationError(f"Element counts must be positive, got {self}.")

    @property
    def n_antennas(self) -> int:
        """Total number N = N_e * N_a of base station antennas."""
        return self.n_e * self.n_a


@dataclass(frozen=True)
class ClusterConfig:
    """Clustered multipath settings."""

    n_clusters: int = 5
    n_subpaths: int = 10
    angle_spread_deg: float = 10.0

    def __post_init__(self) -> None:
        """Validate the cluster settings."""
        if self.n_clusters < 1 or self.n_subpaths < 1:
            raise ConfigurationError("Cluster and subpath counts must be positive.")
        if self.angle_spread_deg < 0:
            raise ConfigurationError("Angle spread must be non-negative.")


@dataclass(frozen=True)
class Scenario:  # pylint: disable=too-many-instance-attributes
    """All system dimensions and budgets of one simulated downlink."""

    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    clusters: ClusterConfig = field(default_factory=ClusterConfig)
    n_users: int = 8
    n_rf: int = 8
    n_ps_per_rf: int = 10
    mapping: MappingKind = MappingKind.BALANCED
    resolution_bits: int = 3
    transmit_power_mw: float = 100.0
    noise_power_mw: float = field(default_factory=noise_power_mw)
    cell_radius_m: float = 200.0
    min_distance_m: float = 10.0

    def __post_init__(self) -> None:
        """Validate that the dimensions are consistent."""
        if self.n_users < 1 or self.n_rf < 1:
            raise ConfigurationError("The number of users and RF chains must be positive.")
        if self.geometry.n_antennas % self.n_rf != 0:
            raise ConfigurationError(
                f"N = {self.geometry.n_antennas} antennas cannot be split into {self.n_rf} equal subarrays."
            )
        if not 1 <= self.n_ps_per_rf <= self.subarray_size:
            raise ConfigurationError(f"L_c must lie in [1, {self.subarray_size}], got {self.n_ps_per_rf}.")
        if self.mapping == MappingKind.IDENTITY and self.n_ps_per_rf != self.subarray_size:
            raise ConfigurationError("The identity mapping requires L_c = L.")
        if self.mapping in (MappingKind.ADJACENT, MappingKind.INTERLEAVED) and self.subarray_size % self.n_ps_per_rf:
            raise ConfigurationError(f"L_c = {self.n_ps_per_rf} must divide L = {self.subarray_size}.")
        if self.resolution_bits < 1:
            raise ConfigurationError("Phase shifters need at least one bit of resolution.")
        if self.transmit_power_mw <= 0 or self.noise_power_mw <= 0:
            raise ConfigurationError("Transmit power and noise power must be positive.")
        if not 0 < self.min_distance_m < self.cell_radius_m:
            raise ConfigurationError("User distances need 0 < min_distance_m < cell_radius_m.")

    @property
    def subarray_size(self) -> int:
        """Antennas per RF chain, L = N / N_c."""
        return self.geometry.n_antennas // self.n_rf

    @property
    def n_phase_shifters(self) -> int:
        """N_PS = N_c * L_c."""
        return self.n_rf * self.n_ps_per_rf

    @property
    def power_budget(self) -> float:
        """Digital power budget P_L = P / L."""
        return self.transmit_power_mw / self.subarray_size


@dataclass
class ChannelSet:
    """Channel matrices H_k of all users together with their link statistics.

    `matrices` has shape (K, N_t, N); the block view splits the antenna axis into the
    N_c contiguous subarrays of L antennas.
    """

    matrices: np.ndarray
    n_rf: int
    distances_m: np.ndarray
    path_loss_db: np.ndarray

    def __post_init__(self) -> None:
        """Validate the shape of the channel tensor."""
        if self.matrices.ndim != 3 or self.matrices.shape[2] % self.n_rf != 0:
            raise ConfigurationError(f"Channel tensor of shape {self.matrices.shape} does not tile {self.n_rf} blocks.")
        if not np.all(np.isfinite(self.matrices)):
            raise ConfigurationError("Channel tensor contains non-finite entries.")

    @property
    def n_users(self) -> int:
        """Number of users K."""
        return int(self.matrices.shape[0])

    @property
    def n_t(self) -> int:
        """User antennas N_t."""
        return int(self.matrices.shape[1])

    @property
    def subarray_size(self) -> int:
        """Antennas per subarray L."""
        return int(self.matrices.shape[2] // self.n_rf)

    @property
    def blocks(self) -> np.ndarray:
        """Block view H_{k,n_c} with shape (K, N_t, N_c, L)."""
        return self.matrices.reshape(self.n_users, self.n_t, self.n_rf, self.subarray_size)

    def block(self, user: int, rf_chain: int) -> np.ndarray:
        """Return H_{k,n_c} (N_t x L)."""
        return self.blocks[user, :, rf_chain, :]

    def row(self, user: int, rf_chain: int, antenna: int) -> np.ndarray:
        """Return the row H_{k,n_c}(n_t) (length L)."""
        return self.blocks[user, antenna, rf_chain, :]


@dataclass
class PrecoderState:
    """Digital precoders V, analog vector z and quantized phases theta."""

    precoders: np.ndarray
    analog: np.ndarray
    phases: np.ndarray

    def copy(self) -> "PrecoderState":
        """Return a deep copy."""
        return PrecoderState(self.precoders.copy(), self.analog.copy(), self.phases.copy())

    def quantized(self) -> "PrecoderState":
        """Return the hard-feasible state with z replaced by e^{j theta}."""
        return PrecoderState(self.precoders.copy(), np.exp(1j * self.phases), self.phases.copy())

    @property
    def penalty(self) -> float:
        """Return the penalty term ||z - e^{j theta}||^2."""
        return float(np.sum(np.abs(self.analog - np.exp(1j * self.phases)) ** 2))


@dataclass
class ThroughputReport:
    """Per-user throughputs r_k in nats."""

    rates: np.ndarray

    @property
    def min(self) -> float:
        """Users' minimum throughput."""
        return float(np.min(self.rates))

    @property
    def sum(self) -> float:
        """Sum throughput."""
        return float(np.sum(self.rates))

    @property
    def rates_bits(self) -> np.ndarray:
        """Throughputs in bps/Hz."""
        return self.rates * BITS_PER_NAT


@dataclass
class SoftThroughputReport:
    """Scaled throughputs r_{k,delta} and the two soft objectives."""

    rates: np.ndarray
    delta: float
    soft_min: float
    xi_logdet: float

    @property
    def min(self) -> float:
        """f_delta, the minimum scaled throughput."""
        return float(np.min(self.rates))


@dataclass
class MetricsRecord:  # pylint: disable=too-many-instance-attributes
    """One row of an experiment: a sweep point evaluated on one seed."""

    point_id: str
    algorithm: str
    mapping: str
    n_rf: int
    n_ps: int
    transmit_power_mw: float
    total_power_mw: float
    delta: Optional[float]
    seed: int
    min_throughput: float = float("nan")
    sum_throughput: float = float("nan")
    user_throughputs: List[float] = field(default_factory=list)
    iterations: int = 0
    penalty: float = float("nan")
    converged: bool = False
    wall_time_s: float = 0.0
    error: str = ""

    def as_row(self, record_timing: bool = False) -> Dict[str, object]:
        """Flatten the record for tabular export, with throughputs in bps/Hz."""
        row: Dict[str, object] = {
            "point_id": self.point_id,
            "algorithm": self.algorithm,
            "mapping": self.mapping,
            "n_rf": self.n_rf,
            "n_ps": self.n_ps,
            "transmit_power_mw": self.transmit_power_mw,
            "total_power_mw": self.total_power_mw,
            "delta": self.delta,
            "seed": self.seed,
            "min_throughput_bps_hz": self.min_throughput * BITS_PER_NAT,
            "sum_throughput_bps_hz": self.sum_throughput * BITS_PER_NAT,
            "iterations": self.iterations,
            "penalty": self.penalty,
            "converged": self.converged,
        }
        for user, rate in enumerate(self.user_throughputs):
            row[f"user_{user}_bps_hz"] = rate * BITS_PER_NAT
        if record_timing:
            row["wall_time_s"] = self.wall_time_s
        row["error"] = self.error
        return row
