"""Experiment configuration from flat KEY=VALUE files, presets and overrides."""
import enum
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, TypeVar, Union

import structlog
from dotenv import dotenv_values, load_dotenv

from hybrid_precoding._experiment.power import (
    AUTO_DELTA,
    resolve_delta,
    total_power,
    transmit_budget_from_total,
)
from hybrid_precoding._service.alternating import Algorithm, AlgorithmSettings
from hybrid_precoding._solvers.saddle import SaddleSettings
from hybrid_precoding._utils.constants import (
    DEFAULT_BANDWIDTH_HZ,
    NOISE_DENSITY_DBM_HZ,
    PHASE_SHIFTER_POWER_MW,
    RF_CHAIN_POWER_MW,
)
from hybrid_precoding.exceptions import ConfigurationError, DomainError
from hybrid_precoding.models import (
    ArrayGeometry,
    ClusterConfig,
    MappingKind,
    Scenario,
    noise_power_mw,
)

logger = structlog.get_logger(__name__)

PRESET_DIR = Path(__file__).parent / "presets"
WORKERS_ENV_VAR = "HYBRID_PRECODING_WORKERS"
MAX_DEFAULT_WORKERS = 8

T = TypeVar("T")


def load_environment() -> bool:
    """Load a .env file from the current directory if there is one.

    :return: True if a file was loaded.
    """
    current_path_env = os.path.join(os.getcwd(), ".env")
    if os.path.isfile(current_path_env):
        return load_dotenv(current_path_env)
    return False


loaded_env_vars = load_environment()


def worker_count() -> int:
    """Worker-pool size: HYBRID_PRECODING_WORKERS if set, else the CPU count capped at 8."""
    raw = os.getenv(WORKERS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return min(os.cpu_count() or 1, MAX_DEFAULT_WORKERS)
    try:
        workers = int(raw)
    except ValueError as err:
        raise ConfigurationError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}.") from err
    if workers < 1:
        raise ConfigurationError(f"{WORKERS_ENV_VAR} must be positive, got {workers}.")
    return workers


class PowerMode(str, enum.Enum):
    """Which budget is held fixed across a sweep."""

    FIXED_TRANSMIT = "fixed-transmit"
    FIXED_TOTAL = "fixed-total"


@dataclass(frozen=True)
class SweepPoint:
    """One configuration of a sweep, run once per seed."""

    point_id: str
    algorithm: Algorithm
    scenario: Scenario
    total_power_mw: float
    delta: Optional[float] = None


@dataclass
class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    """Everything an experiment needs; defaults follow the desk-scale reference setting."""

    n_e: int = 12
    n_a: int = 12
    n_t: int = 2
    n_users: int = 8
    n_rf: int = 8
    bits: int = 3
    cell_radius_m: float = 200.0
    min_distance_m: float = 10.0
    noise_density_dbm_hz: float = NOISE_DENSITY_DBM_HZ
    bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ
    n_clusters: int = 5
    n_subpaths: int = 10
    angle_spread_deg: float = 10.0
    algorithms: List[Algorithm] = field(default_factory=lambda: [Algorithm.MAXMIN])
    mapping: MappingKind = MappingKind.BALANCED
    sweep_lc: List[int] = field(default_factory=list)
    sweep_n_ps: List[int] = field(default_factory=lambda: [80])
    sweep_n_rf: List[int] = field(default_factory=list)
    include_aosa_baseline: bool = True
    power_mode: PowerMode = PowerMode.FIXED_TRANSMIT
    transmit_power_mw: float = 100.0
    total_power_mw: float = 3924.0
    rf_power_mw: float = RF_CHAIN_POWER_MW
    ps_power_mw: float = PHASE_SHIFTER_POWER_MW
    seeds: List[int] = field(default_factory=lambda: [0])
    deltas: List[Union[float, str]] = field(default_factory=lambda: [AUTO_DELTA])
    max_iterations: int = 500
    saddle_iterations: int = 500
    out: Path = Path("results")
    write_traces: bool = True
    record_timing: bool = False

    def __post_init__(self) -> None:
        """Validate the config."""
        if not self.algorithms:
            raise ConfigurationError("Select at least one algorithm.")
        if not self.seeds:
            raise ConfigurationError("Select at least one seed.")
        if self.rf_power_mw < 0 or self.ps_power_mw < 0:
            raise ConfigurationError("Component power constants must be non-negative.")
        for delta in self.deltas:
            try:
                resolve_delta(delta, self.transmit_power_mw)
            except DomainError as err:
                raise ConfigurationError(f"Invalid DELTA: {err}") from err

    @property
    def algorithm_settings(self) -> AlgorithmSettings:
        """Loop settings of every run."""
        return AlgorithmSettings(
            max_iterations=self.max_iterations, saddle=SaddleSettings(max_outer_iters=self.saddle_iterations)
        )

    def _scenario(self, n_rf: int, n_ps_per_rf: int, mapping: MappingKind, transmit_mw: float) -> Scenario:
        return Scenario(
            geometry=ArrayGeometry(n_e=self.n_e, n_a=self.n_a, n_t=self.n_t),
            clusters=ClusterConfig(self.n_clusters, self.n_subpaths, self.angle_spread_deg),
            n_users=self.n_users,
            n_rf=n_rf,
            n_ps_per_rf=n_ps_per_rf,
            mapping=mapping,
            resolution_bits=self.bits,
            transmit_power_mw=transmit_mw,
            noise_power_mw=noise_power_mw(self.noise_density_dbm_hz, self.bandwidth_hz),
            cell_radius_m=self.cell_radius_m,
            min_distance_m=self.min_distance_m,
        )

    def _per_rf_counts(self, n_rf: int, subarray_size: int) -> List[int]:
        # an explicit L_c list takes precedence over N_PS
        if self.sweep_lc:
            return list(self.sweep_lc)
        counts = []
        for n_ps in self.sweep_n_ps:
            if n_ps % n_rf:
                raise ConfigurationError(f"N_PS = {n_ps} is not a multiple of N_c = {n_rf}.")
            counts.append(n_ps // n_rf)
        return counts or [subarray_size]

    def sweep_points(self) -> List[SweepPoint]:
        """Expand the sweep in a fixed order: N_c, then L_c (AoSA baseline last), algorithm, delta."""
        n_antennas = self.n_e * self.n_a
        points: List[SweepPoint] = []
        for n_rf in self.sweep_n_rf or [self.n_rf]:
            if n_antennas % n_rf:
                raise ConfigurationError(f"N = {n_antennas} antennas cannot be split over N_c = {n_rf} RF chains.")
            subarray_size = n_antennas // n_rf
            layouts = [
                (MappingKind.IDENTITY if lc == subarray_size else self.mapping, lc)
                for lc in self._per_rf_counts(n_rf, subarray_size)
            ]
            if self.include_aosa_baseline and (MappingKind.IDENTITY, subarray_size) not in layouts:
                layouts.append((MappingKind.IDENTITY, subarray_size))
            for mapping, n_ps_per_rf in layouts:
                n_ps = n_rf * n_ps_per_rf
                if self.power_mode == PowerMode.FIXED_TRANSMIT:
                    transmit = self.transmit_power_mw
                    total = total_power(transmit, n_rf, n_ps, self.rf_power_mw, self.ps_power_mw)
                else:
                    total = self.total_power_mw
                    transmit = transmit_budget_from_total(total, n_rf, n_ps, self.rf_power_mw, self.ps_power_mw)
                scenario = self._scenario(n_rf, n_ps_per_rf, mapping, transmit)
                for algorithm in self.algorithms:
                    deltas: List[Optional[float]] = [None]
                    if algorithm == Algorithm.SOFTMAXMIN:
                        deltas = [resolve_delta(delta, transmit) for delta in self.deltas]
                    for delta in deltas:
                        point_id = f"{algorithm.value}_{mapping.value}_nrf{n_rf}_nps{n_ps}"
                        if delta is not None:
                            point_id += f"_d{delta:g}"
                        points.append(SweepPoint(point_id, algorithm, scenario, total, delta))
        return points


def _split(raw: str) -> List[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _as_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _as_delta(raw: str) -> Union[float, str]:
    return AUTO_DELTA if raw.strip().lower() == AUTO_DELTA else float(raw)


def _list_of(parse: Callable[[str], T]) -> Callable[[str], List[T]]:
    return lambda raw: [parse(item) for item in _split(raw)]


# config key -> (dataclass field, parser)
CONFIG_KEYS: Dict[str, tuple] = {
    "N_E": ("n_e", int),
    "N_A": ("n_a", int),
    "N_T": ("n_t", int),
    "N_USERS": ("n_users", int),
    "N_RF": ("n_rf", int),
    "BITS": ("bits", int),
    "CELL_RADIUS_M": ("cell_radius_m", float),
    "MIN_DISTANCE_M": ("min_distance_m", float),
    "NOISE_DENSITY_DBM_HZ": ("noise_density_dbm_hz", float),
    "BANDWIDTH_HZ": ("bandwidth_hz", float),
    "N_CLUSTERS": ("n_clusters", int),
    "N_SUBPATHS": ("n_subpaths", int),
    "ANGLE_SPREAD_DEG": ("angle_spread_deg", float),
    "ALGORITHM": ("algorithms", _list_of(Algorithm)),
    "MAPPING": ("mapping", MappingKind),
    "SWEEP_LC": ("sweep_lc", _list_of(int)),
    "SWEEP_N_PS": ("sweep_n_ps", _list_of(int)),
    "SWEEP_N_RF": ("sweep_n_rf", _list_of(int)),
    "INCLUDE_AOSA_BASELINE": ("include_aosa_baseline", _as_bool),
    "POWER_MODE": ("power_mode", PowerMode),
    "TRANSMIT_POWER_MW": ("transmit_power_mw", float),
    "TOTAL_POWER_MW": ("total_power_mw", float),
    "RF_POWER_MW": ("rf_power_mw", float),
    "PS_POWER_MW": ("ps_power_mw", float),
    "SEEDS": ("seeds", _list_of(int)),
    "DELTA": ("deltas", _list_of(_as_delta)),
    "MAX_ITERATIONS": ("max_iterations", int),
    "SADDLE_ITERATIONS": ("saddle_iterations", int),
    "OUT": ("out", Path),
    "WRITE_TRACES": ("write_traces", _as_bool),
    "RECORD_TIMING": ("record_timing", _as_bool),
}


def preset_path(name: str) -> Path:
    """Path of a bundled preset file."""
    path = PRESET_DIR / f"{name}.env"
    if not path.is_file():
        raise ConfigurationError(f"Unknown preset {name!r}; available presets: {', '.join(list_presets())}.")
    return path


def list_presets() -> List[str]:
    """Names of the bundled presets."""
    return sorted(path.stem for path in PRESET_DIR.glob("*.env"))


def config_from_values(values: Mapping[str, Optional[str]]) -> ExperimentConfig:
    """Build a config from KEY=VALUE pairs; keys are case-insensitive and empty values are ignored.

    :param values: Raw string values, e.g. from `dotenv_values`.
    :return: The validated config.
    """
    kwargs = {}
    for key, raw in values.items():
        if raw is None or raw.strip() == "":
            continue
        entry = CONFIG_KEYS.get(key.upper())
        if entry is None:
            logger.warning("Ignoring unknown config key.", key=key)
            continue
        name, parse = entry
        try:
            kwargs[name] = parse(raw)
        except ValueError as err:
            raise ConfigurationError(f"Invalid value {raw!r} for {key.upper()}: {err}") from err
    return ExperimentConfig(**kwargs)


def load_config(
    path: Optional[Path] = None, preset: Optional[str] = None, overrides: Optional[Mapping[str, Optional[str]]] = None
) -> ExperimentConfig:
    """Merge a preset, a config file and overrides, later sources winning.

    :param path: A KEY=VALUE config file.
    :param preset: Name of a bundled preset.
    :param overrides: Values that take precedence, e.g. from CLI flags.
    :return: The validated config.
    """
    values: Dict[str, Optional[str]] = {}
    if preset is not None:
        values.update({key.upper(): value for key, value in dotenv_values(preset_path(preset)).items()})
    if path is not None:
        if not Path(path).is_file():
            raise ConfigurationError(f"Config file {path} does not exist.")
        values.update({key.upper(): value for key, value in dotenv_values(path).items()})
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key.upper()] = value
    config = config_from_values(values)
    logger.info("Loaded experiment config.", preset=preset, path=str(path) if path else None)
    return config

