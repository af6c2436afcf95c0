"""Experiment workflows: load a config, run the sweep and export the results."""

from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from hybrid_precoding._experiment.config import (
    ExperimentConfig,
    list_presets,
    load_config,
)
from hybrid_precoding._experiment.power import power_table as _power_table
from hybrid_precoding._service.experiment_service import (
    ExperimentResult,
    aggregate,
    export,
    run_experiment,
)
from hybrid_precoding._utils.constants import (
    PHASE_SHIFTER_POWER_MW,
    RF_CHAIN_POWER_MW,
)


def run(
    config_path: Optional[Path] = None,
    preset: Optional[str] = None,
    overrides: Optional[Mapping[str, Optional[str]]] = None,
    show_progress: bool = True,
) -> ExperimentResult:
    """Run an experiment and write its CSV files.

    :param config_path: A KEY=VALUE config file.
    :param preset: Name of a bundled preset, applied before the config file.
    :param overrides: Values that take precedence over both, keyed like the config file.
    :param show_progress: Show a progress bar.
    :return: The experiment result.
    """
    config = load_config(config_path, preset, overrides)
    return run_config(config, show_progress=show_progress)


def run_config(config: ExperimentConfig, show_progress: bool = True) -> ExperimentResult:
    """Run an already loaded config and write its CSV files to `config.out`."""
    result = run_experiment(config, show_progress=show_progress)
    export(result, Path(config.out), write_traces=config.write_traces, record_timing=config.record_timing)
    return result


def summarize(result: ExperimentResult) -> List[Dict[str, object]]:
    """Summary rows of a result, one per sweep point."""
    return aggregate(result.records).to_dict(orient="records")


def presets() -> List[str]:
    """Names of the bundled presets."""
    return list_presets()


def power_table(
    n_rf: int,
    n_ps_values: Sequence[int],
    transmit_mw: float,
    total_mw: float,
    rf_power_mw: float = RF_CHAIN_POWER_MW,
    ps_power_mw: float = PHASE_SHIFTER_POWER_MW,
) -> List[Dict[str, float]]:
    """Total power at a fixed transmit power and transmit power at a fixed total, per phase-shifter count."""
    return _power_table(n_rf, n_ps_values, transmit_mw, total_mw, rf_power_mw, ps_power_mw)
