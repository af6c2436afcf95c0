"""The CLI for hybrid precoding experiments."""

from pathlib import Path
from typing import Dict, List, Optional

import typer
from tabulate import tabulate

from hybrid_precoding.__about__ import __version__
from hybrid_precoding._experiment.config import PowerMode
from hybrid_precoding._service.alternating import Algorithm
from hybrid_precoding.exceptions import HybridPrecodingError
from hybrid_precoding.workflows.experiments import power_table as workflow_power_table
from hybrid_precoding.workflows.experiments import presets as workflow_presets
from hybrid_precoding.workflows.experiments import run as workflow_run
from hybrid_precoding.workflows.experiments import summarize

cli_app = typer.Typer(pretty_exceptions_show_locals=False)

SUMMARY_HEADERS = [
    "point_id",
    "n_runs",
    "min_throughput_bps_hz_mean",
    "min_throughput_bps_hz_std",
    "sum_throughput_bps_hz_mean",
    "sum_throughput_bps_hz_std",
]


def _joined(values: Optional[List[str]]) -> Optional[str]:
    return ",".join(str(value) for value in values) if values else None


# cli commands
@cli_app.command()
def run(  # pylint: disable=too-many-arguments
    config: Optional[Path] = None,
    preset: Optional[str] = None,
    algo: Optional[List[Algorithm]] = None,
    seed: Optional[List[int]] = None,
    out: Optional[Path] = None,
    power_mode: Optional[PowerMode] = None,
    sweep_lc: Optional[List[int]] = None,
    sweep_n_ps: Optional[List[int]] = None,
    delta: Optional[List[str]] = None,
    show_progress: bool = True,
) -> None:
    """Run a sweep and write runs.csv, summary.csv and the iteration traces.

    :param config: Path to a KEY=VALUE config file.
    :param preset: Name of a bundled preset, see `hybrid-precoding presets`.
    :param algo: Algorithms to run. Repeat the flag for several.
    :param seed: Seeds to run. Repeat the flag for several.
    :param out: Output directory.
    :param power_mode: Hold the transmit power or the total power fixed across the sweep.
    :param sweep_lc: Phase shifters per RF chain to sweep.
    :param sweep_n_ps: Total phase-shifter counts to sweep.
    :param delta: Throughput scaling of the soft max-min algorithm, a number in (0, 1] or `auto`.
    :param show_progress: Shows a progress bar.

    Example:
    `hybrid-precoding run --preset equal-transmit --seed 0 --seed 1 --algo maxmin`
    """
    overrides: Dict[str, Optional[str]] = {
        "ALGORITHM": _joined([item.value for item in algo] if algo else None),
        "SEEDS": _joined([str(item) for item in seed] if seed else None),
        "OUT": str(out) if out is not None else None,
        "POWER_MODE": power_mode.value if power_mode is not None else None,
        "SWEEP_LC": _joined([str(item) for item in sweep_lc] if sweep_lc else None),
        "SWEEP_N_PS": _joined([str(item) for item in sweep_n_ps] if sweep_n_ps else None),
        "DELTA": _joined(delta),
    }
    try:
        result = workflow_run(config_path=config, preset=preset, overrides=overrides, show_progress=show_progress)
    except HybridPrecodingError as err:
        typer.echo(f"Error: {err}", err=True)
        raise typer.Exit(code=1) from err
    rows = summarize(result)
    typer.echo(
        tabulate(
            [[row.get(header, "") for header in SUMMARY_HEADERS] for row in rows],
            SUMMARY_HEADERS,
            tablefmt="grid",
            floatfmt=".4f",
        )
    )


@cli_app.command()
def power_table(
    n_rf: int = 8,
    n_ps: Optional[List[int]] = None,
    transmit_power_mw: float = 100.0,
    total_power_mw: float = 3924.0,
) -> None:
    """Print the total power at a fixed transmit power and the transmit power at a fixed total.

    :param n_rf: Number of RF chains.
    :param n_ps: Phase-shifter counts. Repeat the flag for several.
    :param transmit_power_mw: Transmit power for the total-power column.
    :param total_power_mw: Total power for the transmit-power column.

    Example:
    `hybrid-precoding power-table --n-ps 32 --n-ps 144`
    """
    try:
        rows = workflow_power_table(n_rf, n_ps or [32, 48, 64, 80, 144], transmit_power_mw, total_power_mw)
    except HybridPrecodingError as err:
        typer.echo(f"Error: {err}", err=True)
        raise typer.Exit(code=1) from err
    typer.echo(tabulate(rows, headers="keys", tablefmt="grid"))


@cli_app.command()
def presets() -> None:
    """List the bundled experiment presets.

    Example:
    `hybrid-precoding presets`
    """
    for name in workflow_presets():
        typer.echo(name)


def version_callback(value: bool) -> None:
    """Show the package version and exit.

    :param value: Value of the version option.
    """
    if value:
        typer.echo(f"hybrid-precoding version: {__version__}")
        raise typer.Exit()


@cli_app.callback()
def main(
    _: Optional[bool] = typer.Option(
        None, "--version", callback=version_callback, is_eager=True, help="Show the version and exit."
    )
) -> None:  # noqa
    """Simulate hybrid precoders with a reduced number of phase shifters.

    Lists can be passed by using the same flag multiple times, for example
    `--seed 0 --seed 1`.
    """


def run_packaged() -> None:
    """Run the packaged CLI.

    This is the entrypoint for the package to enable running the CLI using typer.
    """
    cli_app()


if __name__ == "__main__":
    cli_app()
