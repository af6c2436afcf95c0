"""Seeded sweeps over scenarios and algorithms, aggregation and CSV export."""

from __future__ import annotations

import time
from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog
from tqdm import tqdm

from hybrid_precoding._channel.model import generate_channels
from hybrid_precoding._experiment.config import (
    ExperimentConfig,
    SweepPoint,
    worker_count,
)
from hybrid_precoding._service.alternating import (
    AlgorithmSettings,
    AlternatingOptimizer,
    RunTrace,
)
from hybrid_precoding.models import ChannelSet, MetricsRecord

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = "%.6g"
RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.csv"
GROUP_COLUMNS = [
    "point_id",
    "algorithm",
    "mapping",
    "n_rf",
    "n_ps",
    "transmit_power_mw",
    "total_power_mw",
    "delta",
]


@dataclass
class ExperimentResult:
    """Records of all runs in sweep order, with the iteration trace of each successful run."""

    records: List[MetricsRecord] = field(default_factory=list)
    traces: Dict[str, RunTrace] = field(default_factory=dict)

    def runs_frame(self, record_timing: bool = False) -> pd.DataFrame:
        """One row per (sweep point, seed)."""
        return pd.DataFrame([record.as_row(record_timing) for record in self.records])


def trace_id(point_id: str, seed: int) -> str:
    """Key of a run's trace and the stem of its trace file."""
    return f"{point_id}_seed{seed}"


def _seed_streams(seed: int) -> Tuple[np.random.SeedSequence, np.random.SeedSequence]:
    channel_stream, init_stream = np.random.SeedSequence(seed).spawn(2)
    return channel_stream, init_stream


def _empty_record(point: SweepPoint, seed: int) -> MetricsRecord:
    scenario = point.scenario
    return MetricsRecord(
        point_id=point.point_id,
        algorithm=point.algorithm.value,
        mapping=scenario.mapping.value,
        n_rf=scenario.n_rf,
        n_ps=scenario.n_phase_shifters,
        transmit_power_mw=scenario.transmit_power_mw,
        total_power_mw=point.total_power_mw,
        delta=point.delta,
        seed=seed,
    )


def run_point(
    point: SweepPoint,
    seed: int,
    channels: ChannelSet,
    settings: AlgorithmSettings,
    init_stream: np.random.SeedSequence,
) -> Tuple[MetricsRecord, Optional[RunTrace]]:
    """Run one sweep point on one seed; failures end up in the record's `error` field.

    :param point: The sweep point.
    :param seed: The seed, echoed into the record.
    :param channels: Channels of the seed, laid out for the point's RF chains.
    :param settings: Algorithm settings.
    :param init_stream: Seed sequence of the random starting point.
    :return: The record and, if the run succeeded, its trace.
    """
    record = _empty_record(point, seed)
    start = time.perf_counter()
    try:
        optimizer = AlternatingOptimizer.factory(point.algorithm, point.scenario, channels, settings, point.delta)
        result = optimizer.run(np.random.default_rng(init_stream))
    except Exception as err:  # pylint: disable=broad-except
        logger.error("Run failed.", point_id=point.point_id, seed=seed, error=err)
        record.error = f"{type(err).__name__}: {err}"
        record.wall_time_s = time.perf_counter() - start
        return record, None
    record.min_throughput = result.report.min
    record.sum_throughput = result.report.sum
    record.user_throughputs = [float(rate) for rate in result.report.rates]
    record.iterations = result.iterations
    record.penalty = result.penalty
    record.converged = result.converged
    record.wall_time_s = time.perf_counter() - start
    return record, result.trace


def run_experiment(config: ExperimentConfig, show_progress: bool = True) -> ExperimentResult:
    """Run every sweep point on every seed.

    Channels depend on the seed only, so all points of a seed see the same users. Runs
    execute in a thread pool and are collected in sweep order.

    :param config: The experiment config.
    :param show_progress: Show a progress bar.
    :return: Records in (sweep point, seed) order plus traces.
    """
    points = config.sweep_points()
    settings = config.algorithm_settings
    draws = {}
    for seed in config.seeds:
        channel_stream, init_stream = _seed_streams(seed)
        draws[seed] = (generate_channels(points[0].scenario, np.random.default_rng(channel_stream)), init_stream)
    jobs = []
    for point in points:
        for seed in config.seeds:
            draw, init_stream = draws[seed]
            channels = ChannelSet(draw.matrices, point.scenario.n_rf, draw.distances_m, draw.path_loss_db)
            jobs.append((point, seed, channels, init_stream))
    workers = worker_count()
    logger.info("Starting experiment.", points=len(points), seeds=len(config.seeds), workers=workers)

    result = ExperimentResult()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures: List[Future] = [
            pool.submit(run_point, point, seed, channels, settings, stream) for point, seed, channels, stream in jobs
        ]
        for _ in tqdm(as_completed(futures), total=len(futures), desc="Runs", disable=not show_progress):
            pass
        for (point, seed, _, _), future in zip(jobs, futures):
            record, trace = future.result()
            result.records.append(record)
            if trace is not None:
                result.traces[trace_id(point.point_id, seed)] = trace
    failed = sum(1 for record in result.records if record.error)
    logger.info("Finished experiment.", runs=len(result.records), failed=failed)
    return result


def aggregate(records: Sequence[MetricsRecord]) -> pd.DataFrame:
    """Mean and sample standard deviation of min- and sum-throughput (bps/Hz) per sweep point.

    Groups without a successful run get a row with a warning instead of statistics.
    """
    frame = pd.DataFrame([record.as_row() for record in records])
    if frame.empty:
        return pd.DataFrame(columns=GROUP_COLUMNS)
    rows = []
    for key, group in frame.groupby(GROUP_COLUMNS, sort=False, dropna=False):
        row = dict(zip(GROUP_COLUMNS, key))
        ok = group[group["error"] == ""]
        row["n_runs"] = len(ok)
        row["converged_runs"] = int(ok["converged"].sum())
        if ok.empty:
            logger.warning("No successful runs for sweep point.", point_id=row["point_id"])
            row["warning"] = "no successful runs"
            rows.append(row)
            continue
        for metric in ("min_throughput_bps_hz", "sum_throughput_bps_hz"):
            row[f"{metric}_mean"] = float(ok[metric].mean())
            std = ok[metric].std(ddof=1)
            row[f"{metric}_std"] = 0.0 if pd.isna(std) else float(std)
        row["warning"] = ""
        rows.append(row)
    return pd.DataFrame(rows)


def export(result: ExperimentResult, out: Path, write_traces: bool = True, record_timing: bool = False) -> List[Path]:
    """Write runs.csv, summary.csv and one trace file per successful run.

    :param result: The experiment result.
    :param out: Output directory, created if needed.
    :param write_traces: Also write the iteration traces.
    :param record_timing: Include wall-clock columns, which makes the files non-reproducible.
    :return: Paths of the written files.
    """
    out.mkdir(parents=True, exist_ok=True)
    written = []
    runs_path = out / RUNS_FILE
    result.runs_frame(record_timing).to_csv(runs_path, index=False, float_format=FLOAT_FORMAT)
    written.append(runs_path)
    summary_path = out / SUMMARY_FILE
    aggregate(result.records).to_csv(summary_path, index=False, float_format=FLOAT_FORMAT)
    written.append(summary_path)
    if write_traces:
        for key, trace in result.traces.items():
            trace_path = out / f"trace_{key}.csv"
            trace.to_frame(record_timing).to_csv(trace_path, index=False, float_format=FLOAT_FORMAT)
            written.append(trace_path)
    logger.info("Exported results.", out=str(out), files=len(written))
    return written
