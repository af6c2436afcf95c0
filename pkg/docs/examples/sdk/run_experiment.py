# pylint:skip-file
from pathlib import Path

import numpy as np

from hybrid_precoding._channel.model import generate_channels
from hybrid_precoding._service.alternating import AlgorithmSettings, run_maxmin, run_softmaxmin
from hybrid_precoding.models import MappingKind, Scenario
from hybrid_precoding.workflows.experiments import run, summarize

## Example 1
## Design one hybrid precoder: nAoSA with 80 phase shifters, 8 RF chains, 8 users
scenario = Scenario(n_ps_per_rf=10, mapping=MappingKind.BALANCED, transmit_power_mw=100.0)
channels = generate_channels(scenario, np.random.default_rng(0))

result = run_maxmin(scenario, channels, AlgorithmSettings(max_iterations=200))
print("max-min, min throughput (bps/Hz):", result.report.rates_bits.min())

soft = run_softmaxmin(scenario, channels, AlgorithmSettings(max_iterations=200), delta=0.5)
print("soft max-min, per-user throughput (bps/Hz):", soft.report.rates_bits)

## Example 2
## Run a bundled preset on two seeds and write runs.csv, summary.csv and traces to ./results
experiment = run(preset="equal-transmit", overrides={"SEEDS": "0,1", "OUT": str(Path("results"))})
for row in summarize(experiment):
    print(row["point_id"], row["min_throughput_bps_hz_mean"], row["sum_throughput_bps_hz_mean"])
