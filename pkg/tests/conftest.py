import dataclasses

import numpy as np
import pytest
from dotenv import load_dotenv

from hybrid_precoding._channel.model import generate_channels
from hybrid_precoding._core.mapping import MappingMatrix, make_mapping
from hybrid_precoding._service.alternating import init_state
from hybrid_precoding.models import (
    ArrayGeometry,
    ChannelSet,
    ClusterConfig,
    MappingKind,
    PrecoderState,
    Scenario,
)

load_dotenv()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_scenario() -> Scenario:
    # N = 8 antennas, 2 RF chains with L = 4 antennas and L_c = 2 phase shifters each
    return Scenario(
        geometry=ArrayGeometry(n_e=2, n_a=4, n_t=2),
        clusters=ClusterConfig(n_clusters=2, n_subpaths=3, angle_spread_deg=10.0),
        n_users=3,
        n_rf=2,
        n_ps_per_rf=2,
        mapping=MappingKind.BALANCED,
        resolution_bits=3,
        transmit_power_mw=100.0,
        cell_radius_m=60.0,
        min_distance_m=10.0,
    )


@pytest.fixture
def tiny_channels(tiny_scenario: Scenario) -> ChannelSet:
    return generate_channels(tiny_scenario, np.random.default_rng(7))


@pytest.fixture
def tiny_mapping(tiny_scenario: Scenario) -> MappingMatrix:
    return make_mapping(tiny_scenario.mapping, tiny_scenario.subarray_size, tiny_scenario.n_ps_per_rf)


@pytest.fixture
def tiny_state(tiny_scenario: Scenario) -> PrecoderState:
    return init_state(tiny_scenario, np.random.default_rng(11))


@pytest.fixture
def single_user_scenario() -> Scenario:
    # K = 1, N_t = 1, N_c = 2, L = L_c = 2 and 2-bit phase shifters: 256 grid points in total
    return Scenario(
        geometry=ArrayGeometry(n_e=2, n_a=2, n_t=1),
        clusters=ClusterConfig(n_clusters=2, n_subpaths=2, angle_spread_deg=10.0),
        n_users=1,
        n_rf=2,
        n_ps_per_rf=2,
        mapping=MappingKind.IDENTITY,
        resolution_bits=2,
        transmit_power_mw=100.0,
        cell_radius_m=60.0,
        min_distance_m=10.0,
    )


@pytest.fixture
def high_snr_single_user(single_user_scenario: Scenario) -> tuple:
    channels = generate_channels(single_user_scenario, np.random.default_rng(3))
    signal = single_user_scenario.power_budget * float(np.sum(np.abs(channels.matrices) ** 2))
    scenario = dataclasses.replace(single_user_scenario, noise_power_mw=signal / 1e8)
    return scenario, channels
