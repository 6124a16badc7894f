"""
Shared fixtures: hand-built channels, tiny seeded instances and a mirrored layout.
"""
import numpy as np
import pytest

from core.models import ChannelRealization, NetworkScenario, Topology
from core.network import generate_topology
from core.propagation import baseline_rates, realize_channels

TINY_SEEDS = range(10)


def chan_from_sinr(sinr_macro, sinr_sc, sinr_backhaul, n_antennas=100, beam_group=20) -> ChannelRealization:
    """Realization with the given linear SINRs (unit powers and noise)."""
    sinr_macro = np.asarray(sinr_macro, dtype=float)
    sinr_backhaul = np.asarray(sinr_backhaul, dtype=float)
    sinr_sc = np.asarray(sinr_sc, dtype=float).reshape(sinr_backhaul.shape[0], sinr_macro.shape[0])
    r_macro, c_backhaul, r_sc = baseline_rates(sinr_macro, sinr_backhaul, sinr_sc, n_antennas, beam_group)
    return ChannelRealization(
        gain_macro_mt=sinr_macro, gain_macro_sc=sinr_backhaul, gain_sc_mt=sinr_sc, noise_power=1.0,
        sinr_macro=sinr_macro, sinr_backhaul=sinr_backhaul, sinr_sc=sinr_sc,
        r_macro=r_macro, r_sc=r_sc, c_backhaul=c_backhaul, beam_group=beam_group,
    )


def random_chan(seed: int, n_small_cells: int = 3, n_mts: int = 8) -> ChannelRealization:
    """Baseline rates drawn directly, macro rates at massive-MIMO scale."""
    rng = np.random.default_rng(seed)
    return ChannelRealization.from_rates(
        r_macro=rng.uniform(20.0, 200.0, n_mts),
        r_sc=rng.uniform(0.5, 12.0, (n_small_cells, n_mts)),
        c_backhaul=rng.uniform(2.0, 10.0, n_small_cells),
    )


def seeded_chan(scenario: NetworkScenario, seed: int) -> ChannelRealization:
    topology = generate_topology(scenario, seed)
    return realize_channels(topology, scenario, np.random.default_rng(seed + 1000))


@pytest.fixture
def tiny_scenario():
    return NetworkScenario(n_small_cells=2, n_mts=6, sigma_bs=0.0, sigma_sc=0.0)


@pytest.fixture
def tiny_chans(tiny_scenario):
    return [seeded_chan(tiny_scenario, seed) for seed in TINY_SEEDS]


@pytest.fixture
def random_chans():
    return [random_chan(seed) for seed in range(8)]


@pytest.fixture
def mirrored_chan():
    """Two small cells and their MTs placed mirror-symmetrically about the y axis, no shadowing."""
    scenario = NetworkScenario(n_small_cells=2, n_mts=6, sigma_bs=0.0, sigma_sc=0.0)
    sc = [[100.0, 0.0], [-100.0, 0.0]]
    mt = [[120.0, 10.0], [-120.0, 10.0], [80.0, -25.0], [-80.0, -25.0], [160.0, 40.0], [-160.0, 40.0]]
    topology = Topology.from_positions(sc, mt, scenario.min_link_distance)
    return realize_channels(topology, scenario, np.random.default_rng(0))
