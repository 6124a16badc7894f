"""
Large-scale propagation: path loss, log-normal shadowing, SINR and baseline rates.
"""
import logging
from typing import Tuple

import numpy as np

from .config import PL_MACRO_MT, PL_BACKHAUL, PL_SC_MT
from .models import ChannelRealization, NetworkScenario, Topology

logger = logging.getLogger(__name__)


def _log_distance_db(d, intercept: float, slope: float):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError(f"Link distance must be positive, got {d[d <= 0].tolist() if d.ndim else float(d)}")
    pl = intercept + slope * np.log10(d)
    return float(pl) if pl.ndim == 0 else pl


def path_loss_macro_mt_db(d):
    """Macro BS to MT path loss in dB (urban macro NLOS), shadowing excluded."""
    return _log_distance_db(d, *PL_MACRO_MT)


def path_loss_backhaul_db(d):
    """Macro BS to small cell path loss in dB, shadowing excluded."""
    return _log_distance_db(d, *PL_BACKHAUL)


def path_loss_sc_mt_db(d):
    """Small cell to MT path loss in dB (urban micro NLOS), shadowing excluded."""
    return _log_distance_db(d, *PL_SC_MT)


def draw_shadowing(sigma: float, rng: np.random.Generator, size=None):
    """Zero-mean Gaussian shadowing in dB, independent per link."""
    if sigma < 0:
        raise ValueError(f"Shadowing spread must be non-negative, got {sigma}")
    if sigma == 0:
        return 0.0 if size is None else np.zeros(size)
    return rng.normal(0.0, sigma, size)


def db_to_gain(loss_db):
    return 10.0 ** (-np.asarray(loss_db, dtype=float) / 10.0)


def sinr_from_gains(gain_macro_mt: np.ndarray, gain_macro_sc: np.ndarray, gain_sc_mt: np.ndarray,
                    p_macro: float, p_small: float,
                    noise_power: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SINRs of the macro downlink, the backhaul downlink and the small-cell downlink.

    Macro and backhaul links are interference-free; a small-cell MT sees every
    other small cell as an interferer.
    """
    sinr_macro = p_macro * gain_macro_mt / noise_power
    sinr_backhaul = p_macro * gain_macro_sc / noise_power
    received = p_small * np.asarray(gain_sc_mt, dtype=float)
    n_small = received.shape[0]
    others = 1.0 - np.eye(n_small)
    interference = others @ received
    sinr_sc = received / (noise_power + interference)
    return sinr_macro, sinr_backhaul, sinr_sc


def baseline_rates(sinr_macro, sinr_backhaul, sinr_sc, n_antennas: int, beam_group: int):
    """r_{0,k}, c_j and r_{j,k} in bit/s/Hz."""
    factor = (n_antennas - beam_group + 1) / beam_group
    r_macro = beam_group * np.log2(1.0 + factor * sinr_macro)
    c_backhaul = np.log2(1.0 + factor * sinr_backhaul)
    r_sc = np.log2(1.0 + sinr_sc)
    return r_macro, c_backhaul, r_sc


def realize_channels(topology: Topology, scenario: NetworkScenario,
                     rng: np.random.Generator) -> ChannelRealization:
    """Draw shadowing for every link and derive gains, SINRs and baseline rates."""
    if topology.n_small_cells != scenario.n_small_cells or topology.n_mts != scenario.n_mts:
        raise ValueError(
            f"Topology ({topology.n_small_cells} SCs, {topology.n_mts} MTs) does not match "
            f"scenario ({scenario.n_small_cells} SCs, {scenario.n_mts} MTs)")

    shadow_macro_mt = draw_shadowing(scenario.sigma_bs, rng, topology.d_macro_mt.shape)
    shadow_macro_sc = draw_shadowing(scenario.sigma_bs, rng, topology.d_macro_sc.shape)
    shadow_sc_mt = draw_shadowing(scenario.sigma_sc, rng, topology.d_sc_mt.shape)

    g_ant = scenario.sc_antenna_gain
    gain_macro_mt = db_to_gain(path_loss_macro_mt_db(topology.d_macro_mt) + shadow_macro_mt)
    gain_macro_sc = db_to_gain(path_loss_backhaul_db(topology.d_macro_sc) + shadow_macro_sc - g_ant)
    gain_sc_mt = db_to_gain(path_loss_sc_mt_db(topology.d_sc_mt) + shadow_sc_mt - g_ant)
    gain_sc_mt = gain_sc_mt.reshape(topology.d_sc_mt.shape)

    noise_power = scenario.noise_power
    sinr_macro, sinr_backhaul, sinr_sc = sinr_from_gains(
        gain_macro_mt, gain_macro_sc, gain_sc_mt, scenario.p_macro, scenario.p_small, noise_power)
    r_macro, c_backhaul, r_sc = baseline_rates(
        sinr_macro, sinr_backhaul, sinr_sc, scenario.n_antennas, scenario.beam_group)

    logger.debug("Realized channels: %d SCs, %d MTs, median macro SINR %.1f dB",
                 scenario.n_small_cells, scenario.n_mts,
                 10 * np.log10(np.median(sinr_macro)) if sinr_macro.size else float('nan'))

    return ChannelRealization(
        gain_macro_mt=gain_macro_mt,
        gain_macro_sc=gain_macro_sc,
        gain_sc_mt=gain_sc_mt,
        noise_power=noise_power,
        sinr_macro=sinr_macro,
        sinr_backhaul=sinr_backhaul,
        sinr_sc=sinr_sc,
        r_macro=r_macro,
        r_sc=r_sc,
        c_backhaul=c_backhaul,
        beam_group=scenario.beam_group,
        shadow_macro_mt=np.broadcast_to(shadow_macro_mt, topology.d_macro_mt.shape).copy(),
        shadow_macro_sc=np.broadcast_to(shadow_macro_sc, topology.d_macro_sc.shape).copy(),
        shadow_sc_mt=np.broadcast_to(shadow_sc_mt, topology.d_sc_mt.shape).copy(),
    )
