"""
Load-dependent rates, backhaul capacities and the sum log-rate utility.

Every solver, heuristic, the oracle and the experiment harness evaluate
assignments through this module.
"""
import logging

import numpy as np

from .config import FEASIBILITY_SLACK, get_error_message
from .models import Association, ChannelRealization, WbbaAllocation

logger = logging.getLogger(__name__)


def xlogx(values) -> np.ndarray:
    """Elementwise K·ln K with 0·ln 0 = 0."""
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    positive = values > 0
    out[positive] = values[positive] * np.log(values[positive])
    return out


def _check_small_cell(j: int, n_cells: int):
    if not 1 <= j < n_cells:
        raise ValueError(f"Small cell index must be in [1, {n_cells - 1}], got {j}")


def assigned_rate_sums(assoc: Association, chan: ChannelRealization) -> np.ndarray:
    """Σ_k x_{j,k} r_{j,k} for every cell, macro first."""
    mts = np.arange(assoc.n_mts)
    return np.bincount(assoc.serving, weights=chan.rates[assoc.serving, mts], minlength=assoc.n_cells)


def small_cell_throughput(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization, j: int) -> float:
    """R_j: (1 - β_j) times the mean baseline rate of the MTs in small cell j."""
    _check_small_cell(j, assoc.n_cells)
    load = assoc.load[j]
    if load == 0:
        return 0.0
    members = assoc.members(j)
    fraction = wbba.backhaul_fractions(assoc.n_small_cells)[j - 1]
    return float((1.0 - fraction) / load * chan.rates[j, members].sum())


def macro_user_rate(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization, k: int) -> float:
    """R_{0,k}: equal share of the macro resources for an MT served by the macro BS."""
    if assoc.serving[k] != 0:
        raise ValueError(get_error_message('invalid_association', detail=f"MT {k} is not served by the macro BS"))
    return float(wbba.macro_factor(chan.beam_group) * chan.r_macro[k] / assoc.load[0])


def backhaul_capacity(wbba: WbbaAllocation, chan: ChannelRealization, j: int) -> float:
    """C_j = β c_j (unified) or β_j c_j (per-cell)."""
    _check_small_cell(j, chan.n_cells)
    return float(wbba.backhaul_fractions(chan.n_small_cells)[j - 1] * chan.c_backhaul[j - 1])


def per_mt_rates(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization) -> np.ndarray:
    """Long-term rate of every MT under its serving cell."""
    factors = wbba.cell_factors(assoc.n_small_cells, chan.beam_group)
    cells = assoc.serving
    mts = np.arange(assoc.n_mts)
    return factors[cells] * chan.rates[cells, mts] / assoc.load[cells]


def sum_log_rate(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization) -> float:
    """Proportional-fair utility Σ_k ln(rate_k) in nats; -inf if an MT gets no rate."""
    rates = per_mt_rates(assoc, wbba, chan)
    if rates.size == 0:
        return 0.0
    if (rates <= 0).any():
        logger.warning("Zero rate for %d MT(s); utility is -inf", int((rates <= 0).sum()))
        return float('-inf')
    return float(np.log(rates).sum())


def beta_per_cell_all(assoc: Association, chan: ChannelRealization) -> np.ndarray:
    """Smallest feasible β_j of every small cell; 0 for empty cells."""
    sums = assigned_rate_sums(assoc, chan)[1:]
    loads = assoc.load[1:]
    denominator = sums + loads * chan.c_backhaul
    beta = np.zeros(assoc.n_small_cells)
    busy = loads > 0
    beta[busy] = sums[busy] / denominator[busy]
    return beta


def beta_per_cell(assoc: Association, chan: ChannelRealization, j: int) -> float:
    """β_j making the backhaul constraint of small cell j active."""
    _check_small_cell(j, assoc.n_cells)
    return float(beta_per_cell_all(assoc, chan)[j - 1])


def min_feasible_beta_unified(assoc: Association, chan: ChannelRealization) -> float:
    """Smallest unified β meeting every small-cell backhaul constraint."""
    beta = beta_per_cell_all(assoc, chan)
    return float(beta.max()) if beta.size else 0.0


def throughputs(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization) -> np.ndarray:
    """R_j of every small cell."""
    sums = assigned_rate_sums(assoc, chan)[1:]
    loads = assoc.load[1:]
    out = np.zeros(assoc.n_small_cells)
    busy = loads > 0
    fractions = wbba.backhaul_fractions(assoc.n_small_cells)
    out[busy] = (1.0 - fractions[busy]) * sums[busy] / loads[busy]
    return out


def capacities(wbba: WbbaAllocation, chan: ChannelRealization) -> np.ndarray:
    """C_j of every small cell."""
    return wbba.backhaul_fractions(chan.n_small_cells) * chan.c_backhaul


def backhaul_slack(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization) -> np.ndarray:
    """C_j - R_j per small cell; negative entries violate the backhaul constraint."""
    return capacities(wbba, chan) - throughputs(assoc, wbba, chan)


def is_backhaul_feasible(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization,
                         slack: float = FEASIBILITY_SLACK) -> bool:
    return bool((backhaul_slack(assoc, wbba, chan) >= -slack).all())


def validate_allocation(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization):
    """Raise ValueError if the allocation breaks a structural constraint of its scenario."""
    if wbba.is_unified:
        return
    if wbba.beta_j.shape[0] != assoc.n_small_cells:
        raise ValueError(get_error_message(
            'invalid_beta', detail=f"expected {assoc.n_small_cells} factors, got {wbba.beta_j.shape[0]}"))
    empty = assoc.load[1:] == 0
    if (wbba.beta_j[empty] != 0).any():
        raise ValueError(get_error_message('invalid_beta', detail="beta_j must be 0 for empty small cells"))
    if wbba.n_b >= chan.beam_group:
        raise ValueError(get_error_message(
            'invalid_beta', detail=f"N_b={wbba.n_b} must stay below N_g={chan.beam_group}"))


def unified_allocation(assoc: Association, chan: ChannelRealization) -> WbbaAllocation:
    return WbbaAllocation.unified(min_feasible_beta_unified(assoc, chan))


def per_cell_allocation(assoc: Association, chan: ChannelRealization) -> WbbaAllocation:
    return WbbaAllocation.per_cell(beta_per_cell_all(assoc, chan))


def allocate(assoc: Association, chan: ChannelRealization, kind: str) -> WbbaAllocation:
    """Utility-optimal WBBA for a fixed association in the given scenario."""
    if kind == 'unified':
        return unified_allocation(assoc, chan)
    return per_cell_allocation(assoc, chan)
