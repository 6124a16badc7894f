"""
Baseline association policies and the greedy macro-offloading heuristics.
"""
import logging

import numpy as np

from . import rate_model
from .models import Association, ChannelRealization, WbbaAllocation

logger = logging.getLogger(__name__)

# Smallest utility gain (nats) a greedy move must bring
_MIN_GAIN = 1e-12


def sinr_association(chan: ChannelRealization) -> Association:
    """Every MT joins the cell with the strongest SINR; ties go to the lowest index."""
    return cre_association(chan, 0.0)


def cre_association(chan: ChannelRealization, bias_db: float) -> Association:
    """Strongest-SINR association with `bias_db` added to every small cell (range expansion)."""
    sinr_db = 10.0 * np.log10(chan.sinr_cells)
    sinr_db[1:] += bias_db
    return Association(np.argmax(sinr_db, axis=0), chan.n_cells)


class PerCellUtilityState:
    """Running per-cell sums that price a single-MT move in O(N_S) under p-WBBA."""

    def __init__(self, assoc: Association, chan: ChannelRealization):
        self.chan = chan
        self.serving = assoc.serving.copy()
        mts = np.arange(assoc.n_mts)
        rates = chan.rates[self.serving, mts]
        self.loads = assoc.load.astype(float)
        self.sums = np.bincount(self.serving, weights=rates, minlength=chan.n_cells)
        self.log_sums = np.bincount(self.serving, weights=np.log(rates), minlength=chan.n_cells)
        self.utility = self._utility(self.loads, self.sums, self.log_sums)

    def _utility(self, loads, sums, log_sums) -> float:
        busy = loads[1:] > 0
        beta = np.zeros(self.chan.n_small_cells)
        beta[busy] = sums[1:][busy] / (sums[1:][busy] + loads[1:][busy] * self.chan.c_backhaul[busy])
        offsets = np.concatenate([[np.log(1.0 - beta.sum() / self.chan.beam_group)], np.log1p(-beta)])
        return float(loads @ offsets + log_sums.sum() - rate_model.xlogx(loads).sum())

    def try_move(self, k: int, j: int) -> bool:
        """Move MT k from its current cell to cell j if that strictly raises the utility."""
        i = self.serving[k]
        if i == j:
            return False
        r_from, r_to = self.chan.rates[i, k], self.chan.rates[j, k]
        loads, sums, log_sums = self.loads.copy(), self.sums.copy(), self.log_sums.copy()
        loads[i] -= 1
        loads[j] += 1
        sums[i] -= r_from
        sums[j] += r_to
        log_sums[i] -= np.log(r_from)
        log_sums[j] += np.log(r_to)
        if loads[i] == 0:
            sums[i] = 0.0
            log_sums[i] = 0.0
        utility = self._utility(loads, sums, log_sums)
        if utility <= self.utility + _MIN_GAIN:
            return False
        self.serving[k] = j
        self.loads, self.sums, self.log_sums = loads, sums, log_sums
        self.utility = utility
        return True

    def association(self) -> Association:
        return Association(self.serving, self.chan.n_cells)


def _result(state: PerCellUtilityState, chan: ChannelRealization):
    assoc = state.association()
    return assoc, rate_model.beta_per_cell_all(assoc, chan)


def offload_macro(assoc: Association, beta_vec, chan: ChannelRealization):
    """One greedy pass moving macro MTs to small cells while the p-WBBA utility improves.

    MTs are scanned in index order and each is tried against every small cell in
    index order; an MT already moved in this pass is re-tested from its new cell.
    """
    rate_model.validate_allocation(assoc, WbbaAllocation.per_cell(beta_vec), chan)
    macro_mts = assoc.members(0)
    if macro_mts.size == 0 or chan.n_small_cells == 0:
        return assoc, beta_vec

    state = PerCellUtilityState(assoc, chan)
    moves = 0
    for k in macro_mts:
        for j in range(1, chan.n_cells):
            moves += state.try_move(k, j)
    logger.debug("Macro offloading moved %d of %d MTs, utility %.6f", moves, macro_mts.size, state.utility)
    return _result(state, chan)


def balance_small_cells(assoc: Association, beta_vec, chan: ChannelRealization):
    """The offloading pass applied to the MTs of each non-empty small cell, towards other small cells."""
    rate_model.validate_allocation(assoc, WbbaAllocation.per_cell(beta_vec), chan)
    if not (assoc.load[1:] > 0).any():
        return assoc, beta_vec

    state = PerCellUtilityState(assoc, chan)
    moves = 0
    for i in range(1, chan.n_cells):
        members = np.flatnonzero(state.serving == i)
        for k in members:
            for j in range(1, chan.n_cells):
                if j != i:
                    moves += state.try_move(k, j)
    logger.debug("Small-cell balancing moved %d MTs, utility %.6f", moves, state.utility)
    return _result(state, chan)


def offload_balanced(assoc: Association, beta_vec, chan: ChannelRealization):
    assoc, beta_vec = offload_macro(assoc, beta_vec, chan)
    return balance_small_cells(assoc, beta_vec, chan)


def sinr_start(chan: ChannelRealization):
    """SINR association with its per-cell backhaul factors, the start of the greedy heuristics."""
    assoc = sinr_association(chan)
    return assoc, rate_model.beta_per_cell_all(assoc, chan)
