"""
Exact joint CA-WBBA by exhaustive enumeration, for desk-scale instances.

For a fixed association the utility decreases in β, so the smallest feasible
β (unified) or the active-constraint β_j (per-cell) is optimal; enumerating all
(N_S + 1)^N_U associations therefore gives the global optimum.
"""
import logging

import numpy as np

from . import rate_model
from .config import ORACLE_BLOCK_SIZE, BETA_CHECK_MAX_MTS, BETA_CHECK_DELTA, get_error_message
from .models import Association, ChannelRealization, OracleLimits, SolverDiagnostics, SolverResult, WbbaAllocation

logger = logging.getLogger(__name__)


class BruteForceOracle:
    """Enumerates every association in mixed-radix order (MT 0 is the leading digit)."""

    def __init__(self, chan: ChannelRealization, limits: OracleLimits = None, block_size: int = ORACLE_BLOCK_SIZE):
        limits = limits or OracleLimits()
        if not limits.allows(chan.n_cells, chan.n_mts):
            raise ValueError(get_error_message(
                'oracle_too_large', count=chan.n_cells ** chan.n_mts, limit=limits.max_enumeration))
        self.chan = chan
        self.block_size = block_size
        self.n_assignments = chan.n_cells ** chan.n_mts

    def decode(self, indices: np.ndarray) -> np.ndarray:
        """Serving cells of the given enumeration indices, shape (len(indices), N_U)."""
        n_cells, n_mts = self.chan.n_cells, self.chan.n_mts
        place = n_cells ** np.arange(n_mts - 1, -1, -1, dtype=np.int64)
        return (indices[:, None] // place[None, :]) % n_cells

    def block_utilities(self, serving: np.ndarray, kind: str) -> np.ndarray:
        """Closed-form sum log-rate of each association row at its optimal WBBA."""
        chan = self.chan
        picked = chan.rates[serving, np.arange(chan.n_mts)]
        loads = np.empty((serving.shape[0], chan.n_cells))
        sums = np.empty_like(loads)
        for j in range(chan.n_cells):
            mask = serving == j
            loads[:, j] = mask.sum(axis=1)
            sums[:, j] = np.where(mask, picked, 0.0).sum(axis=1)

        small_loads, small_sums = loads[:, 1:], sums[:, 1:]
        beta_j = np.divide(small_sums, small_sums + small_loads * chan.c_backhaul,
                           out=np.zeros_like(small_loads), where=small_loads > 0)

        base = np.log(picked).sum(axis=1) - rate_model.xlogx(loads).sum(axis=1)
        if kind == 'unified':
            beta = beta_j.max(axis=1) if chan.n_small_cells else np.zeros(serving.shape[0])
            return base + chan.n_mts * np.log1p(-beta)
        n_b = beta_j.sum(axis=1)
        return base + loads[:, 0] * np.log1p(-n_b / chan.beam_group) + (small_loads * np.log1p(-beta_j)).sum(axis=1)

    def search(self, kind: str) -> SolverResult:
        best_index, best_utility = 0, -np.inf
        for start in range(0, self.n_assignments, self.block_size):
            indices = np.arange(start, min(start + self.block_size, self.n_assignments), dtype=np.int64)
            utilities = self.block_utilities(self.decode(indices), kind)
            local = int(np.argmax(utilities))
            if utilities[local] > best_utility:
                best_index, best_utility = int(indices[local]), float(utilities[local])

        serving = self.decode(np.array([best_index], dtype=np.int64))[0]
        assoc = Association(serving, self.chan.n_cells)
        wbba = rate_model.allocate(assoc, self.chan, kind)
        utility = rate_model.sum_log_rate(assoc, wbba, self.chan)
        logger.debug("Oracle (%s) searched %d associations, best utility %.6f",
                     kind, self.n_assignments, utility)
        return SolverResult(assoc, wbba, utility,
                            SolverDiagnostics(outer_iterations=1, converged=True, utility_trace=[utility]))


def verify_beta_optimality(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization,
                           delta: float = BETA_CHECK_DELTA) -> bool:
    """True if no feasible ±delta perturbation of a WBBA factor raises the utility."""
    base = rate_model.sum_log_rate(assoc, wbba, chan)
    if wbba.is_unified:
        candidates = [WbbaAllocation.unified(b) for b in (wbba.beta - delta, wbba.beta + delta) if 0.0 <= b < 1.0]
    else:
        candidates = []
        for j in np.flatnonzero(assoc.load[1:] > 0):
            for step in (-delta, delta):
                beta_j = wbba.beta_j.copy()
                beta_j[j] += step
                if 0.0 <= beta_j[j] < 1.0:
                    candidates.append(WbbaAllocation.per_cell(beta_j))
    for candidate in candidates:
        if rate_model.is_backhaul_feasible(assoc, candidate, chan) and \
                rate_model.sum_log_rate(assoc, candidate, chan) > base:
            return False
    return True


def _brute_force(chan: ChannelRealization, limits: OracleLimits, kind: str) -> SolverResult:
    result = BruteForceOracle(chan, limits).search(kind)
    if chan.n_mts <= BETA_CHECK_MAX_MTS and not verify_beta_optimality(result.assoc, result.wbba, chan):
        raise RuntimeError(f"Oracle ({kind}) WBBA is not locally optimal for its association")
    return result


def brute_force_uwbba(chan: ChannelRealization, limits: OracleLimits = None) -> SolverResult:
    return _brute_force(chan, limits, 'unified')


def brute_force_pwbba(chan: ChannelRealization, limits: OracleLimits = None) -> SolverResult:
    return _brute_force(chan, limits, 'per_cell')
