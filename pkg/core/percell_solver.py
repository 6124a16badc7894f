"""
Joint cell association and per-small-cell WBBA.

Two stages alternate: dual-decomposition association with every β_j fixed, then
the closed-form β_j that makes each backhaul constraint active. The unified
solution, re-allocated per cell, is kept as a starting candidate.
"""
import logging
from typing import Optional

import numpy as np

from . import rate_model
from .config import get_error_message
from .heuristics import sinr_start
from .models import ChannelRealization, DualState, SolverConfig, SolverDiagnostics, SolverResult, WbbaAllocation
from .unified_solver import UnifiedWbbaSolver, better, evaluate, revenue, run_dual_decomposition

logger = logging.getLogger(__name__)


def revenue_offsets(beta_vec, chan: ChannelRealization) -> np.ndarray:
    """d_0 = ln(1 - N_b/N_g) for the macro cell and d_j = ln(1 - β_j) for small cells.

    β_j = 1 leaves no access band in cell j, so d_j = -inf and no MT is priced into it.
    """
    beta_vec = np.asarray(beta_vec, dtype=float).reshape(-1)
    if beta_vec.shape[0] != chan.n_small_cells:
        raise ValueError(get_error_message(
            'invalid_beta', detail=f"expected {chan.n_small_cells} factors, got {beta_vec.shape[0]}"))
    if beta_vec.size and (beta_vec.min() < 0.0 or beta_vec.max() > 1.0):
        raise ValueError(get_error_message(
            'invalid_beta', detail=f"per-cell factors must lie in [0, 1], got {beta_vec.tolist()}"))
    n_b = beta_vec.sum()
    if n_b >= chan.beam_group:
        raise ValueError(get_error_message(
            'invalid_beta', detail=f"N_b = {n_b:g} leaves no macro beams out of {chan.beam_group}"))
    with np.errstate(divide='ignore'):
        cells = np.log1p(-beta_vec)
    return np.concatenate([[np.log(1.0 - n_b / chan.beam_group)], cells])


def revenue_p(k: int, j: int, duals: DualState, beta_vec, chan: ChannelRealization) -> float:
    """d_j + ln r_{j,k} - μ_j - ν_j (1 - β_j) r_{j,k}; MT k must fit in cell j, so β_j < 1."""
    beta_vec = np.asarray(beta_vec, dtype=float).reshape(-1)
    offsets = revenue_offsets(beta_vec, chan)
    if j > 0 and beta_vec[j - 1] >= 1.0:
        raise ValueError(get_error_message(
            'invalid_beta', detail=f"β_{j} = 1 leaves no access band for MT {k}"))
    return float(offsets[j] + revenue(k, j, duals, beta_vec, chan))


class PerCellWbbaSolver:
    """Start from SINR association, then alternate association and β_j updates."""

    kind = 'per_cell'

    def __init__(self, cfg: SolverConfig = None, warm_start: bool = True):
        self.cfg = cfg or SolverConfig()
        self.warm_start = warm_start

    def unified_candidate(self, chan: ChannelRealization) -> SolverResult:
        """The unified solution re-allocated with its minimum feasible β_j per cell."""
        assoc = UnifiedWbbaSolver(self.cfg).solve(chan).assoc
        return evaluate(assoc, WbbaAllocation.per_cell(rate_model.beta_per_cell_all(assoc, chan)), chan)

    def solve(self, chan: ChannelRealization) -> SolverResult:
        cfg = self.cfg
        diag = SolverDiagnostics()
        assoc, beta_vec = sinr_start(chan)
        best: Optional[SolverResult] = evaluate(assoc, WbbaAllocation.per_cell(beta_vec), chan)
        previous = best.utility
        if self.warm_start:
            best = better(best, self.unified_candidate(chan))

        for s in range(1, cfg.outer_max_iter + 1):
            inner = run_dual_decomposition(chan, cfg, beta_vec, self.kind, revenue_offsets(beta_vec, chan))
            diag.outer_iterations = s
            diag.inner_iterations.append(inner.iterations)
            diag.inner_converged.append(inner.converged)
            diag.backhaul_violation = not inner.feasible
            diag.record_duals(inner.duals)

            beta_vec = rate_model.beta_per_cell_all(inner.assoc, chan)
            candidate = evaluate(inner.assoc, WbbaAllocation.per_cell(beta_vec), chan)
            best = better(better(best, candidate), inner.best)
            diag.utility_trace.append(candidate.utility)
            diag.beta_trace.append(beta_vec.tolist())
            logger.debug("Outer %d: N_b %.4f, utility %.6f", s, beta_vec.sum(), candidate.utility)

            if abs(candidate.utility - previous) < cfg.percell_outer_tol:
                diag.converged = True
                break
            previous = candidate.utility

        if not diag.converged:
            logger.warning("Per-cell solver stopped after %d outer iterations without converging",
                           diag.outer_iterations)
        best.diagnostics = diag
        return best


def solve(chan: ChannelRealization, cfg: SolverConfig = None, warm_start: bool = True) -> SolverResult:
    return PerCellWbbaSolver(cfg, warm_start).solve(chan)
