"""
Joint cell association and unified WBBA by two-level dual decomposition.

The outer loop fixes β and repairs it to the smallest feasible value after each
association; the inner loop prices cells with Lagrange multipliers and lets every
MT pick the cell with the highest revenue. The inner loop is shared with the
per-cell solver, which passes one β per small cell and a revenue offset per cell.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rate_model
from .models import (
    Association, ChannelRealization, DualState, SolverConfig, SolverDiagnostics,
    SolverResult, WbbaAllocation
)

logger = logging.getLogger(__name__)


def beta_cells(beta, n_small_cells: int) -> np.ndarray:
    """β (scalar or one per small cell) spread over all cells; the macro entry is 0."""
    out = np.zeros(n_small_cells + 1)
    out[1:] = beta
    return out


def revenue(k: int, j: int, duals: DualState, beta, chan: ChannelRealization) -> float:
    """Q_{j,k} = ln r_{j,k} - μ_j - ν_j (1 - β) r_{j,k}."""
    b = beta_cells(beta, chan.n_small_cells)[j]
    r = chan.rates[j, k]
    return float(np.log(r) - duals.mu[j] - duals.nu[j] * (1.0 - b) * r)


def revenue_matrix(duals: DualState, beta, chan: ChannelRealization,
                   offsets: Optional[np.ndarray] = None) -> np.ndarray:
    """Revenues of every (cell, MT) pair, shape (N_S + 1, N_U)."""
    b = beta_cells(beta, chan.n_small_cells)
    q = chan.log_rates - duals.mu[:, None] - (duals.nu * (1.0 - b))[:, None] * chan.rates
    if offsets is not None:
        q = q + np.asarray(offsets, dtype=float)[:, None]
    return q


def assign_step(duals: DualState, beta, chan: ChannelRealization,
                offsets: Optional[np.ndarray] = None) -> Association:
    """Every MT joins its highest-revenue cell; ties go to the lowest cell index."""
    q = revenue_matrix(duals, beta, chan, offsets)
    return Association(np.argmax(q, axis=0), chan.n_cells)


def update_k_aux(duals: DualState, beta, chan: ChannelRealization) -> np.ndarray:
    """First-order optimal auxiliary loads min{exp(μ_j + ν_j β c_j - 1), N_U}."""
    b = beta_cells(beta, chan.n_small_cells)
    return np.minimum(np.exp(duals.mu + duals.nu * b * chan.c_cells - 1.0), chan.n_mts)


def update_multipliers(duals: DualState, assoc: Association, k_aux: np.ndarray, beta,
                       chan: ChannelRealization, t: int, cfg: SolverConfig) -> DualState:
    """Projected subgradient step on μ and ν with step sizes δ(t) = δ_0 / t^decay."""
    b = beta_cells(beta, chan.n_small_cells)
    sums = rate_model.assigned_rate_sums(assoc, chan)
    mu = np.maximum(duals.mu - cfg.step_mu(t) * (k_aux - assoc.load), 0.0)
    nu = np.maximum(duals.nu - cfg.step_nu(t) * (b * chan.c_cells * k_aux - (1.0 - b) * sums), 0.0)
    nu[0] = 0.0
    return DualState(mu=mu, nu=nu, k_aux=np.asarray(k_aux, dtype=float),
                     inner_iter=t, outer_iter=duals.outer_iter)


@dataclass
class InnerResult:
    """Outcome of one inner dual-decomposition run at fixed WBBA."""
    assoc: Association
    feasible: bool
    converged: bool
    iterations: int
    duals: DualState
    best: Optional[SolverResult] = None     # best iterate at its own repaired WBBA


def evaluate(assoc: Association, wbba: WbbaAllocation, chan: ChannelRealization) -> SolverResult:
    return SolverResult(assoc=assoc, wbba=wbba, utility=rate_model.sum_log_rate(assoc, wbba, chan))


def better(current: Optional[SolverResult], candidate: Optional[SolverResult]) -> Optional[SolverResult]:
    """Keep the higher-utility result; the earlier one wins ties."""
    if candidate is None:
        return current
    if current is None or candidate.utility > current.utility:
        return candidate
    return current


def _at_fixed_beta(assoc: Association, beta, kind: str) -> WbbaAllocation:
    if kind == 'unified':
        return WbbaAllocation.unified(beta)
    return WbbaAllocation.per_cell(np.where(assoc.load[1:] > 0, beta, 0.0))


def run_dual_decomposition(chan: ChannelRealization, cfg: SolverConfig, beta, kind: str = 'unified',
                           offsets: Optional[np.ndarray] = None) -> InnerResult:
    """Inner iterations at fixed β (scalar) or β_j (vector, with revenue offsets).

    Stops when the assignment has not changed for `stability_window` iterations,
    when no multiplier moved by `inner_tol` or more, or at `inner_max_iter`.
    Returns the best assignment that is backhaul-feasible under the fixed WBBA,
    falling back to the last one (flagged infeasible).
    """
    duals = DualState.initial(chan.n_cells, chan.n_mts)

    if chan.n_small_cells == 0 or chan.n_mts == 0:
        assoc = Association.all_macro(chan.n_cells, chan.n_mts)
        best = evaluate(assoc, rate_model.allocate(assoc, chan, kind), chan)
        return InnerResult(assoc, True, True, 1, duals, best)

    best_fixed: Optional[SolverResult] = None
    best_repaired: Optional[SolverResult] = None
    previous: Optional[Association] = None
    stable = 0
    converged = False
    t = 0

    for t in range(1, cfg.inner_max_iter + 1):
        assoc = assign_step(duals, beta, chan, offsets)
        if previous is not None and assoc.same_as(previous):
            stable += 1
        else:
            stable = 0
            fixed = _at_fixed_beta(assoc, beta, kind)
            if rate_model.is_backhaul_feasible(assoc, fixed, chan):
                best_fixed = better(best_fixed, evaluate(assoc, fixed, chan))
            best_repaired = better(best_repaired, evaluate(assoc, rate_model.allocate(assoc, chan, kind), chan))

        k_aux = update_k_aux(duals, beta, chan)
        updated = update_multipliers(duals, assoc, k_aux, beta, chan, t, cfg)
        change = max(np.abs(updated.mu - duals.mu).max(), np.abs(updated.nu - duals.nu).max())
        duals = updated
        previous = assoc

        if stable >= cfg.stability_window or change < cfg.inner_tol:
            converged = True
            break

    if not converged:
        logger.debug("Inner loop hit %d iterations without converging", cfg.inner_max_iter)

    if best_fixed is not None:
        return InnerResult(best_fixed.assoc, True, converged, t, duals, best_repaired)
    logger.debug("No inner iterate met the backhaul constraint at the fixed WBBA")
    return InnerResult(previous, False, converged, t, duals, best_repaired)


def solve_inner(beta: float, chan: ChannelRealization, cfg: SolverConfig = None) -> InnerResult:
    """Cell association at a fixed unified β."""
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"Inner loop needs beta in [0, 1), got {beta}")
    return run_dual_decomposition(chan, cfg or SolverConfig(), beta, 'unified')


class UnifiedWbbaSolver:
    """Joint CA and unified WBBA: alternate the inner loop with β repair."""

    kind = 'unified'

    def __init__(self, cfg: SolverConfig = None):
        self.cfg = cfg or SolverConfig()

    def solve(self, chan: ChannelRealization) -> SolverResult:
        cfg = self.cfg
        diag = SolverDiagnostics()
        beta = cfg.beta_init
        best: Optional[SolverResult] = None

        for s in range(1, cfg.outer_max_iter + 1):
            inner = solve_inner(beta, chan, cfg)
            diag.outer_iterations = s
            diag.inner_iterations.append(inner.iterations)
            diag.inner_converged.append(inner.converged)
            diag.backhaul_violation = not inner.feasible
            diag.record_duals(inner.duals)

            new_beta = rate_model.min_feasible_beta_unified(inner.assoc, chan)
            candidate = evaluate(inner.assoc, WbbaAllocation.unified(new_beta), chan)
            best = better(better(best, candidate), inner.best)
            diag.utility_trace.append(candidate.utility)
            diag.beta_trace.append(new_beta)
            logger.debug("Outer %d: beta %.6f -> %.6f, utility %.6f", s, beta, new_beta, candidate.utility)

            if abs(new_beta - beta) < cfg.outer_tol:
                diag.converged = True
                break
            beta = new_beta

        if not diag.converged:
            logger.warning("Unified solver stopped after %d outer iterations without converging",
                           diag.outer_iterations)
        best.diagnostics = diag
        return best


def solve(chan: ChannelRealization, cfg: SolverConfig = None) -> SolverResult:
    return UnifiedWbbaSolver(cfg).solve(chan)
