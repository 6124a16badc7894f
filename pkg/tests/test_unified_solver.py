import numpy as np
import pytest

from core import rate_model
from core.models import Association, ChannelRealization, DualState, SolverConfig, WbbaAllocation
from core.oracle import brute_force_uwbba
from core.unified_solver import (
    UnifiedWbbaSolver, assign_step, revenue, solve, solve_inner, update_k_aux, update_multipliers
)
from tests.conftest import random_chan


def _duals(mu, nu, k_aux=None):
    mu = np.asarray(mu, dtype=float)
    return DualState(mu=mu, nu=nu, k_aux=np.ones_like(mu) if k_aux is None else k_aux)


# --- revenue ---

def test_revenue_with_zero_duals_is_log_rate():
    chan = random_chan(0, n_small_cells=2, n_mts=3)
    duals = DualState.initial(3, 3)
    for j in range(3):
        for k in range(3):
            assert revenue(k, j, duals, 0.4, chan) == pytest.approx(np.log(chan.rates[j, k]))


def test_macro_revenue_ignores_nu():
    chan = random_chan(1, n_small_cells=2, n_mts=2)
    duals = _duals([0.7, 0.0, 0.0], [0.0, 5.0, 5.0])
    assert revenue(1, 0, duals, 0.3, chan) == pytest.approx(np.log(chan.r_macro[1]) - 0.7)


def test_revenue_hand_example():
    chan = ChannelRealization.from_rates([5.0], [[2.0]], [4.0])
    duals = _duals([0.0, 1.0], [0.0, 0.1])
    assert revenue(0, 1, duals, 0.5, chan) == pytest.approx(-0.4069, abs=1e-4)


# --- assign_step ---

def test_zero_duals_pick_best_baseline_rate():
    chan = random_chan(2)
    assoc = assign_step(DualState.initial(chan.n_cells, chan.n_mts), 0.5, chan)
    assert np.array_equal(assoc.serving, np.argmax(chan.rates, axis=0))


def test_ties_go_to_macro():
    chan = ChannelRealization.from_rates([4.0], [[4.0]], [4.0])
    assert assign_step(DualState.initial(2, 1), 0.5, chan).serving.tolist() == [0]


def test_assignment_invariant_to_common_rate_scaling():
    chan = random_chan(3)
    scaled = ChannelRealization.from_rates(chan.r_macro * 3.0, chan.r_sc * 3.0, chan.c_backhaul)
    duals = DualState.initial(chan.n_cells, chan.n_mts)
    assert assign_step(duals, 0.5, chan).same_as(assign_step(duals, 0.5, scaled))


def test_assignment_is_always_binary():
    chan = random_chan(4)
    duals = _duals(np.random.default_rng(4).uniform(0, 3, chan.n_cells), np.r_[0.0, np.full(chan.n_small_cells, 0.2)])
    x = assign_step(duals, 0.3, chan).x
    assert (x.sum(axis=0) == 1).all()


# --- update_k_aux ---

def test_k_aux_first_order_condition():
    chan = random_chan(5, n_small_cells=1, n_mts=100)
    assert update_k_aux(_duals([1.0, 1.0], [0.0, 0.0]), 0.5, chan) == pytest.approx([1.0, 1.0])
    assert update_k_aux(_duals([0.0, 0.0], [0.0, 0.0]), 0.5, chan) == pytest.approx([np.exp(-1)] * 2, abs=1e-4)
    assert update_k_aux(_duals([20.0, 20.0], [0.0, 0.0]), 0.5, chan).tolist() == [100.0, 100.0]


def test_k_aux_includes_backhaul_price():
    chan = random_chan(6, n_small_cells=1, n_mts=100)
    k_aux = update_k_aux(_duals([0.0, 0.0], [0.0, 0.1]), 0.5, chan)
    assert k_aux[1] == pytest.approx(np.exp(0.1 * 0.5 * chan.c_backhaul[0] - 1.0))


# --- update_multipliers ---

def test_zero_subgradient_is_fixed_point():
    chan = ChannelRealization.from_rates([5.0, 6.0, 7.0], np.zeros((0, 3)), [])
    assoc = Association.all_macro(1, 3)
    duals = _duals([1.2], [0.0])
    updated = update_multipliers(duals, assoc, np.array([3.0]), 0.5, chan, t=1, cfg=SolverConfig())
    assert updated.mu.tolist() == [1.2]
    assert updated.nu.tolist() == [0.0]


def test_multipliers_projected_to_zero():
    chan = ChannelRealization.from_rates([5.0], [[2.0]], [4.0])
    assoc = Association([0], 2)
    duals = _duals([0.0, 0.0], [0.0, 0.001])
    updated = update_multipliers(duals, assoc, np.array([2.0, 5.0]), 0.5, chan, t=1, cfg=SolverConfig())
    assert updated.nu[1] == 0.0
    assert updated.mu[1] == 0.0
    assert updated.nu[0] == 0.0


def test_mu_hand_example():
    chan = ChannelRealization.from_rates([5.0, 5.0, 5.0], [[1.0, 1.0, 1.0]], [4.0])
    assoc = Association([0, 0, 0], 2)
    duals = _duals([1.0, 0.0], [0.0, 0.0])
    cfg = SolverConfig(step_mu_0=0.1, step_decay=1.0)
    updated = update_multipliers(duals, assoc, np.array([5.0, 0.0]), 0.5, chan, t=1, cfg=cfg)
    assert updated.mu[0] == pytest.approx(0.8)


def test_step_sizes_diminish():
    cfg = SolverConfig(step_mu_0=0.1, step_nu_0=0.01, step_decay=1.0)
    assert cfg.step_mu(4) == pytest.approx(0.025)
    assert cfg.step_nu(10) == pytest.approx(0.001)


# --- solve_inner ---

def test_inner_without_small_cells_is_all_macro():
    chan = ChannelRealization.from_rates([5.0, 6.0, 7.0], np.zeros((0, 3)), [])
    inner = solve_inner(0.5, chan)
    assert inner.assoc.serving.tolist() == [0, 0, 0]
    assert inner.iterations == 1
    assert inner.converged


def test_inner_rejects_full_backhaul():
    with pytest.raises(ValueError):
        solve_inner(1.0, random_chan(0))


def test_inner_returns_feasible_assignment_when_flagged(tiny_chans):
    for chan in tiny_chans:
        inner = solve_inner(0.5, chan)
        assert (inner.assoc.x.sum(axis=0) == 1).all()
        if inner.feasible:
            assert rate_model.is_backhaul_feasible(inner.assoc, WbbaAllocation.unified(0.5), chan)
        assert (inner.duals.mu >= 0).all() and (inner.duals.nu >= 0).all()
        assert inner.duals.nu[0] == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_single_mt_joins_best_rate_cell(seed):
    chan = random_chan(seed, n_mts=1)
    inner = solve_inner(0.3, chan)
    assert inner.feasible
    assert inner.assoc.serving.tolist() == [int(np.argmax(chan.rates[:, 0]))]


def test_single_mt_joins_feasible_small_cell():
    chan = ChannelRealization.from_rates([3.0], [[5.0], [2.0]], [20.0, 20.0])
    inner = solve_inner(0.3, chan)
    assert inner.assoc.serving.tolist() == [1]
    assert inner.feasible


# --- solve ---

def test_all_macro_optimum_gives_zero_beta():
    chan = ChannelRealization.from_rates([100.0, 120.0], [[0.01, 0.01]], [5.0])
    result = solve(chan)
    assert result.assoc.serving.tolist() == [0, 0]
    assert result.wbba.beta == 0.0


def test_symmetric_single_link_gives_half_beta():
    chan = ChannelRealization.from_rates([1.0], [[4.0]], [4.0])
    result = solve(chan)
    assert result.assoc.serving.tolist() == [1]
    assert result.wbba.beta == pytest.approx(0.5)
    assert result.diagnostics.converged


def test_solution_is_feasible_and_valid(tiny_chans):
    for chan in tiny_chans:
        result = UnifiedWbbaSolver().solve(chan)
        assert (result.assoc.x.sum(axis=0) == 1).all()
        assert rate_model.is_backhaul_feasible(result.assoc, result.wbba, chan)
        assert result.utility == pytest.approx(rate_model.sum_log_rate(result.assoc, result.wbba, chan))
        assert result.wbba.beta == pytest.approx(rate_model.min_feasible_beta_unified(result.assoc, chan))


def test_diagnostics_are_recorded(tiny_chans):
    result = solve(tiny_chans[0])
    diag = result.diagnostics
    assert diag.outer_iterations == len(diag.inner_iterations) == len(diag.beta_trace)
    assert diag.final_nu[0] == 0.0
    assert min(diag.final_mu) >= 0.0
    assert diag.to_dict()['outer_iterations'] == diag.outer_iterations


def test_near_oracle_on_tiny_instances(tiny_chans):
    gaps = []
    for chan in tiny_chans:
        best = brute_force_uwbba(chan).utility
        found = solve(chan).utility
        assert found <= best + 1e-9
        gaps.append((best - found) / abs(best))
    assert np.mean(gaps) <= 0.05


def test_solver_is_deterministic(tiny_chans):
    a, b = solve(tiny_chans[1]), solve(tiny_chans[1])
    assert a.assoc.same_as(b.assoc)
    assert a.utility == b.utility
