import json

import numpy as np
import pandas as pd
import pytest

from core.models import ExperimentSpec, NetworkScenario
from services.csv_tools import RAW_COLUMNS, results_frame
from services.experiments import build_instance, run_experiment, run_sweep, run_trial, trial_seeds

TINY = NetworkScenario(n_small_cells=2, n_mts=6, sigma_bs=0.0, sigma_sc=0.0)
TINY_SHADOWED = NetworkScenario(n_small_cells=2, n_mts=6)


def _spec(tmp_path=None, **kwargs):
    kwargs.setdefault('scenario', TINY_SHADOWED)
    kwargs.setdefault('n_trials', 3)
    kwargs.setdefault('master_seed', 42)
    if tmp_path is not None:
        kwargs.setdefault('output_dir', str(tmp_path))
    return ExperimentSpec(**kwargs)


# --- seeding ---

def test_trial_seeds_are_reproducible_and_distinct():
    a_seed, a_rng = trial_seeds(42, 3)
    b_seed, b_rng = trial_seeds(42, 3)
    assert a_seed == b_seed
    assert a_rng.random() == b_rng.random()
    assert trial_seeds(42, 4)[0] != a_seed


def test_instances_differ_between_trials():
    spec = _spec()
    a, b = build_instance(spec, 0), build_instance(spec, 1)
    assert not np.array_equal(a.topology.mt_positions, b.topology.mt_positions)


# --- run_trial ---

def test_same_trial_is_identical():
    spec = _spec(algorithms=('sinr', 'cawbba'))
    for name in spec.algorithms:
        a, b = run_trial(spec, name, 1), run_trial(spec, name, 1)
        assert np.array_equal(a.per_mt_rates, b.per_mt_rates)
        assert np.array_equal(a.serving, b.serving)
        assert a.utility == b.utility


def test_sinr_without_small_cells_shares_macro_rate():
    spec = _spec(scenario=NetworkScenario(n_small_cells=0, n_mts=5), algorithms=('sinr',))
    result = run_trial(spec, 'sinr', 0)
    r_macro = build_instance(spec, 0).chan.r_macro
    assert result.loads.tolist() == [5]
    assert result.utility == pytest.approx(np.log(r_macro / 5).sum(), abs=1e-9)


@pytest.mark.parametrize("kind", ['unified', 'per_cell'])
def test_oracle_bounds_solver(kind):
    spec = _spec(scenario=TINY, scenario_kind=kind, algorithms=('cawbba', 'oracle'))
    for trial_id in range(3):
        solver = run_trial(spec, 'cawbba', trial_id)
        oracle = run_trial(spec, 'oracle', trial_id)
        assert oracle.utility >= solver.utility - 1e-9


def test_trial_result_is_consistent():
    spec = _spec(scenario_kind='per_cell', algorithms=('offload_balanced',))
    instance = build_instance(spec, 2)
    result = run_trial(spec, 'offload_balanced', 2, instance)
    assert result.per_mt_rates.shape == (6,)
    assert (result.per_mt_rates > 0).all()
    assert result.utility == pytest.approx(np.log(result.per_mt_rates).sum(), abs=1e-9)
    assert result.diagnostics is None
    assert result.to_dict()['wbba']['kind'] == 'per_cell'


def test_solver_diagnostics_kept():
    result = run_trial(_spec(algorithms=('cawbba',)), 'cawbba', 0)
    assert result.diagnostics['outer_iterations'] == result.iterations['outer']
    assert result.iterations['inner'] >= result.iterations['outer']


def test_unknown_algorithm_rejected():
    with pytest.raises(ValueError):
        run_trial(_spec(), 'max_rate', 0)


def test_offload_rejected_in_unified_scenario():
    with pytest.raises(ValueError):
        run_trial(_spec(), 'offload', 0)
    with pytest.raises(ValueError):
        _spec(algorithms=('sinr', 'offload'))


def test_oversize_oracle_rejected():
    with pytest.raises(ValueError):
        _spec(scenario=NetworkScenario(n_small_cells=2, n_mts=13), algorithms=('oracle',))


# --- backhaul feasibility ---

@pytest.mark.parametrize("kind, algorithms", [
    ('unified', ('sinr', 'cre', 'cawbba', 'oracle')),
    ('per_cell', ('sinr', 'cre', 'cawbba', 'offload', 'offload_balanced', 'oracle')),
])
def test_every_result_respects_backhaul(kind, algorithms):
    spec = _spec(scenario_kind=kind, algorithms=algorithms)
    outcome = run_experiment(spec, write=False)
    for result in outcome.results:
        assert result.feasible
        if kind == 'per_cell':
            chan = build_instance(spec, result.trial_id).chan
            sums = np.bincount(result.serving, weights=chan.rates[result.serving, np.arange(6)], minlength=3)
            for j in np.flatnonzero(result.loads[1:] > 0) + 1:
                throughput = (1.0 - result.wbba.beta_j[j - 1]) * sums[j] / result.loads[j]
                capacity = result.wbba.beta_j[j - 1] * chan.c_backhaul[j - 1]
                assert throughput == pytest.approx(capacity, rel=1e-10)


# --- run_experiment ---

def test_results_sorted_by_trial_then_algorithm():
    spec = _spec(algorithms=('cawbba', 'sinr'))
    outcome = run_experiment(spec, write=False)
    assert [(r.trial_id, r.algorithm) for r in outcome.results] == [
        (t, a) for t in range(3) for a in ('cawbba', 'sinr')]


def test_doubling_trials_keeps_prefix():
    small = run_experiment(_spec(n_trials=2, algorithms=('sinr', 'cawbba')), write=False)
    large = run_experiment(_spec(n_trials=4, algorithms=('sinr', 'cawbba')), write=False)
    small_frame = results_frame(small.results)
    large_frame = results_frame(large.results)
    prefix = large_frame[large_frame['trial_id'] < 2].reset_index(drop=True)
    pd.testing.assert_frame_equal(small_frame, prefix)


def test_worker_count_does_not_change_results():
    serial = run_experiment(_spec(n_trials=4, algorithms=('sinr', 'cawbba')), write=False)
    parallel = run_experiment(_spec(n_trials=4, algorithms=('sinr', 'cawbba'), n_workers=2), write=False)
    pd.testing.assert_frame_equal(results_frame(serial.results), results_frame(parallel.results))


def test_single_trial_summary_matches_trial():
    outcome = run_experiment(_spec(n_trials=1, algorithms=('cre',)), write=False)
    trial = outcome.results[0]
    stats = outcome.summary.algorithms['cre']
    assert stats.mean_utility == trial.utility
    assert stats.n_samples == trial.n_mts


def test_bits_per_second_scales_rates():
    spec = _spec(n_trials=2, algorithms=('sinr',))
    plain = run_experiment(spec, write=False)
    scaled = run_experiment(spec, write=False, bits_per_second=True)
    assert scaled.summary.rate_unit == 'bit/s'
    assert scaled.summary.algorithms['sinr'].mean_rate == pytest.approx(
        plain.summary.algorithms['sinr'].mean_rate * spec.scenario.bandwidth)
    assert scaled.summary.algorithms['sinr'].mean_utility == plain.summary.algorithms['sinr'].mean_utility


def test_output_files_written(tmp_path):
    spec = _spec(tmp_path, algorithms=('sinr', 'cawbba'))
    outcome = run_experiment(spec, dump_links=True, diagnostics=True)
    names = {p.name for p in outcome.files}
    assert names == {'results_raw.csv', 'cdf_sinr.csv', 'cdf_cawbba.csv', 'summary.json',
                     'link_budget.csv', 'positions.csv', 'diagnostics.json'}

    raw = pd.read_csv(tmp_path / 'results_raw.csv')
    assert list(raw.columns) == RAW_COLUMNS
    assert len(raw) == 3 * 2 * 6
    cdf = pd.read_csv(tmp_path / 'cdf_cawbba.csv')
    assert list(cdf.columns) == ['rate', 'cumulative_fraction']
    assert cdf['cumulative_fraction'].iloc[-1] == pytest.approx(1.0)

    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['experiment']['master_seed'] == 42
    assert set(summary['algorithms']) == {'sinr', 'cawbba'}
    diagnostics = json.loads((tmp_path / 'diagnostics.json').read_text())
    assert [d['trial_id'] for d in diagnostics['trials']] == [0, 1, 2]

    links = pd.read_csv(tmp_path / 'link_budget.csv')
    assert len(links) == 6 + 2 + 2 * 6
    assert set(links['link_type']) == {'macro_mt', 'backhaul', 'sc_mt'}

    positions = pd.read_csv(tmp_path / 'positions.csv')
    instance = build_instance(spec, 0)
    assert positions['node_type'].tolist() == ['macro'] + ['small_cell'] * 2 + ['mt'] * 6
    np.testing.assert_allclose(positions[['x', 'y']].values[3:], instance.topology.mt_positions)
    np.testing.assert_allclose(positions[['x', 'y']].values[1:3], instance.topology.sc_positions)


def test_rerun_reproduces_raw_dump(tmp_path):
    first, second = tmp_path / 'a', tmp_path / 'b'
    run_experiment(_spec(output_dir=str(first), algorithms=('sinr', 'cawbba')))
    run_experiment(_spec(output_dir=str(second), algorithms=('sinr', 'cawbba')))
    assert (first / 'results_raw.csv').read_bytes() == (second / 'results_raw.csv').read_bytes()


# --- run_sweep ---

def test_sweep_points_match_single_experiments():
    spec = _spec(nu_sweep=(4, 6), algorithms=('sinr', 'cawbba'))
    sweep = run_sweep(spec, write=False)
    assert [(ns, nu) for ns, nu, _ in sweep.points] == [(2, 4), (2, 6)]
    single = run_experiment(spec.at_point(2, 4), write=False)
    pd.testing.assert_frame_equal(results_frame(sweep.at(2, 4).results), results_frame(single.results))
    assert sweep.mean_utilities('cawbba').loc[4] == pytest.approx(single.utilities('cawbba').mean())
    assert len(sweep.frame) == 4


def test_sweep_files_written(tmp_path):
    spec = _spec(tmp_path, ns_sweep=(1, 2), n_trials=2, algorithms=('sinr',))
    sweep = run_sweep(spec, dump_links=True)
    names = {p.name for p in sweep.files}
    assert names == {'sweep.csv', 'summary.json', 'link_budget_ns1_nu6.csv', 'positions_ns1_nu6.csv',
                     'link_budget_ns2_nu6.csv', 'positions_ns2_nu6.csv'}
    frame = pd.read_csv(tmp_path / 'sweep.csv')
    assert frame['n_small_cells'].tolist() == [1, 2]
    assert (frame['n_trials'] == 2).all()
    assert {'mean_utility', 'utility_std_error', 'R_0.5', 'R_0.9'} <= set(frame.columns)
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert [p['n_small_cells'] for p in summary['points']] == [1, 2]
    assert summary['experiment']['ns_sweep'] == [1, 2]
    assert len(pd.read_csv(tmp_path / 'positions_ns1_nu6.csv')) == 1 + 1 + 6
