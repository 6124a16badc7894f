"""
Centralized configuration for the HetNet backhaul optimizer.
"""
from pathlib import Path

# Application Info
APP_NAME = "HetNet Backhaul Optimizer"
APP_VERSION = "1.0.0"

# Directories
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = BASE_DIR / "data"
DEFAULT_OUTPUT_DIR = BASE_DIR / "results"

# File Names
DEFAULT_EXPERIMENT_FILE = "default_experiment.json"
RAW_RESULTS_FILE = "results_raw.csv"
SUMMARY_FILE = "summary.json"
CDF_FILE_TEMPLATE = "cdf_{algorithm}.csv"
LINK_BUDGET_FILE = "link_budget.csv"
DIAGNOSTICS_FILE = "diagnostics.json"
SWEEP_FILE = "sweep.csv"
POSITIONS_FILE = "positions.csv"
SWEEP_POINT_TEMPLATE = "{stem}_ns{n_small_cells}_nu{n_mts}{suffix}"

# Scenario Defaults
DEFAULT_MACRO_RADIUS = 350.0        # m
DEFAULT_N_SMALL_CELLS = 10
DEFAULT_N_MTS = 100
DEFAULT_N_ANTENNAS = 100
DEFAULT_BEAM_GROUP = 20
DEFAULT_P_MACRO = 20.0              # W, 43 dBm
DEFAULT_P_SMALL = 2.0               # W, 33 dBm
DEFAULT_SC_ANTENNA_GAIN = 5.0       # dB
DEFAULT_NOISE_PSD = -174.0          # dBm/Hz
DEFAULT_BANDWIDTH = 5e6             # Hz
DEFAULT_SIGMA_BS = 6.0              # dB
DEFAULT_SIGMA_SC = 4.0              # dB
DEFAULT_MIN_LINK_DISTANCE = 5.0     # m

# Path Loss Models (intercept dB, slope dB/decade)
PL_MACRO_MT = (27.3, 39.1)
PL_BACKHAUL = (24.6, 39.1)
PL_SC_MT = (36.8, 36.7)

# Solver Defaults
DEFAULT_STEP_MU = 0.1
DEFAULT_STEP_NU = 0.01
DEFAULT_STEP_DECAY = 1.0
DEFAULT_INNER_TOL = 1e-4
DEFAULT_INNER_MAX_ITER = 2000
DEFAULT_OUTER_TOL = 1e-4
DEFAULT_OUTER_MAX_ITER = 50
DEFAULT_BETA_INIT = 0.5
DEFAULT_STABILITY_WINDOW = 10
DEFAULT_PERCELL_OUTER_TOL = 1e-6    # absolute utility change, nats

# Heuristics / Oracle
DEFAULT_CRE_BIAS_DB = 3.0
DEFAULT_MAX_ENUMERATION = 10**6
ORACLE_BLOCK_SIZE = 2**15
BETA_CHECK_MAX_MTS = 4
BETA_CHECK_DELTA = 1e-3

# Tolerances
FEASIBILITY_SLACK = 1e-9
UTILITY_CHECK_TOL = 1e-9

# Experiments
SCENARIO_KINDS = ['unified', 'per_cell']
ALGORITHMS = ['sinr', 'cre', 'cawbba', 'offload', 'offload_balanced', 'oracle']
PER_CELL_ONLY_ALGORITHMS = ['offload', 'offload_balanced']
DEFAULT_ALGORITHMS = ['sinr', 'cre', 'cawbba']
DEFAULT_N_TRIALS = 200
DEFAULT_MASTER_SEED = 20240101
DEFAULT_N_WORKERS = 1
REPORTED_PROBABILITIES = (0.5, 0.9)

# Display
CSV_ENCODING = 'utf-8'
DISPLAY_WIDTH = 70

# Messages
ERROR_MESSAGES = {
    'invalid_scenario': "Invalid scenario: {detail}",
    'invalid_association': "Invalid association: {detail}",
    'invalid_beta': "WBBA factor out of range: {detail}",
    'invalid_solver_config': "Invalid solver configuration: {detail}",
    'oracle_too_large': "Instance too large for enumeration: {count} assignments > {limit}",
    'unknown_algorithm': "Unknown algorithm '{name}', expected one of {choices}",
    'unknown_kind': "Unknown scenario kind '{name}', expected one of {choices}",
    'unified_heuristic': "Algorithm '{name}' is only defined for the per_cell scenario",
    'unknown_keys': "Unknown configuration keys: {keys}",
    'empty_rates': "Rate vector is empty",
    'invalid_probability': "Probability must be in (0, 1], got {p}",
    'file_not_found': "File not found: {filename}",
    'write_failed': "Could not write {filename}: {reason}",
    'utility_mismatch': "Utility mismatch for trial {trial_id} ({algorithm}): {reported} vs {recomputed}",
    'invalid_experiment': "Invalid experiment: {detail}",
}

SUCCESS_MESSAGES = {
    'experiment_done': "✓ Finished {trials} trials × {algorithms} algorithms",
    'results_written': "✓ Wrote results to {output_dir}",
    'sweep_done': "✓ Finished {points} sweep points × {trials} trials",
}


def get_error_message(key: str, **kwargs) -> str:
    return ERROR_MESSAGES.get(key, "An error occurred").format(**kwargs)


def get_success_message(key: str, **kwargs) -> str:
    return SUCCESS_MESSAGES.get(key, "Operation successful").format(**kwargs)


# Validate on import
def _validate_config():
    if not DEFAULT_N_SMALL_CELLS < DEFAULT_BEAM_GROUP <= DEFAULT_N_ANTENNAS:
        raise ValueError("Default scenario must satisfy N_S < N_g <= N_T")
    if min(DEFAULT_INNER_TOL, DEFAULT_OUTER_TOL, DEFAULT_PERCELL_OUTER_TOL) <= 0:
        raise ValueError("Solver tolerances must be positive")
    if not 0 < DEFAULT_BETA_INIT < 1:
        raise ValueError("Initial WBBA factor must lie in (0, 1)")
    if not set(DEFAULT_ALGORITHMS) <= set(ALGORITHMS):
        raise ValueError("Default algorithms must be known algorithms")

_validate_config()
