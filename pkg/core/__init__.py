"""
Core module - models, config, channel model, solvers, oracle, repositories.
"""
from .config import *
from .models import (
    NetworkScenario, Topology, ChannelRealization, Association, WbbaAllocation,
    DualState, SolverConfig, OracleLimits, SolverDiagnostics, SolverResult,
    ExperimentSpec, TrialResult
)
from .network import generate_topology
from .propagation import realize_channels
from .unified_solver import UnifiedWbbaSolver
from .percell_solver import PerCellWbbaSolver
from .oracle import BruteForceOracle, brute_force_uwbba, brute_force_pwbba
from .repositories import ScenarioRepository, ExperimentRepository, ResultRepository

__all__ = [
    # Models
    'NetworkScenario', 'Topology', 'ChannelRealization', 'Association', 'WbbaAllocation',
    'DualState', 'SolverConfig', 'OracleLimits', 'SolverDiagnostics', 'SolverResult',
    'ExperimentSpec', 'TrialResult',
    # Channel model
    'generate_topology', 'realize_channels',
    # Solvers
    'UnifiedWbbaSolver', 'PerCellWbbaSolver',
    'BruteForceOracle', 'brute_force_uwbba', 'brute_force_pwbba',
    # Repositories
    'ScenarioRepository', 'ExperimentRepository', 'ResultRepository',
]
