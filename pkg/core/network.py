"""
Network geometry: uniform placement of small cells and MTs in the macro cell.
"""
import numpy as np

from .models import NetworkScenario, Topology


def sample_disk(n: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Area-uniform points in a disk centred at the origin (inverse-CDF radius)."""
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def generate_topology(scenario: NetworkScenario, seed: int) -> Topology:
    """Place N_S small cells then N_U MTs uniformly over the macro cell range.

    Deterministic for a given (scenario, seed).
    """
    rng = np.random.default_rng(seed)
    points = sample_disk(scenario.n_small_cells + scenario.n_mts, scenario.macro_radius, rng)
    return Topology.from_positions(
        points[:scenario.n_small_cells],
        points[scenario.n_small_cells:],
        scenario.min_link_distance,
    )
