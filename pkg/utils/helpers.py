"""
Utility helper functions.
"""
from typing import List

from core.config import DISPLAY_WIDTH


def print_header(text: str, width: int = DISPLAY_WIDTH):
    """Print formatted header."""
    print(f"\n{'=' * width}")
    print(f"{text.center(width)}")
    print(f"{'=' * width}\n")


def print_section(text: str):
    """Print section divider."""
    print(f"\n{text}")
    print("-" * len(text))


def display_summary_table(summary, max_rows: int = 10):
    """Display the per-algorithm metrics summary table."""
    if not summary.algorithms:
        print("No results available.")
        return

    labels = sorted({label for s in summary.algorithms.values() for label in s.rate_at}, reverse=True)
    rate_header = ''.join(f"{label:<12}" for label in labels)
    print(f"\n{'Algorithm':<18} {'Trials':<8} {'Utility':<12} {'± s.e.':<10} {rate_header}{'β / N_b':<10} {'K0':<8}")
    print("-" * DISPLAY_WIDTH)

    for s in list(summary.algorithms.values())[:max_rows]:
        rates = ''.join(f"{s.rate_at.get(label, float('nan')):<12.4g}" for label in labels)
        print(f"{s.algorithm:<18} {s.n_trials:<8} {s.mean_utility:<12.3f} {s.utility_std_error:<10.3f} "
              f"{rates}{s.mean_beta:<10.4f} {s.mean_macro_load:<8.1f}")
    print(f"\nRates in {summary.rate_unit}, utility in nats")


def display_files(files: List):
    for path in files:
        print(f"  • {path}")


def display_sweep_table(frame):
    """Display one row per (sweep point, algorithm)."""
    if frame.empty:
        print("No results available.")
        return

    labels = [c for c in frame.columns if c.startswith('R_')]
    rate_header = ''.join(f"{label:<12}" for label in labels)
    print(f"\n{'N_S':<6} {'N_U':<6} {'Algorithm':<18} {'Utility':<12} {'± s.e.':<10} {rate_header}")
    print("-" * DISPLAY_WIDTH)
    for row in frame.to_dict('records'):
        rates = ''.join(f"{row[label]:<12.4g}" for label in labels)
        print(f"{row['n_small_cells']:<6} {row['n_mts']:<6} {row['algorithm']:<18} {row['mean_utility']:<12.3f} "
              f"{row['utility_std_error']:<10.3f} {rates}")
