"""
Utility functions.
"""
from .helpers import (
    print_header,
    print_section,
    display_summary_table,
    display_sweep_table,
    display_files
)

__all__ = [
    'print_header',
    'print_section',
    'display_summary_table',
    'display_sweep_table',
    'display_files'
]
