"""
Detector statistics: probabilities, sampling, coincidences and chi-square.
"""

from src.measurement.statistics import (
    chi_square,
    chi_square_pvalue,
    chi_square_threshold,
    coincidence_probabilities,
    probabilities,
    sample,
)

__all__ = [
    "chi_square",
    "chi_square_pvalue",
    "chi_square_threshold",
    "coincidence_probabilities",
    "probabilities",
    "sample",
]
