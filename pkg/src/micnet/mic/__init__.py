"""Maximal information coefficient: baseline, refined and exhaustive estimators."""

from .brute import SampleTooLargeError, brute_force_mic
from .core import (CharacteristicMatrix, MicResult, approx_mic,
                   characteristic_matrix_baseline,
                   characteristic_matrix_refined, count_permutations_reaching,
                   iamic, mic_score,
                   permuted_mic_scores)
from .grid import (AxisPartition, CellCounts, DegenerateAxisError,
                   InvalidPartitionError, MicConfig, PairedSample, cell_counts,
                   equipartition_axis, get_clumps, mutual_information,
                   optimize_x_axis)
from .search import quadratic_boundary_search

__all__ = [
    "AxisPartition", "CellCounts", "CharacteristicMatrix", "DegenerateAxisError",
    "InvalidPartitionError", "MicConfig", "MicResult", "PairedSample",
    "SampleTooLargeError", "approx_mic", "brute_force_mic", "cell_counts",
    "characteristic_matrix_baseline", "characteristic_matrix_refined",
    "count_permutations_reaching",
    "equipartition_axis", "get_clumps", "iamic", "mic_score",
    "mutual_information", "optimize_x_axis", "permuted_mic_scores",
    "quadratic_boundary_search",
]
