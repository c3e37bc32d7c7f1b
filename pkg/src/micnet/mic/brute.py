"""Exact MIC by exhaustive grid enumeration, for small samples only."""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from . import _engine
from .core import MicResult
from .grid import AxisPartition, MicConfig, PairedSample, _prime_table


class SampleTooLargeError(ValueError):
    pass


def _valid_cuts(values: np.ndarray) -> list[int]:
    ordered = np.sort(values)
    return [k for k in range(1, values.size) if ordered[k - 1] != ordered[k]]


def _bin_index(values: np.ndarray, cuts: tuple[int, ...]) -> np.ndarray:
    ordered = np.sort(values)
    thresholds = ordered[np.asarray(cuts, dtype=np.int64) - 1]
    return np.searchsorted(thresholds, values, side="left")


def brute_force_mic(sample: PairedSample, config: MicConfig | None = None,
                    n_limit: int = 12) -> MicResult:
    """Maximum normalised mutual information over every admissible grid.

    Every tie-respecting choice of ``x - 1`` column cuts and ``y - 1`` row cuts
    is scored for each ``x, y >= 2`` with ``x * y <= B(n)``.
    """
    config = config or MicConfig()
    n = sample.n
    if n > n_limit:
        raise SampleTooLargeError(
            f"brute force refuses n={n}: limit is n_limit={n_limit}")
    xcuts, ycuts = _valid_cuts(sample.xs), _valid_cuts(sample.ys)
    if not xcuts or not ycuts:
        return MicResult(0.0, None, None, "brute_force", degenerate=True)
    budget = config.budget(n)
    spf = _prime_table(n)
    best, best_dims, best_part = -1.0, None, None
    for x in range(2, int(budget // 2) + 1):
        for y in range(2, int(budget // x) + 1):
            if len(xcuts) < x - 1 or len(ycuts) < y - 1:
                continue
            norm = math.log2(min(x, y))
            xbins = [(c, _bin_index(sample.xs, c))
                     for c in combinations(xcuts, x - 1)]
            ybins = [(c, _bin_index(sample.ys, c))
                     for c in combinations(ycuts, y - 1)]
            for xc, cols in xbins:
                for yc, rows in ybins:
                    table = np.zeros((x, y), dtype=np.int64)
                    np.add.at(table, (cols, rows), 1)
                    score = min(_engine.mi_exact(table, spf) / norm, 1.0)
                    if score > best:
                        best, best_dims = score, (x, y)
                        best_part = (AxisPartition(xc), AxisPartition(yc))
    if best_dims is None:
        return MicResult(0.0, None, None, "brute_force", degenerate=True)
    return MicResult(best, best_dims, best_part, "brute_force")
