"""Characteristic matrices and the MIC estimators built on them.

Two estimators share one code path:

* ``approx_mic`` equipartitions one axis and optimises the other by dynamic
  programming, in both axis roles;
* ``iamic`` starts from the same matrix and, for every row count, refines the
  equipartitioned boundaries by parabolic search at the column count holding
  the row's largest score.  Refined scores are only ever taken when they beat
  the baseline, so ``iamic >= approx_mic`` on every sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _engine
from .grid import AxisPartition, MicConfig, PairedSample, _prime_table

Method = Literal["baseline", "iamic", "brute_force"]


@dataclass(frozen=True)
class CharacteristicMatrix:
    """Normalised grid scores keyed by ``(x_bins, y_bins)``."""

    entries: dict[tuple[int, int], float]
    partitions: dict[tuple[int, int], tuple[AxisPartition, AxisPartition]] = \
        field(default_factory=dict, repr=False)
    method: Method = "baseline"

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key):
        return self.entries[key]

    def argmax(self) -> tuple[int, int] | None:
        best, arg = -1.0, None
        for key in sorted(self.entries):
            if self.entries[key] > best:
                best, arg = self.entries[key], key
        return arg

    def max(self) -> float:
        return max(self.entries.values(), default=0.0)

    def to_array(self) -> np.ndarray:
        """Dense view indexed ``[x_bins, y_bins]``; NaN where no grid applies."""
        if not self.entries:
            return np.zeros((0, 0))
        xm = max(k[0] for k in self.entries)
        ym = max(k[1] for k in self.entries)
        out = np.full((xm + 1, ym + 1), np.nan)
        for (x, y), v in self.entries.items():
            out[x, y] = v
        return out


@dataclass(frozen=True)
class MicResult:
    mic: float
    best_dims: tuple[int, int] | None
    best_partition: tuple[AxisPartition, AxisPartition] | None
    method: Method
    degenerate: bool = False


def _rank_cuts(code_cuts, values: np.ndarray) -> AxisPartition:
    _, counts = np.unique(values, return_counts=True)
    cum = np.cumsum(counts)
    return AxisPartition(tuple(int(cum[c - 1]) for c in code_cuts if c >= 0))


def _is_degenerate(sample: PairedSample) -> bool:
    return bool(np.all(sample.xs == sample.xs[0]) or
                np.all(sample.ys == sample.ys[0]))


def _build(sample: PairedSample, config: MicConfig,
           method: Method) -> CharacteristicMatrix:
    if _is_degenerate(sample):
        return CharacteristicMatrix({}, {}, method)
    n = sample.n
    budget = config.budget(n)
    g = _engine.plogp_table(n)
    spf = _prime_table(n)
    refine = method == "iamic"
    entries: dict[tuple[int, int], float] = {}
    parts: dict[tuple[int, int], tuple[AxisPartition, AxisPartition]] = {}
    for swap in (False, True):
        u, v = (sample.ys, sample.xs) if swap else (sample.xs, sample.ys)
        ivals, xcuts, ycuts = _engine.orientation(
            u, v, budget, int(config.clump_factor), refine,
            int(config.refine_max_iters), float(config.refine_tolerance), g, spf)
        for r in range(2, ivals.shape[0]):
            for c in range(2, ivals.shape[1]):
                if ivals[r, c] < 0:
                    continue
                score = min(float(ivals[r, c]) / math.log2(min(r, c)), 1.0)
                key = (r, c) if swap else (c, r)
                if key in entries and score <= entries[key]:
                    continue
                col_part = AxisPartition(tuple(int(p) for p in xcuts[r, c]
                                               if p >= 0))
                row_part = _rank_cuts(ycuts[r, c], v)
                entries[key] = score
                parts[key] = ((row_part, col_part) if swap
                              else (col_part, row_part))
    return CharacteristicMatrix(entries, parts, method)


def characteristic_matrix_baseline(sample: PairedSample,
                                   config: MicConfig | None = None
                                   ) -> CharacteristicMatrix:
    """Equipartition-then-optimise scores for every grid with ``x*y <= B(n)``.

    Both axis roles are evaluated and the larger score is kept, so the matrix
    of the swapped sample is the transpose of this one.  A constant axis
    yields an empty matrix.
    """
    return _build(sample, config or MicConfig(), "baseline")


def characteristic_matrix_refined(sample: PairedSample,
                                  config: MicConfig | None = None
                                  ) -> CharacteristicMatrix:
    """Baseline matrix with every row improved by boundary refinement."""
    return _build(sample, config or MicConfig(), "iamic")


def _result(matrix: CharacteristicMatrix) -> MicResult:
    key = matrix.argmax()
    if key is None:
        return MicResult(0.0, None, None, matrix.method, degenerate=True)
    return MicResult(matrix.entries[key], key, matrix.partitions.get(key),
                     matrix.method)


def approx_mic(sample: PairedSample, config: MicConfig | None = None) -> MicResult:
    return _result(characteristic_matrix_baseline(sample, config))


def iamic(sample: PairedSample, config: MicConfig | None = None) -> MicResult:
    return _result(characteristic_matrix_refined(sample, config))


def mic_score(xs, ys, config: MicConfig | None = None, refine: bool = True) -> float:
    """Bare MIC value of two sequences without building result objects.

    Agrees bit-for-bit with ``iamic(...).mic`` (or ``approx_mic`` when
    ``refine`` is false); constant input scores 0.
    """
    config = config or MicConfig()
    sample = PairedSample(xs, ys)
    return float(_engine.mic_value(
        sample.xs, sample.ys, float(config.alpha), int(config.clump_factor),
        bool(refine), int(config.refine_max_iters),
        float(config.refine_tolerance)))


def permuted_mic_scores(xs, ys, perms: np.ndarray,
                        config: MicConfig | None = None,
                        refine: bool = True) -> np.ndarray:
    """MIC of ``(xs, ys[p])`` for every row ``p`` of ``perms``."""
    config = config or MicConfig()
    sample = PairedSample(xs, ys)
    return _engine.permuted_mic_values(
        sample.xs, sample.ys, np.ascontiguousarray(perms, dtype=np.int64),
        float(config.alpha), int(config.clump_factor), bool(refine),
        int(config.refine_max_iters), float(config.refine_tolerance))


def count_permutations_reaching(xs, ys, perms: np.ndarray, threshold: float,
                                config: MicConfig | None = None,
                                refine: bool = True,
                                stop_at_hits: int | None = None) -> int:
    """Number of rows ``p`` of ``perms`` with ``MIC(xs, ys[p]) >= threshold``.

    Equal to ``(permuted_mic_scores(...) >= threshold).sum()`` but each
    permutation stops as soon as some grid reaches the threshold.  With
    ``stop_at_hits`` the count is capped there and the remaining
    permutations are skipped.
    """
    config = config or MicConfig()
    sample = PairedSample(xs, ys)
    return int(_engine.permutation_hits(
        sample.xs, sample.ys, np.ascontiguousarray(perms, dtype=np.int64),
        float(threshold), float(config.alpha), int(config.clump_factor),
        bool(refine), int(config.refine_max_iters),
        float(config.refine_tolerance),
        -1 if stop_at_hits is None else int(stop_at_hits)))
