"""Samples, axis partitions and cell counting on rank-based grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _engine


class InvalidPartitionError(ValueError):
    """A partition does not fit the sample it is applied to."""


class DegenerateAxisError(ValueError):
    """An axis has a single distinct value, so no two-bin split exists."""


@dataclass(frozen=True)
class MicConfig:
    """Tuning knobs shared by every MIC estimator.

    ``alpha`` sets the grid budget ``B(n) = max(n**alpha, 4)``; ``clump_factor``
    caps the candidate column boundaries at ``clump_factor * x``.
    """

    alpha: float = 0.6
    clump_factor: int = 15
    refine_max_iters: int = 20
    refine_tolerance: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.clump_factor < 1:
            raise ValueError("clump_factor must be a positive integer")
        if self.refine_max_iters < 1:
            raise ValueError("refine_max_iters must be a positive integer")
        if self.refine_tolerance < 0:
            raise ValueError("refine_tolerance must be nonnegative")

    def budget(self, n: int) -> float:
        return float(_engine.grid_budget(n, float(self.alpha)))


@dataclass(frozen=True)
class PairedSample:
    xs: np.ndarray
    ys: np.ndarray

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        x = np.ascontiguousarray(xs, dtype=np.float64).ravel()
        y = np.ascontiguousarray(ys, dtype=np.float64).ravel()
        if x.shape != y.shape:
            raise ValueError(f"length mismatch: {x.size} xs vs {y.size} ys")
        if x.size < 2:
            raise ValueError("a paired sample needs at least 2 points")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("sample values must be finite")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "xs", x)
        object.__setattr__(self, "ys", y)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    def swapped(self) -> "PairedSample":
        return PairedSample(self.ys, self.xs)


@dataclass(frozen=True)
class AxisPartition:
    """Cuts expressed as rank positions.

    A cut at ``k`` puts the ``k`` lowest-ranked points below it.
    """

    boundaries: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        b = tuple(int(v) for v in self.boundaries)
        if any(hi <= lo for lo, hi in zip(b, b[1:])):
            raise InvalidPartitionError(f"boundaries must increase strictly: {b}")
        object.__setattr__(self, "boundaries", b)

    @property
    def bins(self) -> int:
        return len(self.boundaries) + 1

    def validate(self, values: np.ndarray) -> None:
        """Raise unless every cut lies in ``[1, n-1]`` and separates distinct values."""
        n = values.size
        ordered = np.sort(values)
        for k in self.boundaries:
            if not 1 <= k <= n - 1:
                raise InvalidPartitionError(f"cut {k} outside [1, {n - 1}]")
            if ordered[k - 1] == ordered[k]:
                raise InvalidPartitionError(
                    f"cut {k} splits tied value {ordered[k]!r}")

    def assign(self, values: np.ndarray) -> np.ndarray:
        """Bin index of every value."""
        self.validate(values)
        ordered = np.sort(values)
        thresholds = ordered[np.asarray(self.boundaries, dtype=np.int64) - 1]
        return np.searchsorted(thresholds, values, side="left")


@dataclass(frozen=True)
class CellCounts:
    counts: np.ndarray  # x_bins x y_bins
    total: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@lru_cache(maxsize=64)
def _prime_table(n: int) -> np.ndarray:
    return _engine.smallest_prime_factors(n)


def cell_counts(sample: PairedSample, x_part: AxisPartition,
                y_part: AxisPartition) -> CellCounts:
    cols = x_part.assign(sample.xs)
    rows = y_part.assign(sample.ys)
    counts = np.zeros((x_part.bins, y_part.bins), dtype=np.int64)
    np.add.at(counts, (cols, rows), 1)
    return CellCounts(counts, sample.n)


def mutual_information(counts: CellCounts | np.ndarray) -> float:
    """Mutual information of a contingency table, in bits.

    Empty cells contribute nothing.  The value is rounded canonically, so two
    tables with equal mutual information give the identical float.
    """
    table = counts.counts if isinstance(counts, CellCounts) else counts
    table = np.ascontiguousarray(table, dtype=np.int64)
    if table.ndim != 2:
        raise ValueError("counts must be a 2-D table")
    if (table < 0).any():
        raise ValueError("counts must be nonnegative")
    total = int(table.sum())
    if total < 1:
        raise ValueError("counts must hold at least one point")
    return float(_engine.mi_exact(table, _prime_table(total)))


def _codes(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, inverse, counts = np.unique(values, return_inverse=True,
                                      return_counts=True)
    return inverse.astype(np.int64), counts.astype(np.int64)


def _code_cuts_to_ranks(cuts: np.ndarray, counts: np.ndarray) -> AxisPartition:
    cum = np.cumsum(counts)
    return AxisPartition(tuple(int(cum[c - 1]) for c in cuts))


def equipartition_axis(values: Sequence[float], k: int) -> AxisPartition:
    """Split ``values`` into at most ``k`` bins of near-equal occupancy.

    Equal values always share a bin; a tie block stays in the current bin
    only when that brings the bin strictly closer to its target size.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if k < 1:
        raise ValueError("k must be at least 1")
    if v.size < k:
        raise ValueError(f"cannot split {v.size} values into {k} bins")
    _, counts = _codes(v)
    if k >= 2 and counts.size == 1:
        raise DegenerateAxisError("all values are identical")
    return _code_cuts_to_ranks(_engine.equip_cuts(counts, k), counts)


def _xorder(sample: PairedSample, y_part: AxisPartition):
    order = np.argsort(sample.xs, kind="mergesort")
    xs = sample.xs[order]
    ugrp = np.concatenate(([0], np.cumsum(xs[1:] != xs[:-1]))).astype(np.int64)
    rows = y_part.assign(sample.ys)[order].astype(np.int64)
    return ugrp, rows


def get_clumps(sample: PairedSample, y_part: AxisPartition,
               max_clumps: int) -> AxisPartition:
    """Candidate column boundaries (x-rank positions) for a fixed row partition.

    Runs of x-consecutive points in the same row form a clump; a block of tied
    x values spread over several rows is a clump by itself.  More than
    ``max_clumps`` clumps are merged into near-equal superclumps.
    """
    if max_clumps < 1:
        raise ValueError("max_clumps must be positive")
    ugrp, rows = _xorder(sample, y_part)
    bounds = _engine.candidate_bounds(ugrp, rows, int(max_clumps))
    return AxisPartition(tuple(int(b) for b in bounds[1:-1]))


def optimize_x_axis(sample: PairedSample, y_part: AxisPartition, max_x: int,
                    clumps: AxisPartition | None = None,
                    config: MicConfig | None = None) -> np.ndarray:
    """Maximal mutual information over column partitions for x = 2..max_x.

    Column cuts are drawn from ``clumps`` (computed with the configured cap when
    omitted).  Entry ``i`` of the result is I* for ``x = i + 2`` columns.
    """
    if max_x < 2:
        raise ValueError("max_x must be at least 2")
    if y_part.bins < 2:
        raise DegenerateAxisError("row partition has a single bin")
    config = config or MicConfig()
    if clumps is None:
        clumps = get_clumps(sample, y_part, config.clump_factor * max_x)
    clumps.validate(sample.xs)
    ugrp, rows = _xorder(sample, y_part)
    bounds = np.array((0, *clumps.boundaries, sample.n), dtype=np.int64)
    exact, _, _ = _engine.exact_row(rows, y_part.bins, bounds, int(max_x),
                                 _engine.plogp_table(sample.n),
                                 _prime_table(sample.n))
    return exact[2:].copy()
