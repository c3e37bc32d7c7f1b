"""Pairwise similarity measures used to score annotation profiles."""

from __future__ import annotations

import math
from enum import Enum

import numpy as np
from scipy.stats import rankdata

from .mic import MicConfig, mic_score


class UndefinedScoreError(ValueError):
    """The measure has no value for these inputs (e.g. a constant vector)."""


class MeasureKind(str, Enum):
    IAMIC = "iamic"
    APPROX_MIC = "approx_mic"
    PEARSON = "pearson"
    SPEARMAN = "spearman"
    JACCARD = "jaccard"
    COSINE = "cosine"

    @property
    def signed(self) -> bool:
        return self in (MeasureKind.PEARSON, MeasureKind.SPEARMAN)

    @property
    def is_mic(self) -> bool:
        return self in (MeasureKind.IAMIC, MeasureKind.APPROX_MIC)


def _pair(a, b, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < min_len:
        raise ValueError(f"need at least {min_len} values, got {x.size}")
    return x, y


def pearson(a, b) -> float:
    x, y = _pair(a, b, 2)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedScoreError("correlation undefined for a constant vector")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def spearman(a, b) -> float:
    """Pearson correlation of average ranks (ties share the mean rank)."""
    x, y = _pair(a, b, 2)
    return pearson(rankdata(x), rankdata(y))


def jaccard(a, b) -> float:
    """|A & B| / |A | B| of the supports ``{i : v_i > 0}``."""
    x, y = _pair(a, b, 1)
    sa, sb = x > 0, y > 0
    union = int(np.count_nonzero(sa | sb))
    if union == 0:
        raise UndefinedScoreError("jaccard undefined: both supports empty")
    return np.count_nonzero(sa & sb) / union


def cosine(a, b) -> float:
    x, y = _pair(a, b, 1)
    nx = math.sqrt(float(np.dot(x, x)))
    ny = math.sqrt(float(np.dot(y, y)))
    if nx == 0.0 or ny == 0.0:
        raise UndefinedScoreError("cosine undefined for a zero vector")
    c = min(1.0, max(-1.0, float(np.dot(x, y)) / (nx * ny)))
    if (x >= 0).all() and (y >= 0).all():
        c = max(0.0, c)
    return c


def score(kind: MeasureKind | str, a, b, config: MicConfig | None = None) -> float:
    """Evaluate the named measure on two equal-length sequences."""
    kind = MeasureKind(kind)
    if kind is MeasureKind.PEARSON:
        return pearson(a, b)
    if kind is MeasureKind.SPEARMAN:
        return spearman(a, b)
    if kind is MeasureKind.JACCARD:
        return jaccard(a, b)
    if kind is MeasureKind.COSINE:
        return cosine(a, b)
    return mic_score(a, b, config, refine=kind is MeasureKind.IAMIC)
