import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import rankdata

from micnet.similarity import (MeasureKind, UndefinedScoreError, cosine, jaccard,
                               pearson, score, spearman)

vectors = st.integers(2, 25).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 9), min_size=n, max_size=n),
    st.lists(st.integers(0, 9), min_size=n, max_size=n)))


@pytest.mark.parametrize("fn, a, b, expected", [
    (pearson, (1, 2, 3), (2, 4, 6), 1.0),
    (pearson, (1, 2, 3), (3, 2, 1), -1.0),
    (pearson, (1, 2, 3, 4), (1, 3, 2, 4), 0.8),
    (spearman, (1, 5, 9), (0.1, 0.2, 7.0), 1.0),
    (spearman, (1, 2, 3), (9, 5, 1), -1.0),
    (spearman, (1, 2, 2, 4), (10, 20, 20, 40), 1.0),
    (jaccard, (2, 0, 1), (5, 0, 3), 1.0),
    (jaccard, (1, 0, 0), (0, 4, 0), 0.0),
    (jaccard, (1, 1, 0), (1, 0, 0), 0.5),
    (cosine, (1, 2), (2, 4), 1.0),
    (cosine, (1, 0), (0, 3), 0.0),
    (cosine, (1, 1), (1, 0), 1 / math.sqrt(2)),
])
def test_examples(fn, a, b, expected):
    assert fn(a, b) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("kind, a, b, expected", [
    ("pearson", (1, 2, 3), (2, 4, 6), 1.0),
    ("iamic", np.arange(10), np.arange(10), 1.0),
    ("approx_mic", np.arange(10), np.arange(10), 1.0),
    ("jaccard", (1, 1, 0), (1, 0, 0), 0.5),
])
def test_score_dispatch(kind, a, b, expected):
    assert score(kind, a, b) == pytest.approx(expected)


def test_measure_tags():
    assert {m.value for m in MeasureKind} == {
        "iamic", "approx_mic", "pearson", "spearman", "jaccard", "cosine"}
    with pytest.raises(ValueError):
        MeasureKind("kendall")


@pytest.mark.parametrize("fn, a, b", [
    (pearson, (1, 1, 1), (1, 2, 3)),
    (spearman, (1, 2, 3), (4, 4, 4)),
    (jaccard, (0, 0), (0, 0)),
    (cosine, (0, 0), (1, 2)),
])
def test_undefined_signals(fn, a, b):
    with pytest.raises(UndefinedScoreError):
        fn(a, b)


@pytest.mark.parametrize("fn", [pearson, spearman, jaccard, cosine])
def test_length_mismatch(fn):
    with pytest.raises(ValueError):
        fn((1, 2, 3), (1, 2))


def test_mic_constant_is_zero_not_undefined():
    assert score("iamic", (1, 2, 3, 4), (5, 5, 5, 5)) == 0.0


@settings(max_examples=150, deadline=None)
@given(vectors, st.sampled_from(list(MeasureKind)))
def test_symmetry_and_range(pair, kind):
    a, b = pair
    try:
        ab = score(kind, a, b)
    except UndefinedScoreError:
        with pytest.raises(UndefinedScoreError):
            score(kind, b, a)
        return
    assert ab == score(kind, b, a)
    lo = -1.0 if kind.signed else 0.0
    assert lo <= ab <= 1.0


@settings(max_examples=150, deadline=None)
@given(vectors)
def test_spearman_is_pearson_of_ranks(pair):
    a, b = pair
    try:
        want = pearson(rankdata(a), rankdata(b))
    except UndefinedScoreError:
        return
    assert spearman(a, b) == want


@settings(max_examples=100, deadline=None)
@given(vectors, st.floats(0.1, 10), st.floats(-5, 5))
def test_pearson_affine_invariance(pair, scale, shift):
    a, b = (np.array(v, dtype=float) for v in pair)
    try:
        r = pearson(a, b)
    except UndefinedScoreError:
        return
    assert pearson(a * scale + shift, b) == pytest.approx(r, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(vectors)
def test_monotone_invariance(pair):
    a, b = (np.array(v, dtype=float) for v in pair)
    for kind in (MeasureKind.IAMIC, MeasureKind.APPROX_MIC):
        assert score(kind, a, b) == score(kind, np.exp(a), b**3)
    try:
        r = spearman(a, b)
    except UndefinedScoreError:
        return
    assert spearman(np.exp(a), b**3) == r
