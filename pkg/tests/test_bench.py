import math

import numpy as np
import pytest
from conftest import GOLDEN

from micnet.bench import (DEFAULT_NOISE_GRID, FUNCTIONAL_KINDS, KINDS, NotFunctionalError,
                          RelationshipSpec, equitability_report, generate_relationship,
                          generator, r_squared, synthetic_annotation_table)
from micnet.mic import PairedSample


def test_linear_noiseless_is_collinear():
    s = generate_relationship(RelationshipSpec("linear", 50, 0.0, 1))
    assert np.array_equal(s.xs, s.ys)


@pytest.mark.parametrize("kind", KINDS)
def test_same_seed_same_sample(kind):
    spec = RelationshipSpec(kind, 40, 0.3, 9)
    a, b = generate_relationship(spec), generate_relationship(spec)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)


@pytest.mark.parametrize("kind", FUNCTIONAL_KINDS)
def test_noiseless_r_squared_is_one(kind):
    assert r_squared(generate_relationship(RelationshipSpec(kind, 100, 0.0, 2)), kind) == 1.0


def test_r_squared_matches_residual_formula():
    s = generate_relationship(RelationshipSpec("sinusoidal", 300, 0.1, 4))
    fitted = np.sin(6 * np.pi * s.xs)
    want = 1 - np.sum((s.ys - fitted) ** 2) / np.sum((s.ys - s.ys.mean()) ** 2)
    assert r_squared(s, "sinusoidal") == pytest.approx(want, abs=1e-12)
    assert 0.9 < want < 1.0


def test_r_squared_flat_generator_pure_noise():
    rng = np.random.default_rng(0)
    s = PairedSample(rng.uniform(size=500), rng.normal(size=500))
    assert r_squared(s, lambda x: np.zeros_like(x)) == pytest.approx(0.0, abs=0.01)


def test_circle_has_no_generator():
    with pytest.raises(NotFunctionalError):
        generator("circle")
    with pytest.raises(NotFunctionalError):
        r_squared(generate_relationship(RelationshipSpec("circle", 20, 0.1)), "circle")


def test_circle_lies_on_unit_circle_without_noise():
    s = generate_relationship(RelationshipSpec("circle", 30, 0.0, 5))
    assert np.allclose(s.xs**2 + s.ys**2, 1.0)


@pytest.mark.parametrize("kwargs", [dict(kind="spiral", n=20, noise_level=0),
                                    dict(kind="linear", n=5, noise_level=0),
                                    dict(kind="linear", n=20, noise_level=-1)])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        RelationshipSpec(**kwargs)


def test_single_cell_spread_is_zero():
    r = equitability_report(kinds=("quadratic",), noise_grid=(0.4,), seeds=1, n=60)
    assert len(r.rows) == 1
    assert all(v == 0.0 for s in r.spread.values() for v in s.values())
    assert r.matched == ()


def test_noiseless_generality():
    r = equitability_report(kinds=FUNCTIONAL_KINDS, noise_grid=(0.0,), seeds=1, n=300)
    for row in r.rows:
        assert row.scores["iamic"] == pytest.approx(1.0, abs=1e-6)
        assert row.scores["approx_mic"] == pytest.approx(1.0, abs=1e-6)
    assert r.spread["iamic"][0.95] == pytest.approx(0.0, abs=1e-6)
    assert r.spread["pearson_sq"][0.95] > 0.5


def test_report_is_deterministic():
    kw = dict(kinds=("linear", "cubic", "circle"), noise_grid=(0.2, 0.6), seeds=2, n=80)
    assert equitability_report(**kw).to_text() == equitability_report(**kw).to_text()


def test_cells_are_seeded_independently():
    one = equitability_report(kinds=("cubic",), noise_grid=(0.5,), seeds=2, n=80)
    many = equitability_report(kinds=("linear", "cubic"), noise_grid=(0.1, 0.5), seeds=2, n=80)
    want = [(r.kind, r.noise_level, r.seed, r.scores) for r in one.rows]
    got = [(r.kind, r.noise_level, r.seed, r.scores) for r in many.rows
           if r.kind == "cubic" and r.noise_level == 0.5]
    assert got == want


def test_default_report_shape(default_bench_report):
    r = default_bench_report
    assert len(r.rows) == len(KINDS) * len(DEFAULT_NOISE_GRID) * 10
    for row in r.rows:
        assert math.isnan(row.r_squared) == (row.kind == "circle")
        assert row.scores["pearson_sq"] == row.scores["pearson"] ** 2


def test_default_report_snapshot(default_bench_report):
    assert default_bench_report.to_text() == (GOLDEN / "bench_default.txt").read_text()


def test_synthetic_table_shape():
    text = synthetic_annotation_table()
    lines = text.splitlines()
    assert len(lines) == 201 and lines[0].split("\t") == ["id"] + [f"T{t}" for t in range(8)]
    values = {c for line in lines[1:] for c in line.split("\t")[1:]}
    assert values == {f"v{v}" for v in range(5)}
    assert synthetic_annotation_table() == text
