"""Equitability and generality benchmark on noisy synthetic relationships.

Each cell of the (kind, noise, seed) grid draws ``x ~ U[0, 1]`` and
``y = f(x) + N(0, noise^2)`` and scores the pair with every requested
measure.  Cells are then grouped by the R^2 of the noiseless generator in
buckets of width 0.05, and each measure's spread across kinds inside a bucket
is recorded.  An equitable measure gives similar scores to relationships of
equal R^2 whatever their shape, so its spreads are small.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mic import MicConfig, PairedSample
from .similarity import MeasureKind, UndefinedScoreError, score

KINDS = ("linear", "quadratic", "cubic", "sinusoidal", "exponential", "circle")
FUNCTIONAL_KINDS = KINDS[:-1]
DEFAULT_NOISE_GRID = tuple(round(0.1 * k, 1) for k in range(1, 11))
DEFAULT_MEASURES = (MeasureKind.APPROX_MIC, MeasureKind.IAMIC, MeasureKind.PEARSON)
BUCKET_WIDTH = 0.05


class NotFunctionalError(ValueError):
    """R^2 against a generating function was requested for the circle kind."""


def _cubic(x):
    t = 2.0 * x - 1.0
    return 4.0 * t**3 - 3.0 * t


_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda x: x,
    "quadratic": lambda x: 4.0 * (x - 0.5) ** 2,
    "cubic": _cubic,
    "sinusoidal": lambda x: np.sin(6.0 * np.pi * x),
    "exponential": lambda x: (np.exp2(5.0 * x) - 1.0) / 31.0,
}


def generator(kind: str) -> Callable[[np.ndarray], np.ndarray]:
    """Noiseless generating function of a functional kind."""
    if kind == "circle":
        raise NotFunctionalError("circle is not a function of x")
    try:
        return _FUNCTIONS[kind]
    except KeyError:
        raise ValueError(f"unknown relationship kind {kind!r}; "
                         f"expected one of {', '.join(KINDS)}") from None


@dataclass(frozen=True)
class RelationshipSpec:
    kind: str
    n: int
    noise_level: float
    seed: int | Sequence[int] = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown relationship kind {self.kind!r}")
        if self.n < 10:
            raise ValueError(f"n must be at least 10, got {self.n}")
        if not self.noise_level >= 0:
            raise ValueError(f"noise_level must be nonnegative, got {self.noise_level}")


def generate_relationship(spec: RelationshipSpec) -> PairedSample:
    """Draw a seeded sample of the requested relationship.

    The circle kind places points at uniform angles on the unit circle and
    adds the noise to both coordinates; every other kind adds it to y only.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "circle":
        theta = rng.uniform(0.0, 2.0 * np.pi, spec.n)
        xs = np.cos(theta) + rng.normal(0.0, spec.noise_level, spec.n)
        ys = np.sin(theta) + rng.normal(0.0, spec.noise_level, spec.n)
        return PairedSample(xs, ys)
    xs = rng.uniform(0.0, 1.0, spec.n)
    ys = generator(spec.kind)(xs) + rng.normal(0.0, spec.noise_level, spec.n)
    return PairedSample(xs, ys)


def r_squared(sample: PairedSample, kind: str | Callable) -> float:
    """``1 - SS_res / SS_tot`` of ``ys`` against the noiseless generator.

    Clipped to ``[0, 1]``; a constant ``ys`` explained exactly gives 1.
    """
    f = generator(kind) if isinstance(kind, str) else kind
    fitted = np.asarray(f(sample.xs), dtype=np.float64)
    ss_res = float(np.sum((sample.ys - fitted) ** 2))
    ss_tot = float(np.sum((sample.ys - sample.ys.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return min(1.0, max(0.0, 1.0 - ss_res / ss_tot))


@dataclass(frozen=True)
class BenchRow:
    kind: str
    noise_level: float
    seed: int
    r_squared: float           # NaN for circle
    scores: dict[str, float]   # NaN where the measure is undefined


@dataclass
class BenchReport:
    measures: tuple[str, ...]
    rows: list[BenchRow]
    spread: dict[str, dict[float, float]] = field(default_factory=dict)
    matched: tuple[float, ...] = ()   # buckets populated by two or more kinds

    def summary(self) -> dict[str, object]:
        """Bucket counts where each MIC-family spread beats the Pearson^2 spread."""
        base = self.spread.get("pearson_sq", {})
        out: dict[str, object] = {"matched_buckets": len(self.matched)}
        if not base:
            return out
        for m in self.measures:
            if not MeasureKind(m).is_mic:
                continue
            wins = sum(self.spread[m][b] < base[b] for b in self.matched)
            out[f"{m}_wins"] = wins
            out[f"{m}_majority"] = wins > len(self.matched) / 2
        return out

    def to_text(self) -> str:
        cols = list(self.measures) + (["pearson_sq"] if "pearson" in self.measures else [])
        buf = io.StringIO()
        buf.write("\t".join(["kind", "noise", "seed", "r_squared", *cols]) + "\n")
        for r in self.rows:
            vals = [r.scores[c] for c in cols]
            buf.write("\t".join([r.kind, f"{r.noise_level:g}", str(r.seed),
                                 _fmt(r.r_squared), *map(_fmt, vals)]) + "\n")
        buf.write("\n# spread per r_squared bucket (lower edge)\n")
        spread_cols = sorted(self.spread)
        buf.write("\t".join(["bucket", *spread_cols]) + "\n")
        buckets = sorted({b for s in self.spread.values() for b in s})
        for b in buckets:
            buf.write("\t".join([f"{b:.2f}", *(_fmt(self.spread[c].get(b, math.nan))
                                               for c in spread_cols)]) + "\n")
        buf.write("\n# summary\n")
        for k, v in self.summary().items():
            buf.write(f"{k}\t{v}\n")
        return buf.getvalue()


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.6f}"


def _bucket(r2: float) -> float:
    return round(min(math.floor(r2 / BUCKET_WIDTH), round(1 / BUCKET_WIDTH) - 1)
                 * BUCKET_WIDTH, 2)


def _safe_score(kind: MeasureKind, sample: PairedSample, config: MicConfig) -> float:
    try:
        return score(kind, sample.xs, sample.ys, config)
    except UndefinedScoreError:
        return math.nan


def equitability_report(kinds: Sequence[str] = KINDS,
                        noise_grid: Sequence[float] = DEFAULT_NOISE_GRID,
                        measures: Sequence[MeasureKind | str] = DEFAULT_MEASURES,
                        n: int = 300, seeds: int = 10, seed: int = 0,
                        config: MicConfig | None = None) -> BenchReport:
    """Score the full ``kinds x noise_grid x seeds`` cross product.

    Cell ``(kind, noise, s)`` is drawn from ``SeedSequence([seed, kind index,
    round(noise * 1e6), s])`` so each cell is reproducible in isolation.
    Pearson is additionally reported squared (``pearson_sq``).  The spread of
    a measure in an R^2 bucket is the max minus min of its per-kind mean
    score, so a bucket reached by a single kind has spread 0.  Only buckets
    reached by two or more kinds count as matched in the summary.
    """
    if not kinds or not noise_grid or not measures or seeds < 1:
        raise ValueError("kinds, noise_grid, measures and seeds must be non-empty")
    config = config or MicConfig()
    measures = tuple(MeasureKind(m) for m in measures)
    rows: list[BenchRow] = []
    for kind in kinds:
        k_idx = KINDS.index(kind)
        for noise in noise_grid:
            for s in range(seeds):
                ss = np.random.SeedSequence([seed, k_idx, int(round(noise * 1e6)), s])
                sample = generate_relationship(RelationshipSpec(kind, n, noise, ss))
                r2 = math.nan if kind == "circle" else r_squared(sample, kind)
                scores = {m.value: _safe_score(m, sample, config) for m in measures}
                if "pearson" in scores:
                    scores["pearson_sq"] = scores["pearson"] ** 2
                rows.append(BenchRow(kind, float(noise), s, r2, scores))

    names = [m.value for m in measures] + (["pearson_sq"] if MeasureKind.PEARSON in measures else [])
    groups: dict[float, dict[str, list[BenchRow]]] = {}
    for r in rows:
        if not math.isnan(r.r_squared):
            groups.setdefault(_bucket(r.r_squared), {}).setdefault(r.kind, []).append(r)
    spread: dict[str, dict[float, float]] = {m: {} for m in names}
    for b, by_kind in sorted(groups.items()):
        for m in names:
            means = [np.nanmean([r.scores[m] for r in rs]) for rs in by_kind.values()]
            spread[m][b] = float(np.nanmax(means) - np.nanmin(means))
    matched = tuple(b for b, by_kind in sorted(groups.items()) if len(by_kind) > 1)
    return BenchReport(tuple(m.value for m in measures), rows, spread, matched)


def synthetic_annotation_table(n_records: int = 200, n_types: int = 8,
                               n_values: int = 5, seed: int = 0) -> str:
    """Tab-separated annotation table with planted dependence between columns.

    Each record draws a latent class; every column copies it (mod
    ``n_values``) with probability 0.6 and otherwise picks uniformly.  With the
    defaults every one of the 40 annotations is frequent.
    """
    rng = np.random.default_rng(seed)
    latent = rng.integers(0, n_values, n_records)
    names = [f"T{t}" for t in range(n_types)]
    lines = ["\t".join(["id", *names])]
    for r in range(n_records):
        cells = []
        for t in range(n_types):
            v = (latent[r] + t) % n_values if rng.random() < 0.6 else rng.integers(n_values)
            cells.append(f"v{v}")
        lines.append("\t".join([f"r{r:04d}", *cells]))
    return "\n".join(lines) + "\n"
