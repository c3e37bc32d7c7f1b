"""From an annotation table to a significance-filtered association network.

table -> type-value transactions -> co-occurrence support matrix ->
pairwise association scores with permutation p-values -> edge list.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .mic import MicConfig, count_permutations_reaching
from .similarity import MeasureKind, UndefinedScoreError, score

log = logging.getLogger(__name__)


class TableParseError(ValueError):
    pass


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    min_frequency: int = 6
    p_threshold: float = 0.05
    n_permutations: int = 1000
    rng_seed: int = 0
    multivalue_delimiter: str | None = None
    measure: MeasureKind = MeasureKind.IAMIC
    # None: sniff tab vs comma from the header line
    delimiter: str | None = None
    # drop positions i and j from both profiles when scoring pair (i, j)
    exclude_pair_positions: bool = False
    # worker threads for pair scoring; results never depend on it
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "measure", MeasureKind(self.measure))
        if not 0.0 < self.p_threshold <= 1.0:
            raise ValueError(f"p_threshold must lie in (0, 1], got {self.p_threshold}")
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be at least 1")
        if self.min_frequency < 0:
            raise ValueError("min_frequency must be nonnegative")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be at least 1")


# ------------------------------------------------------------------ table


@dataclass(frozen=True)
class RecordTable:
    id_column: str
    columns: tuple[str, ...]
    rows: tuple[tuple[str, tuple[str, ...]], ...]

    def __len__(self):
        return len(self.rows)


def _sniff(header: str) -> str:
    return "\t" if "\t" in header else ","


def parse_table(text: str | Iterable[str], config: PipelineConfig | None = None
                ) -> RecordTable:
    """Parse a delimited table whose first column holds unique record ids."""
    config = config or PipelineConfig()
    if not isinstance(text, str):
        text = "".join(text)
    lines = text.splitlines()
    while lines and not lines[0].strip():
        lines.pop(0)
    if not lines:
        raise TableParseError("input is empty: a header line is required")
    delim = config.delimiter or _sniff(lines[0])
    reader = csv.reader(io.StringIO(text.lstrip("\r\n")), delimiter=delim)
    header = [h.strip() for h in next(reader)]
    if len(header) < 1 or not header[0]:
        raise TableParseError("line 1: header must start with the id column")
    width = len(header)
    rows, seen = [], set()
    for lineno, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != width:
            raise TableParseError(
                f"line {lineno}: expected {width} fields, found {len(cells)}")
        cells = [c.strip() for c in cells]
        rid = cells[0]
        if rid in seen:
            raise TableParseError(f"line {lineno}: duplicate record id {rid!r}")
        seen.add(rid)
        rows.append((rid, tuple(cells[1:])))
    return RecordTable(header[0], tuple(header[1:]), tuple(rows))


# ------------------------------------------------------------ transactions


@dataclass(frozen=True, order=True)
class Annotation:
    type_name: str
    value: str

    def __post_init__(self):
        if not self.type_name or not self.value:
            raise ValueError("annotation type and value must be non-empty")

    @property
    def canonical(self) -> str:
        return f"{self.type_name}: {self.value}"

    @classmethod
    def parse(cls, text: str) -> "Annotation":
        type_name, sep, value = text.partition(": ")
        if not sep:
            raise ValueError(f"not a 'type: value' annotation: {text!r}")
        return cls(type_name, value)

    def __str__(self):
        return self.canonical


@dataclass(frozen=True)
class Transaction:
    record_id: str
    annotations: tuple[Annotation, ...]  # column order, duplicates removed


def to_transactions(table: RecordTable, config: PipelineConfig | None = None
                    ) -> list[Transaction]:
    config = config or PipelineConfig()
    delim = config.multivalue_delimiter
    out = []
    for rid, cells in table.rows:
        anns: dict[Annotation, None] = {}
        for column, cell in zip(table.columns, cells):
            values = cell.split(delim) if delim else [cell]
            for value in values:
                value = value.strip()
                if value:
                    anns[Annotation(column, value)] = None
        out.append(Transaction(rid, tuple(anns)))
    return out


# ---------------------------------------------------------- support matrix


@dataclass(frozen=True)
class SupportMatrix:
    index: tuple[Annotation, ...]
    counts: np.ndarray

    def __len__(self):
        return len(self.index)

    @property
    def frequencies(self) -> np.ndarray:
        return np.diag(self.counts).copy()

    def to_text(self, delimiter: str = "\t") -> str:
        return _square_to_text(self.index, self.counts, delimiter, True)

    @classmethod
    def from_text(cls, text: str) -> "SupportMatrix":
        index, values = _square_from_text(text)
        return cls(index, np.rint(values).astype(np.int64))


def build_support_matrix(transactions: Sequence[Transaction]) -> SupportMatrix:
    """Co-occurrence counts of every annotation pair; diagonal = frequency.

    Annotations are indexed by the first appearance of their type, then by
    their own first appearance, which keeps the values of one table column
    together.
    """
    type_rank: dict[str, int] = {}
    first_seen: dict[Annotation, int] = {}
    for tx in transactions:
        for ann in tx.annotations:
            type_rank.setdefault(ann.type_name, len(type_rank))
            first_seen.setdefault(ann, len(first_seen))
    index = tuple(sorted(first_seen,
                         key=lambda a: (type_rank[a.type_name], first_seen[a])))
    pos = {a: i for i, a in enumerate(index)}
    incidence = np.zeros((len(transactions), len(index)), dtype=np.int64)
    for r, tx in enumerate(transactions):
        for ann in tx.annotations:
            incidence[r, pos[ann]] = 1
    return SupportMatrix(index, incidence.T @ incidence)


def filter_by_frequency(matrix: SupportMatrix, min_frequency: int) -> SupportMatrix:
    """Keep annotations seen in strictly more than ``min_frequency`` records."""
    keep = np.flatnonzero(matrix.frequencies > min_frequency)
    return SupportMatrix(tuple(matrix.index[i] for i in keep),
                         matrix.counts[np.ix_(keep, keep)])


# ------------------------------------------------------- association matrix


@dataclass(frozen=True)
class AssociationMatrix:
    """Symmetric pair scores; NaN marks the diagonal and undefined pairs."""

    index: tuple[Annotation, ...]
    scores: np.ndarray
    pvalues: np.ndarray
    measure: MeasureKind
    frequencies: np.ndarray = field(repr=False, default=None)

    def to_text(self, delimiter: str = "\t") -> str:
        return _square_to_text(self.index, self.scores, delimiter, False)


def pair_profiles(support: SupportMatrix, i: int, j: int,
                  exclude_pair_positions: bool = False):
    a = support.counts[i].astype(np.float64)
    b = support.counts[j].astype(np.float64)
    if exclude_pair_positions:
        keep = np.ones(a.size, dtype=bool)
        keep[[i, j]] = False
        a, b = a[keep], b[keep]
    return a, b


def _pair_seed(seed: int, i: int, j: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(i), int(j)])


def _hits_exceeding(p_stop: float, n_permutations: int) -> int:
    # fewest hits whose add-one p-value is already above p_stop
    h = max(int(p_stop * (1 + n_permutations)) - 2, 0)
    while (1 + h) / (1 + n_permutations) <= p_stop:
        h += 1
    return h


def permutation_pvalue(a, b, measure: MeasureKind | str, n_permutations: int,
                       seed, mic_config: MicConfig | None = None,
                       p_stop: float | None = None) -> float:
    """Add-one permutation p-value of ``|score(a, b)|``.

    ``b`` is shuffled ``n_permutations`` times; a permuted score counts as
    extreme when its absolute value reaches the observed one (within 1e-12,
    so that numerically tied scores are not lost to rounding).

    Parameters
    ----------
    p_stop : float, optional
        For MIC measures, stop permuting once the p-value is certain to
        exceed ``p_stop``.  The value returned then is a lower bound that is
        itself above ``p_stop``; p-values at or below it are always exact.
    """
    measure = MeasureKind(measure)
    observed = abs(score(measure, a, b, mic_config))
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    rng = np.random.default_rng(seed)
    perms = rng.permuted(np.tile(np.arange(b.size), (n_permutations, 1)), axis=1)
    threshold = observed - 1e-12
    if measure.is_mic:
        # MIC is nonnegative, so only whether each null reaches it matters
        cap = None if p_stop is None else _hits_exceeding(p_stop, n_permutations)
        hits = count_permutations_reaching(a, b, perms, threshold, mic_config,
                                           refine=measure is MeasureKind.IAMIC,
                                           stop_at_hits=cap)
    else:
        null = np.empty(n_permutations)
        for k, p in enumerate(perms):
            try:
                null[k] = score(measure, a, b[p])
            except UndefinedScoreError:
                null[k] = 0.0
        hits = int(np.count_nonzero(np.abs(null) >= threshold))
    return (1 + hits) / (1 + n_permutations)


def association_matrix(support: SupportMatrix, measure: MeasureKind | str,
                       config: PipelineConfig | None = None,
                       mic_config: MicConfig | None = None,
                       with_pvalues: bool = True,
                       p_stop: float | None = None) -> AssociationMatrix:
    """Score every unordered annotation pair from its two support rows.

    ``p_stop`` is handed to :func:`permutation_pvalue`: p-values above it may
    come back as lower bounds, which is all an edge threshold needs.
    """
    config = config or PipelineConfig()
    measure = MeasureKind(measure)
    m = len(support)
    scores = np.full((m, m), np.nan)
    pvals = np.full((m, m), np.nan)
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]

    def work(pair):
        i, j = pair
        a, b = pair_profiles(support, i, j, config.exclude_pair_positions)
        try:
            s = score(measure, a, b, mic_config)
        except (UndefinedScoreError, ValueError):
            return None, None
        p = None
        if with_pvalues:
            p = permutation_pvalue(a, b, measure, config.n_permutations,
                                   _pair_seed(config.rng_seed, i, j), mic_config,
                                   p_stop)
        return s, p

    if config.n_jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(p) for p in pairs]
    for (i, j), (s, p) in zip(pairs, results):
        if s is None:
            continue
        scores[i, j] = scores[j, i] = s
        if p is not None:
            pvals[i, j] = pvals[j, i] = p
    undefined = sum(s is None for s, _ in results)
    if undefined:
        log.info("%d of %d pairs have no %s score", undefined, len(pairs),
                 measure.value)
    return AssociationMatrix(support.index, scores, pvals, measure,
                             support.frequencies)


# ---------------------------------------------------------------- edges


@dataclass(frozen=True)
class Edge:
    source: Annotation
    target: Annotation
    score: float
    p_value: float


@dataclass(frozen=True)
class Node:
    annotation: Annotation
    frequency: int

    @property
    def type_name(self) -> str:
        return self.annotation.type_name


@dataclass(frozen=True)
class EdgeList:
    edges: tuple[Edge, ...]
    nodes: tuple[Node, ...]
    measure: MeasureKind

    def __len__(self):
        return len(self.edges)


def significant_edges(assoc: AssociationMatrix, p_threshold: float) -> EdgeList:
    """Pairs with ``p <= p_threshold``, highest score first, then by name.

    Add-one p-values are never 0, so a threshold of 0 yields no edges while a
    threshold of 1 keeps every scored pair.
    """
    m = len(assoc.index)
    edges = []
    for i in range(m):
        for j in range(i + 1, m):
            p = assoc.pvalues[i, j]
            if np.isnan(p) or np.isnan(assoc.scores[i, j]) or p > p_threshold:
                continue
            edges.append(Edge(assoc.index[i], assoc.index[j],
                              float(assoc.scores[i, j]), float(p)))
    edges.sort(key=lambda e: (-e.score, e.source.canonical, e.target.canonical))
    freqs = assoc.frequencies if assoc.frequencies is not None else np.zeros(m)
    nodes = tuple(Node(a, int(f)) for a, f in zip(assoc.index, freqs))
    return EdgeList(tuple(edges), nodes, assoc.measure)


def run_pipeline(text: str, config: PipelineConfig | None = None,
                 mic_config: MicConfig | None = None
                 ) -> tuple[SupportMatrix, AssociationMatrix, EdgeList]:
    config = config or PipelineConfig()
    mic_config = mic_config or MicConfig()
    stage = "parse"
    try:
        table = parse_table(text, config)
        stage = "transactions"
        transactions = to_transactions(table, config)
        stage = "support"
        support = filter_by_frequency(build_support_matrix(transactions),
                                      config.min_frequency)
        log.info("%d records, %d annotations retained", len(table), len(support))
        stage = "association"
        assoc = association_matrix(support, config.measure, config, mic_config,
                                   p_stop=config.p_threshold)
        stage = "edges"
        edges = significant_edges(assoc, config.p_threshold)
    except (ValueError, TableParseError) as exc:
        raise PipelineError(stage, exc) from exc
    return support, assoc, edges


# ------------------------------------------------------------ square dumps


def _square_to_text(index, values, delimiter, integer: bool) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["annotation", *(a.canonical for a in index)])
    for ann, row in zip(index, values):
        if integer:
            cells = [str(int(v)) for v in row]
        else:
            cells = ["" if np.isnan(v) else f"{v:.6g}" for v in row]
        writer.writerow([ann.canonical, *cells])
    return buf.getvalue()


def _square_from_text(text: str):
    delim = _sniff(text.splitlines()[0])
    rows = list(csv.reader(io.StringIO(text), delimiter=delim))
    index = tuple(Annotation.parse(h) for h in rows[0][1:])
    values = np.array([[float(c) if c != "" else np.nan for c in r[1:]]
                       for r in rows[1:] if r], dtype=np.float64)
    if values.size == 0:
        values = values.reshape(0, 0)
    return index, values


def read_association_text(text: str) -> tuple[tuple[Annotation, ...], np.ndarray]:
    """Parse an association matrix dump back into ``(index, scores)``."""
    return _square_from_text(text)
