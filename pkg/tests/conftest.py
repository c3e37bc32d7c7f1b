from pathlib import Path

import numpy as np
import pytest

GOLDEN = Path(__file__).parent / "golden"

FIGURE_TABLE = """\
ID\tSuper-kingdom\tGroup\tGram-stain\tShape
1\tBacteria\tFirmicutes\t+\tCocci
2\tBacteria\tFirmicutes\t-\tRod
3\tBacteria\tAlphaproteobacteria\t-\tRod
4\tBacteria\tBetaproteobacteria\t-\tRod
5\tBacteria\tOther_Bacteria\t-\tSpiral
"""

# co-occurrence counts of the ten annotations above, in index order
FIGURE_SUPPORT = np.array([
    [5, 2, 1, 1, 1, 1, 4, 1, 3, 1],
    [2, 2, 0, 0, 0, 1, 1, 1, 1, 0],
    [1, 0, 1, 0, 0, 0, 1, 0, 1, 0],
    [1, 0, 0, 1, 0, 0, 1, 0, 1, 0],
    [1, 0, 0, 0, 1, 0, 1, 0, 0, 1],
    [1, 1, 0, 0, 0, 1, 0, 1, 0, 0],
    [4, 1, 1, 1, 1, 0, 4, 0, 3, 1],
    [1, 1, 0, 0, 0, 1, 0, 1, 0, 0],
    [3, 1, 1, 1, 0, 0, 3, 0, 3, 0],
    [1, 0, 0, 0, 1, 0, 1, 0, 0, 1],
])

# association scores printed for the same ten annotations (diagonal unset)
FIGURE_ASSOCIATION = np.array([
    [np.nan, 0.42, 0.56, 0.56, 0.32, 0.14, 0.88, 0.14, 0.88, 0.32],
    [0.42, np.nan, 0.05, 0.05, 0.02, 0.42, 0.28, 0.42, 0.28, 0.02],
    [0.56, 0.05, np.nan, 0.26, 0.02, 0.05, 0.56, 0.05, 0.56, 0.02],
    [0.56, 0.05, 0.26, np.nan, 0.02, 0.05, 0.56, 0.05, 0.56, 0.02],
    [0.32, 0.02, 0.02, 0.02, np.nan, 0.05, 0.32, 0.05, 0.09, 0.97],
    [0.14, 0.42, 0.05, 0.05, 0.05, np.nan, 0.32, 0.97, 0.02, 0.05],
    [0.88, 0.28, 0.56, 0.56, 0.32, 0.32, np.nan, 0.32, 0.88, 0.32],
    [0.14, 0.42, 0.05, 0.05, 0.05, 0.97, 0.32, np.nan, 0.02, 0.05],
    [0.88, 0.28, 0.56, 0.56, 0.09, 0.02, 0.88, 0.02, np.nan, 0.09],
    [0.32, 0.02, 0.02, 0.02, 0.97, 0.05, 0.32, 0.05, 0.09, np.nan],
])

FIGURE_INDEX = (
    "Super-kingdom: Bacteria", "Group: Firmicutes",
    "Group: Alphaproteobacteria", "Group: Betaproteobacteria",
    "Group: Other_Bacteria", "Gram-stain: +", "Gram-stain: -",
    "Shape: Cocci", "Shape: Rod", "Shape: Spiral",
)


@pytest.fixture
def figure_table() -> str:
    return FIGURE_TABLE


@pytest.fixture(scope="session")
def default_bench_report():
    """The default equitability grid (about a minute); shared by every test."""
    from micnet.bench import equitability_report
    return equitability_report()


def monotone_sample(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.uniform(0, 1, n))
    return xs, np.exp(3 * xs)


def exhaustive_x_axis(sample, y_part, max_x, clumps):
    """Best MI over every subset of clump boundaries, for x = 2..max_x."""
    from itertools import combinations

    from micnet.mic import AxisPartition, mutual_information
    rows = y_part.assign(sample.ys)
    cands = clumps.boundaries
    out = []
    for x in range(2, max_x + 1):
        best = 0.0
        for cut in combinations(cands, min(x - 1, len(cands))):
            cols = AxisPartition(cut).assign(sample.xs)
            table = np.zeros((len(cut) + 1, y_part.bins), dtype=np.int64)
            np.add.at(table, (cols, rows), 1)
            best = max(best, mutual_information(table))
        # fewer columns than x are admissible too
        out.append(max([best, *out[-1:]]))
    return np.array(out)


# (criterion number, line) pairs, printed after the run
ACCEPTANCE: list[tuple[int, str]] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> bool:
    verdict = "PASS" if passed else "FAIL"
    ACCEPTANCE.append((number, f"criterion {number:>2}: {verdict}  {title}  ({detail})"))
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE, key=lambda item: item[0]):
            terminalreporter.write_line(line)
