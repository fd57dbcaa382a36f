"""
Chi-square tests for checking sampler output against exact distributions.
"""
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.special
import scipy.stats
from numpy.typing import ArrayLike, NDArray

from .arborescence import canonical_encode
from .replication import Replication
from .sampler import SampleResult

#: Smallest expected count allowed in any cell of a chi-square test.
MIN_EXPECTED = 5

#: Significance levels reported by every :class:`TestReport`.
REPORTED_LEVELS = (0.05, 0.01, 0.001)

EXPECTATION_TOLERANCE = 1e-9

#: The category that small cells are merged into.
OTHER = 'other'


class EmptySample(ValueError):
    """
    There was nothing to count.
    """


class MissingExpectation(ValueError):
    """
    An observed category has no expected probability.
    """


class CellMergeRequired(ValueError):
    """
    A cell has an expected count too small for the chi-square approximation.
    """


class ZeroMarginal(ValueError):
    """
    A contingency table has a row or column with no counts.
    """


@dataclass(frozen=True)
class FrequencyTable:
    counts: Mapping[Hashable, int]

    @property
    def categories(self) -> list[Hashable]:
        return list(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, category: Hashable) -> int:
        return self.counts.get(category, 0)

    def frequencies(self) -> dict[Hashable, float]:
        total = self.total
        return {category: count / total for category, count in self.counts.items()}


def chi2_sf(statistic: float, dof: int) -> float:
    """
    The upper tail probability of the chi-square distribution, via the
    regularized upper incomplete gamma function.
    """
    if statistic <= 0:
        return 1.0
    return float(scipy.special.gammaincc(dof / 2, statistic / 2))


@dataclass(frozen=True)
class TestReport:

    __test__ = False

    statistic: float
    dof: int
    p_value: float
    reject_at: tuple[tuple[float, bool], ...] = field(default=())

    @classmethod
    def from_statistic(cls, statistic: float, dof: int) -> 'TestReport':
        p_value = chi2_sf(statistic, dof)
        return cls(
            statistic, dof, p_value,
            tuple((level, p_value < level) for level in REPORTED_LEVELS),
        )

    def rejects(self, significance: float) -> bool:
        return self.p_value < significance

    def as_dict(self) -> dict[str, Any]:
        return {'stat': self.statistic, 'dof': self.dof, 'p': self.p_value}


def _key(result: SampleResult, key: str) -> Hashable:
    if key == 'root':
        return result.root
    if key == 'tree':
        return canonical_encode(result.tree)
    raise ValueError(f'unknown key {key!r}, use root or tree')


def tally(
        results: Iterable[SampleResult | Replication],
        key: str = 'root',
        categories: Iterable[Hashable] = (),
) -> FrequencyTable:
    """
    Count the samples by ``key``, which is either ``root`` or ``tree``.
    Censored replications are skipped. Any ``categories`` supplied are
    included even if no sample falls in them.
    """
    counts: dict[Hashable, int] = {category: 0 for category in categories}
    for item in results:
        result = item.result if isinstance(item, Replication) else item
        if result is None:
            continue
        category = _key(result, key)
        counts[category] = counts.get(category, 0) + 1
    table = FrequencyTable(counts)
    if not table.total:
        raise EmptySample('no uncensored samples to count')
    return table


def merge_small_cells(
        observed: FrequencyTable,
        expected: Mapping[Hashable, float],
        min_expected: float = MIN_EXPECTED,
) -> tuple[FrequencyTable, dict[Hashable, float]]:
    """
    Merge the rarest categories into a single :data:`OTHER` cell until every
    cell's expected count is at least ``min_expected``.
    """
    total = observed.total
    order = sorted(expected, key=lambda category: expected[category])
    merged: list[Hashable] = []
    other = 0.0
    while order and (
            total * expected[order[0]] < min_expected
            or (merged and total * other < min_expected)
    ):
        category = order.pop(0)
        merged.append(category)
        other += expected[category]
    if not merged:
        return observed, dict(expected)
    kept = [category for category in expected if category not in set(merged)]
    counts = {category: observed[category] for category in kept}
    counts[OTHER] = sum(observed[category] for category in merged)
    probabilities = {category: expected[category] for category in kept}
    probabilities[OTHER] = other
    return FrequencyTable(counts), probabilities


def chi_square_gof(
        observed: FrequencyTable,
        expected: Mapping[Hashable, float],
        min_expected: float = MIN_EXPECTED,
        merge: bool = False,
) -> TestReport:
    """
    Pearson's goodness-of-fit test of ``observed`` against the ``expected``
    probabilities. With ``merge``, small cells are merged using
    :func:`merge_small_cells` instead of raising :class:`CellMergeRequired`.
    """
    mass = sum(expected.values())
    if abs(mass - 1) > EXPECTATION_TOLERANCE:
        raise ValueError(f'expected probabilities sum to {mass!r}')
    for category, count in observed.counts.items():
        if count and not expected.get(category):
            raise MissingExpectation(f'{category!r} observed but has no expected probability')
    if merge:
        observed, expected = merge_small_cells(observed, expected, min_expected)
    categories = list(expected)
    if len(categories) < 2:
        raise CellMergeRequired(f'only {len(categories)} cell(s), nothing to test')
    total = observed.total
    o = np.array([observed[c] for c in categories], dtype=float)
    e = total * np.array([expected[c] for c in categories])
    if np.any(e < min_expected):
        smallest = categories[int(np.argmin(e))]
        raise CellMergeRequired(
            f'expected count {e.min():.3g} for {smallest!r} is below {min_expected}'
        )
    statistic = float(np.sum((o - e) ** 2 / e))
    return TestReport.from_statistic(statistic, len(categories) - 1)


def chi_square_independence(
        table: ArrayLike, min_expected: float = MIN_EXPECTED
) -> TestReport:
    """
    Pearson's test of independence of the rows and columns of a
    contingency table.
    """
    counts = np.asarray(table, dtype=float)
    if counts.ndim != 2:
        raise ValueError(f'need a 2-D table, got shape {counts.shape}')
    if np.any(counts.sum(axis=0) == 0) or np.any(counts.sum(axis=1) == 0):
        raise ZeroMarginal(f'table has an empty row or column:\n{counts}')
    statistic, _, dof, expected = scipy.stats.chi2_contingency(counts, correction=False)
    if np.any(expected < min_expected):
        raise CellMergeRequired(f'expected count {expected.min():.3g} is below {min_expected}')
    return TestReport.from_statistic(max(float(statistic), 0.0), int(dof))


def tau_buckets(taus: Sequence[int], buckets: int = 4) -> NDArray[np.int64]:
    """
    Assign each stopping time to a quantile bucket, numbered from 0.
    Buckets left empty by ties are merged away.
    """
    values = np.asarray(taus)
    if not len(values):
        raise EmptySample('no stopping times to bucket')
    edges = np.unique(np.quantile(values, np.linspace(0, 1, buckets + 1)[1:-1]))
    labels = np.searchsorted(edges, values, side='left')
    _, dense = np.unique(labels, return_inverse=True)
    return dense.astype(np.int64)


def contingency(
        rows: Sequence[Hashable], columns: Sequence[Hashable]
) -> tuple[NDArray[np.int64], list[Hashable], list[Hashable]]:
    """
    Cross-tabulate paired labels.
    """
    row_labels = sorted(set(rows), key=str)
    column_labels = sorted(set(columns), key=str)
    row_index = {label: i for i, label in enumerate(row_labels)}
    column_index = {label: i for i, label in enumerate(column_labels)}
    table = np.zeros((len(row_labels), len(column_labels)), dtype=np.int64)
    for row, column in zip(rows, columns):
        table[row_index[row], column_index[column]] += 1
    return table, row_labels, column_labels


def merge_sparse_columns(
        table: NDArray[np.int64], min_expected: float = MIN_EXPECTED
) -> NDArray[np.int64]:
    """
    Merge the smallest columns of ``table`` together until every expected
    count is at least ``min_expected``, or only two columns remain.
    """
    merged = np.asarray(table)
    while merged.shape[1] > 2:
        expected = np.outer(merged.sum(axis=1), merged.sum(axis=0)) / merged.sum()
        if expected.min() >= min_expected:
            break
        order = np.argsort(merged.sum(axis=0), kind='stable')
        smallest, next_smallest = order[0], order[1]
        combined = merged[:, smallest] + merged[:, next_smallest]
        keep = [i for i in range(merged.shape[1]) if i not in (smallest, next_smallest)]
        merged = np.column_stack([merged[:, keep], combined])
    return merged
