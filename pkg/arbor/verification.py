"""
Acceptance suites that check, statistically, that a sampler is exact,
interruptible and terminating on a particular chain.
"""
import logging
from abc import ABC
from dataclasses import dataclass
from functools import cached_property
from math import sqrt
from typing import Any, Sequence

from .arborescence import (
    ENUMERATION_CAP, CapacityError, TreeDistribution, tree_distribution, tree_theorem_stationary,
)
from .chain import Distribution, TransitionMatrix, stationary_solve
from .config import DEFAULT_SIGNIFICANCE
from .replication import InitPolicy, Replication, replicate
from .sampler import Sampler
from .samplers.restricted import RestrictedSampler, enumerate_block_success
from .stats import (
    TestReport, chi_square_gof, chi_square_independence, contingency,
    merge_sparse_columns, tally, tau_buckets,
)

logger = logging.getLogger(__name__)

#: Largest chain for which block success is cross-checked by enumeration.
BLOCK_ENUMERATION_CAP = 4

#: Half-width, in standard deviations, of the band around the exact block success rate.
SIGMAS = 3.0

ORACLE_TOLERANCE = 1e-10
BLOCK_TOLERANCE = 1e-12


class NameConflict(Exception):
    """
    A suite name conflicts with a suite already in the verification.
    """


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    report: TestReport | None = None
    #: Set when the suite could not be run at all, as opposed to failing.
    error: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            'suite': self.name,
            'passed': self.passed,
            'p': self.report.p_value if self.report is not None else None,
            'detail': self.detail,
            'error': self.error,
        }


class Evidence:
    """
    The replications of a sampler on a chain, and the exact quantities
    they are checked against.
    """

    def __init__(
            self,
            P: TransitionMatrix,
            sampler: Sampler,
            replications: Sequence[Replication],
            significance: float = DEFAULT_SIGNIFICANCE,
    ):
        self.P = P
        self.sampler = sampler
        self.replications = replications
        self.significance = significance

    @cached_property
    def distribution(self) -> TreeDistribution:
        return tree_distribution(self.P)

    @cached_property
    def stationary(self) -> Distribution:
        return stationary_solve(self.P)

    @property
    def uncensored(self) -> list[Replication]:
        return [r for r in self.replications if not r.censored]


class Suite(ABC):
    """
    One acceptance check.
    """

    #: The name of this suite
    name: str | None = None

    def check(self, evidence: Evidence) -> SuiteResult:
        raise NotImplementedError

    def result(
            self, passed: bool, detail: str, report: TestReport | None = None
    ) -> SuiteResult:
        assert self.name is not None, 'suite not named'
        return SuiteResult(self.name, passed, detail, report)

    def __repr__(self) -> str:
        return f'<{type(self).__qualname__}: {self.name}>'


class TreeExactness(Suite):

    name = 'exactness-trees'

    def check(self, evidence: Evidence) -> SuiteResult:
        expected = evidence.distribution.probabilities()
        observed = tally(evidence.replications, 'tree', expected)
        report = chi_square_gof(observed, expected, merge=True)
        return self.result(
            not report.rejects(evidence.significance),
            f'{observed.total} trees, {len(expected)} possible',
            report,
        )


class RootExactness(Suite):

    name = 'exactness-roots'

    def check(self, evidence: Evidence) -> SuiteResult:
        expected = evidence.stationary.as_mapping()
        observed = tally(evidence.replications, 'root', expected)
        report = chi_square_gof(observed, expected, merge=True)
        return self.result(
            not report.rejects(evidence.significance), f'{observed.total} roots', report
        )


class Interruptibility(Suite):
    """
    The stopping time should be independent of the sampled root.
    """

    name = 'interruptibility'

    def check(self, evidence: Evidence) -> SuiteResult:
        samples = [r.result for r in evidence.uncensored if r.result is not None]
        if not samples:
            return self.result(True, 'no uncensored runs, nothing to test')
        buckets = tau_buckets([s.tau for s in samples])
        table, _, _ = contingency(list(buckets), [s.root for s in samples])
        table = merge_sparse_columns(table)
        if min(table.shape) < 2:
            return self.result(True, f'{table.shape} table, nothing to test')
        report = chi_square_independence(table)
        return self.result(
            not report.rejects(evidence.significance),
            f'{table.shape[0]} tau buckets x {table.shape[1]} root columns',
            report,
        )


class BlockSuccess(Suite):
    """
    Blocks that start with every copy in state 1 should succeed at the
    exact rate for the chain.
    """

    name = 'block-success'

    def check(self, evidence: Evidence) -> SuiteResult:
        q = evidence.sampler.success_probability(evidence.P)
        if isinstance(evidence.sampler, RestrictedSampler) \
                and evidence.P.n <= BLOCK_ENUMERATION_CAP:
            enumerated = enumerate_block_success(evidence.P)
            if abs(enumerated - q) > BLOCK_TOLERANCE:
                return self.result(False, f'formula q={q!r}, enumeration q={enumerated!r}')
        trials = sum(r.a_blocks for r in evidence.replications)
        successes = len(evidence.uncensored)
        if not trials:
            return self.result(False, 'no blocks started with every copy in state 1')
        sigma = sqrt(trials * q * (1 - q))
        deviation = abs(successes - trials * q) / sigma if sigma else float(successes != trials)
        return self.result(
            deviation <= SIGMAS,
            f'{successes}/{trials} = {successes / trials:.5f}, q = {q:.5f}, '
            f'{deviation:.2f} sigma',
        )


class Termination(Suite):

    name = 'termination'

    def check(self, evidence: Evidence) -> SuiteResult:
        censored = sum(r.censored for r in evidence.replications)
        return self.result(
            not censored, f'{censored} of {len(evidence.replications)} runs censored'
        )


class DualOracle(Suite):
    """
    The tree theorem and a linear solve should give the same stationary
    distribution.
    """

    name = 'dual-oracle'

    def check(self, evidence: Evidence) -> SuiteResult:
        discrepancy = tree_theorem_stationary(evidence.P).distance(evidence.stationary)
        return self.result(
            discrepancy < ORACLE_TOLERANCE, f'discrepancy {discrepancy:.3g}'
        )


class Verification:
    """
    A named collection of suites, run together against the same evidence.
    """

    def __init__(self, *suites: Suite):
        self._suites: dict[str, Suite] = {}
        for suite in suites:
            self.add(suite)

    def add(self, suite: Suite, name: str | None = None) -> Suite:
        name = name or suite.name or type(suite).__qualname__
        if name in self._suites:
            raise NameConflict(name)
        suite.name = name
        self._suites[name] = suite
        return suite

    @property
    def names(self) -> list[str]:
        return list(self._suites)

    def run(self, evidence: Evidence) -> list[SuiteResult]:
        results = []
        for name, suite in self._suites.items():
            try:
                result = suite.check(evidence)
            except Exception as e:
                logger.exception('suite %s could not be run', name)
                result = SuiteResult(name, False, 'could not be run', error=repr(e))
            logger.info('%s: %s', name, 'pass' if result.passed else 'FAIL')
            results.append(result)
        return results


def default_suites() -> Verification:
    return Verification(
        TreeExactness(),
        RootExactness(),
        Interruptibility(),
        BlockSuccess(),
        Termination(),
        DualOracle(),
    )


def verify(
        P: TransitionMatrix,
        sampler: Sampler,
        count: int,
        seed: int,
        init: InitPolicy = InitPolicy.all_ones(),
        significance: float = DEFAULT_SIGNIFICANCE,
        threads: int = 1,
        verification: Verification | None = None,
) -> list[SuiteResult]:
    """
    Replicate ``sampler`` on ``P`` and run the acceptance suites over the
    results.
    """
    if P.n > ENUMERATION_CAP:
        raise CapacityError(P.n, ENUMERATION_CAP)
    replications = replicate(sampler, P, init, count, seed, threads)
    evidence = Evidence(P, sampler, replications, significance)
    return (verification or default_suites()).run(evidence)
