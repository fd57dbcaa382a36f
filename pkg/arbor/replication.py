import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from .chain import Distribution, StateError, StateVector, TransitionMatrix
from .rng import RngStream
from .sampler import BudgetExhausted, Sampler, SampleResult

logger = logging.getLogger(__name__)

# Replications handed to the worker threads at a time.
BATCH = 256


@dataclass(frozen=True, eq=False)
class InitPolicy:
    """
    How the copies of the chain are started for each replication:
    all in state 1, at a fixed vector, or each drawn independently from a
    distribution (uniform if none is given).
    """
    kind: str = 'all-ones'
    vector: tuple[int, ...] | None = None
    distribution: Distribution | None = None

    @classmethod
    def all_ones(cls) -> 'InitPolicy':
        return cls('all-ones')

    @classmethod
    def fixed(cls, vector: Sequence[int]) -> 'InitPolicy':
        return cls('fixed', tuple(vector))

    @classmethod
    def random(cls, distribution: Distribution | None = None) -> 'InitPolicy':
        return cls('random', distribution=distribution)

    def initial(self, n: int, rng: RngStream) -> StateVector:
        if self.kind == 'all-ones':
            return (1,) * n
        if self.kind == 'fixed':
            assert self.vector is not None, 'fixed policy needs a vector'
            if len(self.vector) != n:
                raise StateError(f'initial vector {self.vector} does not have {n} states')
            return self.vector
        if self.kind == 'random':
            probs = np.full(n, 1 / n) if self.distribution is None else self.distribution.probs
            return rng.choice(probs, n)
        raise StateError(f'unknown initial policy {self.kind!r}')


@dataclass(frozen=True)
class Replication:
    """
    The outcome of one replication: a sample, or a censored run.
    """
    index: int
    result: SampleResult | None
    censored_at: BudgetExhausted | None = None

    @property
    def censored(self) -> bool:
        return self.result is None

    @property
    def tau(self) -> int:
        if self.result is not None:
            return self.result.tau
        assert self.censored_at is not None
        return self.censored_at.tau

    @property
    def a_blocks(self) -> int:
        if self.result is not None:
            return self.result.a_blocks
        assert self.censored_at is not None
        return self.censored_at.a_blocks

    def as_dict(self) -> dict[str, Any]:
        if self.result is not None:
            return self.result.as_dict()
        assert self.censored_at is not None
        return {
            'tau': self.censored_at.tau,
            'root': None,
            'tree': None,
            'blocks': self.censored_at.blocks_examined,
            'censored': True,
            'offsets': None,
        }


def run_replication(
        sampler: Sampler, P: TransitionMatrix, init: InitPolicy, seed: int, index: int
) -> Replication:
    """
    Run one replication, with every random choice made from streams
    derived from ``seed`` and ``index``.
    """
    stream = RngStream(seed, index)
    initial = init.initial(P.n, stream.substream(0))
    try:
        result = sampler.simulate(P, initial, stream.substream(1), stream.substream(2))
    except BudgetExhausted as e:
        logger.debug('replication %s censored: %s', index, e)
        return Replication(index, None, e)
    return Replication(index, result)


def iter_replications(
        sampler: Sampler,
        P: TransitionMatrix,
        init: InitPolicy,
        count: int,
        seed: int,
        threads: int = 1,
) -> Iterator[Replication]:
    """
    Yield ``count`` independent replications in index order.
    The results do not depend on ``threads``.
    """
    def run(index: int) -> Replication:
        return run_replication(sampler, P, init, seed, index)

    if threads == 1:
        yield from map(run, range(count))
        return
    indices = iter(range(count))
    with ThreadPoolExecutor(max_workers=threads) as executor:
        while batch := list(islice(indices, BATCH * threads)):
            yield from executor.map(run, batch)


def replicate(
        sampler: Sampler,
        P: TransitionMatrix,
        init: InitPolicy,
        count: int,
        seed: int,
        threads: int = 1,
) -> list[Replication]:
    if count < 1:
        raise ValueError(f'count must be at least 1, got {count}')
    replications = list(iter_replications(sampler, P, init, count, seed, threads))
    censored = sum(r.censored for r in replications)
    logger.info('%s replications, %s censored', count, censored)
    return replications


def samples(replications: Iterable[Replication]) -> list[SampleResult]:
    """
    The samples from the uncensored replications.
    """
    return [r.result for r in replications if r.result is not None]
