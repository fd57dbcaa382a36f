from abc import ABC
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Sequence

from .arborescence import Arborescence, canonical_encode
from .chain import StateVector, TransitionMatrix, ValidationReport
from .ensemble import EnsembleSource, make_ensemble_source
from .rng import RngStream

#: Called with the time ``t`` and events of every block a sampler examines.
Observer = Callable[[int, 'EventTrace'], None]

# Blocks simulated by the first call into a compiled kernel, doubling up to
# the second figure on later calls.
FIRST_CHUNK = 64
LARGEST_CHUNK = 4096


class BudgetExhausted(Exception):
    """
    A sampler examined its maximum number of blocks without success.
    The run is censored: it has no sample, and that is not an error in the
    sampler.
    """

    def __init__(self, blocks_examined: int, tau: int, a_blocks: int = 0):
        self.blocks_examined = blocks_examined
        self.tau = tau
        self.a_blocks = a_blocks

    def __str__(self) -> str:
        return f'no success in {self.blocks_examined} blocks, t={self.tau}'


class WindowError(Exception):
    """
    A window of state vectors was too short for the events being checked.
    """


class UnsuitableChain(Exception):
    """
    A sampler cannot be used with a chain, or makes no termination guarantee
    for it.
    """


@dataclass(frozen=True)
class EventTrace:
    """
    Which of the events ``A``, ``B``, ``C`` and ``D`` held for one block.
    """
    a: bool
    b: bool
    c: bool
    d: bool

    @property
    def success(self) -> bool:
        return self.a and self.b and self.c and self.d


@dataclass(frozen=True)
class OffsetVector:
    """
    The time offsets ``U_0, ..., U_n`` drawn for one block in general mode.
    """
    u: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.u) - 1
        if n < 1:
            raise WindowError(f'need at least 2 offsets, got {len(self.u)}')
        for value in self.u:
            if not 1 <= value <= n:
                raise WindowError(f'offset {value} outside 1..{n}')

    @property
    def n(self) -> int:
        return len(self.u) - 1

    def __getitem__(self, index: int) -> int:
        return self.u[index]


@dataclass(frozen=True)
class SampleResult:
    tree: Arborescence
    #: The stopping time.
    tau: int
    blocks_examined: int
    #: Examined blocks in which event ``A`` held.
    a_blocks: int = 0
    offsets: OffsetVector | None = None

    @property
    def root(self) -> int:
        return self.tree.root

    def as_dict(self) -> dict[str, Any]:
        return {
            'tau': self.tau,
            'root': self.root,
            'tree': canonical_encode(self.tree),
            'blocks': self.blocks_examined,
            'censored': False,
            'offsets': list(self.offsets.u) if self.offsets is not None else None,
        }


class BlockWindow:
    """
    The most recent ``capacity`` state vectors seen by a sampler.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._vectors: deque[StateVector] = deque(maxlen=capacity)
        #: The time of the most recent vector, -1 before any have been pushed.
        self.current_time = -1

    def push(self, vector: StateVector) -> None:
        self._vectors.append(vector)
        self.current_time += 1

    def fill(self, source: EnsembleSource, count: int) -> None:
        for _ in range(count):
            self.push(source.next())

    @property
    def full(self) -> bool:
        return len(self._vectors) == self.capacity

    @property
    def vectors(self) -> Sequence[StateVector]:
        return self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def __iter__(self) -> Iterator[StateVector]:
        return iter(self._vectors)


def check_permutation(listed: Sequence[int], n: int) -> bool:
    return sorted(listed) == list(range(1, n + 1))


def block_chunks(
        max_blocks: int | None, first: int = FIRST_CHUNK, largest: int = LARGEST_CHUNK
) -> Iterator[int]:
    """
    Numbers of blocks to simulate at a time, doubling from ``first`` up to
    ``largest``, and adding up to no more than ``max_blocks``.
    """
    size = first
    total = 0
    while max_blocks is None or total < max_blocks:
        count = size if max_blocks is None else min(size, max_blocks - total)
        yield count
        total += count
        size = min(2 * size, largest)


class Sampler(ABC):
    """
    An interruptible exact sampler of the tree distribution, run over a
    passive :class:`~arbor.ensemble.EnsembleSource`.
    """

    #: The name used to select this sampler on the command line.
    mode: str

    def __init__(self, max_blocks: int | None = None):
        self.max_blocks = max_blocks

    def check(self, report: ValidationReport) -> None:
        """
        Raise :class:`UnsuitableChain` if this sampler should not be used
        on a chain with the supplied validation report.
        """

    def run(
            self,
            source: EnsembleSource,
            rng: RngStream,
            observer: Observer | None = None,
    ) -> SampleResult:
        """
        Watch ``source`` until a block succeeds and return the sampled tree.
        """
        raise NotImplementedError

    def simulate(
            self,
            P: TransitionMatrix,
            init: Sequence[int],
            source_rng: RngStream,
            rng: RngStream,
    ) -> SampleResult:
        """
        Run over copies of ``P`` started at ``init`` and simulated from
        ``source_rng``. The result is the one :meth:`run` gives over
        ``make_ensemble_source(P, init, source_rng)``, but implementations
        may get it without building the source.
        """
        return self.run(make_ensemble_source(P, init, source_rng), rng)

    def success_probability(self, P: TransitionMatrix) -> float:
        """
        The exact probability that a block in which event ``A`` holds succeeds.
        """
        raise NotImplementedError

    def __repr__(self) -> str:
        return f'<{type(self).__qualname__}: max_blocks={self.max_blocks}>'
