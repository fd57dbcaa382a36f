"""
The sampler for any irreducible chain.

Blocks are ``2n`` steps long. For each block a fresh vector of offsets
``U_0, ..., U_n`` is drawn uniformly from ``1..n``, and the events of the
restricted sampler are checked at those offsets into the block, which
samples transitions of the averaged chain instead of the chain itself.
"""
from math import factorial, prod
from typing import Sequence

import numpy as np

from .. import kernels
from ..arborescence import Arborescence, arborescence_from_edges, root_weights
from ..chain import StateVector, TransitionMatrix, ValidationReport, averaged_matrix
from ..ensemble import EnsembleSource, initial_states
from ..rng import RngStream
from ..sampler import (
    BlockWindow, BudgetExhausted, EventTrace, Observer, OffsetVector, Sampler,
    SampleResult, UnsuitableChain, WindowError, block_chunks, check_permutation,
)


def detect_general(
        window: BlockWindow | Sequence[StateVector], u: OffsetVector
) -> tuple[Arborescence | None, EventTrace]:
    """
    Check the events for the block held in ``window``, which must span the
    ``2n + 1`` times from ``t - 2n`` to ``t``.
    """
    n = u.n
    if len(window) < 2 * n + 1:
        raise WindowError(f'window holds {len(window)} vectors, need {2 * n + 1}')
    x = list(window)[-(2 * n + 1):]
    for vector in x:
        if len(vector) != n:
            raise WindowError(f'vector {vector} does not have {n} states')
    a = all(state == 1 for state in x[0])
    b = x[u[0]][0] == 1
    root = x[u[0] + u[1]][0]
    c = check_permutation([root] + [x[u[l]][l - 1] for l in range(2, n + 1)], n)
    tree = None
    if c:
        edges = ((x[u[l]][l - 1], x[u[l] + 1][l - 1]) for l in range(2, n + 1))
        tree = arborescence_from_edges(n, root, edges)
    trace = EventTrace(a, b, c, tree is not None)
    return (tree if trace.success else None), trace


def run_general(
        src: EnsembleSource,
        rng: RngStream,
        max_blocks: int | None = None,
        observer: Observer | None = None,
) -> SampleResult:
    """
    Watch ``src`` in blocks of ``2n`` steps until a block succeeds.

    :raises BudgetExhausted: if ``max_blocks`` blocks fail.
    """
    first = src.next()
    n = len(first)
    window = BlockWindow(2 * n + 1)
    window.push(first)
    ones = (1,) * n
    blocks = a_blocks = 0
    while True:
        if max_blocks is not None and blocks >= max_blocks:
            raise BudgetExhausted(blocks, window.current_time, a_blocks)
        window.fill(src, 2 * n)
        blocks += 1
        # drawn every block, whether or not the block can succeed
        offsets = OffsetVector(rng.integers(1, n, n + 1))
        if observer is None and window.vectors[0] != ones:
            continue
        tree, trace = detect_general(window, offsets)
        if trace.a:
            a_blocks += 1
        if observer is not None:
            observer(window.current_time, trace)
        if tree is not None:
            return SampleResult(tree, window.current_time, blocks, a_blocks, offsets)


def simulate_general(
        P: TransitionMatrix,
        init: Sequence[int],
        source_rng: RngStream,
        rng: RngStream,
        max_blocks: int | None = None,
) -> SampleResult:
    """
    What :func:`run_general` returns when watching
    ``make_ensemble_source(P, init, source_rng)``, with the copies stepped
    and the events checked in compiled code. Offsets are taken from
    ``rng`` exactly as :func:`run_general` takes them.

    :raises BudgetExhausted: if ``max_blocks`` blocks fail.
    """
    n = P.n
    span = 2 * n
    current = np.array(initial_states(P, init), dtype=np.int64)
    cumulative, last_positive = kernels.tables(P)
    parents = np.zeros(n, dtype=np.int64)
    blocks = a_blocks = 0
    for count in block_chunks(max_blocks):
        uniforms = source_rng.uniforms(count * span * n).reshape(count * span, n)
        offsets = rng.integer_array(1, n, count * (n + 1)).reshape(count, n + 1)
        examined, hits, root = kernels.scan_general(
            cumulative, last_positive, current, uniforms, offsets, parents
        )
        blocks += examined
        a_blocks += hits
        if root:
            tree = Arborescence(int(root), tuple(int(p) for p in parents))
            u = OffsetVector(tuple(int(v) for v in offsets[examined - 1]))
            return SampleResult(tree, span * blocks, blocks, a_blocks, u)
    raise BudgetExhausted(blocks, span * blocks, a_blocks)


def general_success_probability(P: TransitionMatrix) -> float:
    """
    ``(n-1)! * q_11 * (product of q_1j) * w``, where ``q`` is the averaged
    matrix and ``w`` is the total arborescence weight of ``P``.
    """
    first_row = averaged_matrix(P).entries[0]
    return float(
        factorial(P.n - 1) * first_row[0] * prod(first_row) * root_weights(P).sum()
    )


class GeneralSampler(Sampler):
    """
    Exact, interruptible tree sampling for any irreducible chain.
    Termination is only assured for aperiodic chains unless
    ``allow_periodic`` is set.
    """

    mode = 'general'

    def __init__(self, max_blocks: int | None = None, allow_periodic: bool = False):
        super().__init__(max_blocks)
        self.allow_periodic = allow_periodic

    def check(self, report: ValidationReport) -> None:
        if not (report.aperiodic or self.allow_periodic):
            raise UnsuitableChain(
                f'chain has period {report.period}, so the copies may never all meet '
                f'in state 1 at the start of a block; use --allow-periodic to run anyway'
            )

    def run(
            self,
            source: EnsembleSource,
            rng: RngStream,
            observer: Observer | None = None,
    ) -> SampleResult:
        return run_general(source, rng, self.max_blocks, observer)

    def simulate(
            self,
            P: TransitionMatrix,
            init: Sequence[int],
            source_rng: RngStream,
            rng: RngStream,
    ) -> SampleResult:
        return simulate_general(P, init, source_rng, rng, self.max_blocks)

    def success_probability(self, P: TransitionMatrix) -> float:
        return general_success_probability(P)
