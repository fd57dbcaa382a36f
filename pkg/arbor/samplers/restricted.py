"""
The sampler for chains whose first row is strictly positive.

At every even time ``t`` it looks at the state vectors at ``t - 2``,
``t - 1`` and ``t``, and succeeds when:

- every copy was in state 1 at ``t - 2`` (event ``A``),
- copy 1 was still in state 1 at ``t - 1`` (event ``B``),
- copy 1 at ``t`` together with copies ``2..n`` at ``t - 1`` cover every
  state exactly once (event ``C``),
- the transitions made by copies ``2..n`` from ``t - 1`` to ``t`` form an
  arborescence rooted at copy 1's state at ``t`` (event ``D``).
"""
from itertools import product
from math import factorial, prod
from typing import Sequence

import numpy as np

from .. import kernels
from ..arborescence import Arborescence, arborescence_from_edges, root_weights
from ..chain import StateVector, TransitionMatrix, ValidationReport
from ..ensemble import EnsembleSource, initial_states
from ..rng import RngStream
from ..sampler import (
    BlockWindow, BudgetExhausted, EventTrace, Observer, Sampler, SampleResult,
    UnsuitableChain, WindowError, block_chunks, check_permutation,
)

WINDOW = 3


def detect_restricted(
        w2: StateVector, w1: StateVector, w0: StateVector
) -> tuple[Arborescence | None, EventTrace]:
    """
    Check the events for the block made up of the state vectors at times
    ``t - 2``, ``t - 1`` and ``t``.
    """
    n = len(w0)
    if len(w1) != n or len(w2) != n:
        raise WindowError(f'vectors of lengths {len(w2)}, {len(w1)}, {len(w0)}')
    a = all(state == 1 for state in w2)
    b = w1[0] == 1
    c = check_permutation((w0[0],) + w1[1:], n)
    tree = None
    if c:
        tree = arborescence_from_edges(n, w0[0], zip(w1[1:], w0[1:]))
    trace = EventTrace(a, b, c, tree is not None)
    return (tree if trace.success else None), trace


def run_restricted(
        src: EnsembleSource,
        max_blocks: int | None = None,
        observer: Observer | None = None,
) -> SampleResult:
    """
    Watch ``src`` at even times until a block succeeds.

    :raises BudgetExhausted: if ``max_blocks`` blocks fail.
    """
    window = BlockWindow(WINDOW)
    window.push(src.next())
    blocks = a_blocks = 0
    while True:
        if max_blocks is not None and blocks >= max_blocks:
            raise BudgetExhausted(blocks, window.current_time, a_blocks)
        window.fill(src, 2)
        blocks += 1
        w2, w1, w0 = window
        tree, trace = detect_restricted(w2, w1, w0)
        if trace.a:
            a_blocks += 1
        if observer is not None:
            observer(window.current_time, trace)
        if tree is not None:
            return SampleResult(tree, window.current_time, blocks, a_blocks)


def simulate_restricted(
        P: TransitionMatrix,
        init: Sequence[int],
        source_rng: RngStream,
        max_blocks: int | None = None,
) -> SampleResult:
    """
    What :func:`run_restricted` returns when watching
    ``make_ensemble_source(P, init, source_rng)``, with the copies stepped
    and the events checked in compiled code.

    :raises BudgetExhausted: if ``max_blocks`` blocks fail.
    """
    n = P.n
    current = np.array(initial_states(P, init), dtype=np.int64)
    cumulative, last_positive = kernels.tables(P)
    parents = np.zeros(n, dtype=np.int64)
    blocks = a_blocks = 0
    for count in block_chunks(max_blocks):
        uniforms = source_rng.uniforms(2 * count * n).reshape(2 * count, n)
        examined, hits, root = kernels.scan_restricted(
            cumulative, last_positive, current, uniforms, parents
        )
        blocks += examined
        a_blocks += hits
        if root:
            tree = Arborescence(int(root), tuple(int(p) for p in parents))
            return SampleResult(tree, 2 * blocks, blocks, a_blocks)
    raise BudgetExhausted(blocks, 2 * blocks, a_blocks)


def restricted_success_probability(P: TransitionMatrix) -> float:
    """
    ``(n-1)! * p_11 * (product of p_1j) * w``, where ``w`` is the total
    arborescence weight of ``P``.
    """
    first_row = P.entries[0]
    return float(
        factorial(P.n - 1) * first_row[0] * prod(first_row) * root_weights(P).sum()
    )


def enumerate_block_success(P: TransitionMatrix) -> float:
    """
    The probability that a block starting with every copy in state 1
    succeeds, summed over every joint two-step evolution of the copies.
    Feasible for up to about 4 states.
    """
    n = P.n
    start = (1,) * n
    vectors = list(product(range(1, n + 1), repeat=n))
    total = 0.0
    for middle in vectors:
        p_middle = prod(P.p(1, s) for s in middle)
        if not p_middle:
            continue
        for end in vectors:
            tree, _ = detect_restricted(start, middle, end)
            if tree is not None:
                total += p_middle * prod(P.p(s, e) for s, e in zip(middle, end))
    return total


class RestrictedSampler(Sampler):
    """
    Exact, interruptible tree sampling for chains where every transition out
    of state 1 has positive probability. Terminates with probability one for
    such chains.
    """

    mode = 'restricted'

    def check(self, report: ValidationReport) -> None:
        if not report.assumption_a:
            raise UnsuitableChain(
                'Assumption A does not hold: some p_1j is zero, use general mode'
            )

    def run(
            self,
            source: EnsembleSource,
            rng: RngStream,
            observer: Observer | None = None,
    ) -> SampleResult:
        return run_restricted(source, self.max_blocks, observer)

    def simulate(
            self,
            P: TransitionMatrix,
            init: Sequence[int],
            source_rng: RngStream,
            rng: RngStream,
    ) -> SampleResult:
        return simulate_restricted(P, init, source_rng, self.max_blocks)

    def success_probability(self, P: TransitionMatrix) -> float:
        return restricted_success_probability(P)
