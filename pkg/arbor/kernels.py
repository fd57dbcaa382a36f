"""
Compiled inner loops for simulating an ensemble and checking its blocks.

The kernels release the GIL, so replications on different threads run in
parallel. They take uniforms drawn ahead of time, one row per time step and
one column per copy, and use them exactly as
:class:`~arbor.ensemble.SimulatedEnsemble` does, so a sampler gets the same
result from either.

States are 1-based throughout. ``parents`` is filled in the layout used by
:class:`~arbor.arborescence.Arborescence`.
"""
import numpy as np
from numba import njit
from numpy.typing import NDArray

from .chain import TransitionMatrix


def tables(P: TransitionMatrix) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """
    The cumulative rows and last positive column of ``P``, as the kernels
    want them.
    """
    return (
        np.array(P.cumulative, dtype=np.float64),
        np.array(P.last_positive, dtype=np.int64),
    )


@njit(nogil=True, cache=True)
def advance(cumulative, last_positive, states, uniforms, out):
    for i in range(states.shape[0]):
        row = states[i] - 1
        index = np.searchsorted(cumulative[row], uniforms[i], side='right')
        out[i] = min(index, last_positive[row]) + 1


@njit(nogil=True, cache=True)
def is_permutation(listed):
    n = listed.shape[0]
    seen = np.zeros(n + 1, np.bool_)
    for state in listed:
        if state < 1 or state > n or seen[state]:
            return False
        seen[state] = True
    return True


@njit(nogil=True, cache=True)
def reaches_root(parents, root):
    n = parents.shape[0]
    for start in range(1, n + 1):
        node = start
        for _ in range(n):
            if node == root:
                break
            node = parents[node - 1]
        if node != root:
            return False
    return True


@njit(nogil=True, cache=True)
def scan_restricted(cumulative, last_positive, current, uniforms, parents):
    """
    Run blocks of two steps from ``current`` until one succeeds or the
    uniforms run out. ``current`` is left at the last state vector reached.

    Returns the number of blocks examined, how many of them started with
    every copy in state 1, and the root of the sampled tree, or 0.
    """
    n = current.shape[0]
    middle = np.empty(n, np.int64)
    end = np.empty(n, np.int64)
    listed = np.empty(n, np.int64)
    blocks = uniforms.shape[0] // 2
    a_blocks = 0
    for block in range(blocks):
        a = True
        for i in range(n):
            if current[i] != 1:
                a = False
                break
        advance(cumulative, last_positive, current, uniforms[2 * block], middle)
        advance(cumulative, last_positive, middle, uniforms[2 * block + 1], end)
        current[:] = end
        if not a:
            continue
        a_blocks += 1
        if middle[0] != 1:
            continue
        root = end[0]
        listed[0] = root
        listed[1:] = middle[1:]
        if not is_permutation(listed):
            continue
        parents[:] = 0
        for copy in range(1, n):
            parents[middle[copy] - 1] = end[copy]
        if reaches_root(parents, root):
            return block + 1, a_blocks, root
    return blocks, a_blocks, 0


@njit(nogil=True, cache=True)
def scan_general(cumulative, last_positive, current, uniforms, offsets, parents):
    """
    Run blocks of ``2n`` steps from ``current``, one row of ``offsets`` per
    block, until one succeeds or the offsets run out. ``current`` is left at
    the last state vector reached.

    Returns the same as :func:`scan_restricted`.
    """
    n = current.shape[0]
    span = 2 * n
    window = np.empty((span + 1, n), np.int64)
    listed = np.empty(n, np.int64)
    blocks = offsets.shape[0]
    a_blocks = 0
    for block in range(blocks):
        window[0] = current
        for k in range(span):
            advance(cumulative, last_positive, window[k], uniforms[block * span + k], window[k + 1])
        current[:] = window[span]
        a = True
        for i in range(n):
            if window[0, i] != 1:
                a = False
                break
        if not a:
            continue
        a_blocks += 1
        u = offsets[block]
        if window[u[0], 0] != 1:
            continue
        root = window[u[0] + u[1], 0]
        listed[0] = root
        # copy ``c`` (0-based) is looked at with offset u[c + 1]
        for copy in range(1, n):
            listed[copy] = window[u[copy + 1], copy]
        if not is_permutation(listed):
            continue
        parents[:] = 0
        for copy in range(1, n):
            at = u[copy + 1]
            parents[window[at, copy] - 1] = window[at + 1, copy]
        if reaches_root(parents, root):
            return block + 1, a_blocks, root
    return blocks, a_blocks, 0
