from abc import ABC
from bisect import bisect_right
from typing import Sequence

from .chain import CHUNK, StateError, StateVector, TransitionMatrix
from .rng import RngStream


class EnsembleSource(ABC):
    """
    This is what the samplers watch: ``n`` synchronized trajectories of a
    Markov chain on ``n`` states, seen one time step at a time.

    It is passive. There is no way to choose, set or reset the states, or to
    ask for anything other than the next vector of states.
    """

    def next(self) -> StateVector:
        """
        Return the vector of states at the next time step, starting with
        the vector at time 0.
        """
        raise NotImplementedError

    def __repr__(self) -> str:
        return f'<{type(self).__qualname__}>'


def check_states(P: TransitionMatrix, init: Sequence[int]) -> StateVector:
    if not init:
        raise StateError("need at least one copy of the chain")
    for state in init:
        if not 1 <= state <= P.n:
            raise StateError(f'initial state {state} outside 1..{P.n}')
    return tuple(int(s) for s in init)


def initial_states(P: TransitionMatrix, init: Sequence[int]) -> StateVector:
    """
    Check ``init`` is a valid starting vector for ``P.n`` copies of ``P``.
    """
    if len(init) != P.n:
        raise StateError(f'initial vector has {len(init)} states, chain has {P.n}')
    return check_states(P, init)


class SimulatedEnsemble(EnsembleSource):
    """
    An :class:`EnsembleSource` simulated from a known transition matrix.
    Each coordinate moves independently, coordinates advancing in index order
    with one uniform each per time step.

    The number of copies is the length of ``init``.
    """

    def __init__(self, P: TransitionMatrix, init: Sequence[int], rng: RngStream):
        self._init = check_states(P, init)
        self._cumulative = P.cumulative
        self._last_positive = P.last_positive
        self._n = len(self._init)
        self._rng = rng
        self._current: StateVector | None = None
        self._uniforms: list[float] = []
        self._position = 0

    def _draws(self) -> list[float]:
        if self._position == len(self._uniforms):
            self._uniforms = self._rng.uniforms(CHUNK * self._n).tolist()
            self._position = 0
        start = self._position
        self._position += self._n
        return self._uniforms[start:self._position]

    def next(self) -> StateVector:
        if self._current is None:
            self._current = self._init
            return self._current
        cumulative = self._cumulative
        last_positive = self._last_positive
        self._current = tuple(
            min(bisect_right(cumulative[s - 1], u), last_positive[s - 1]) + 1
            for s, u in zip(self._current, self._draws())
        )
        return self._current


def make_ensemble_source(
        P: TransitionMatrix, init: Sequence[int], rng: RngStream
) -> EnsembleSource:
    """
    The source of ``n`` synchronized copies of ``P`` started at ``init``.
    """
    return SimulatedEnsemble(P, initial_states(P, init), rng)


class LiftedEnsemble(EnsembleSource):
    """
    Lifts a source of two-state trajectories to ``n`` states, coordinate by
    coordinate: state 1 stays 1 and each visit to state 2 becomes a fresh
    uniform draw from ``2..n``, drawn in coordinate order.
    """

    def __init__(self, source: EnsembleSource, n: int, rng: RngStream):
        if n < 3:
            raise StateError(f'can only lift to 3 or more states, not {n}')
        self.source = source
        self.n = n
        self._rng = rng

    def next(self) -> StateVector:
        lifted = []
        for state in self.source.next():
            if state == 1:
                lifted.append(1)
            elif state == 2:
                lifted.append(self._rng.integer(2, self.n))
            else:
                raise StateError(f'state {state} is not 1 or 2')
        return tuple(lifted)


def collapse_state(state: int) -> int:
    """
    Map a state of a lifted chain back to the two-state chain it came from.
    """
    return min(state, 2)
