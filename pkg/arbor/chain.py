from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property, reduce
from math import gcd
from typing import Iterable

import networkx as nx
import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .rng import RngStream

#: A synchronized vector of states, one per copy of the chain, labelled ``1..n``.
StateVector = tuple[int, ...]

DEFAULT_TOLERANCE = 1e-9
DISTRIBUTION_TOLERANCE = 1e-10

# Chunk of uniforms drawn at a time when simulating long trajectories.
CHUNK = 4096


class ChainError(Exception):
    """
    Base class for problems with a Markov chain or its states.
    """


class ShapeError(ChainError):
    """
    A transition matrix was not square, or had no states at all.
    """


class StochasticityError(ChainError):
    """
    A transition matrix had entries outside ``[0, 1]`` or rows not summing to 1.
    """


class ReducibleChain(ChainError):
    """
    An operation that needs an irreducible chain was given a reducible one.
    """


class StateError(ChainError):
    """
    A state label was outside the range allowed for it.
    """


def as_square(entries: ArrayLike) -> NDArray[np.float64]:
    array = np.array(entries, dtype=float)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ShapeError(f'transition matrix must be square, got shape {array.shape}')
    if array.shape[0] < 1:
        raise ShapeError('transition matrix must have at least one state')
    return array


def _row_stochastic(array: NDArray[np.float64], tol: float) -> bool:
    in_range = bool(np.all((array >= 0) & (array <= 1)))
    return in_range and bool(np.all(np.abs(array.sum(axis=1) - 1) <= tol))


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """
    A row-stochastic matrix over states ``1..n``.
    """

    entries: NDArray[np.float64]
    labels: tuple[str, ...] | None = None
    tol: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        array = as_square(self.entries)
        if not _row_stochastic(array, self.tol):
            sums = ', '.join(f'{s:.12g}' for s in array.sum(axis=1))
            raise StochasticityError(f'not row-stochastic within {self.tol}: row sums {sums}')
        if self.labels is not None and len(self.labels) != array.shape[0]:
            raise ShapeError(f'{len(self.labels)} labels for {array.shape[0]} states')
        array.setflags(write=False)
        object.__setattr__(self, 'entries', array)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    def p(self, i: int, j: int) -> float:
        """
        The probability of moving from state ``i`` to state ``j``.
        """
        return float(self.entries[i - 1, j - 1])

    @cached_property
    def cumulative(self) -> list[list[float]]:
        return [np.cumsum(row).tolist() for row in self.entries]

    @cached_property
    def last_positive(self) -> list[int]:
        # 0-based index of the last positive entry in each row
        return [int(np.flatnonzero(row > 0)[-1]) for row in self.entries]

    def __repr__(self) -> str:
        return f'<TransitionMatrix: n={self.n}>'


def matrix(entries: ArrayLike | TransitionMatrix) -> TransitionMatrix:
    if isinstance(entries, TransitionMatrix):
        return entries
    return TransitionMatrix(np.array(entries, dtype=float))


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    A probability distribution over states ``1..n``.
    """

    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or not len(probs):
            raise ShapeError(f'distribution must be a non-empty vector, got shape {probs.shape}')
        if np.any(probs < 0):
            raise ChainError(f'negative probability in {probs}')
        if abs(probs.sum() - 1) > DISTRIBUTION_TOLERANCE:
            raise ChainError(f'probabilities sum to {float(probs.sum())!r}')
        probs.setflags(write=False)
        object.__setattr__(self, 'probs', probs)

    @property
    def n(self) -> int:
        return len(self.probs)

    def __getitem__(self, state: int) -> float:
        return float(self.probs[state - 1])

    def as_mapping(self) -> dict[int, float]:
        return {state: float(p) for state, p in enumerate(self.probs, start=1)}

    def distance(self, other: 'Distribution') -> float:
        """
        The infinity-norm distance to ``other``.
        """
        return float(np.max(np.abs(self.probs - other.probs)))


@dataclass(frozen=True)
class ValidationReport:
    row_stochastic: bool
    irreducible: bool
    aperiodic: bool
    assumption_a: bool
    #: gcd of cycle lengths through state 1; 0 if state 1 lies on no cycle.
    period: int
    #: Diagnostic only: detailed balance holds for the stationary distribution.
    reversible: bool = False

    def as_dict(self) -> dict[str, bool | int]:
        return {
            'row_stochastic': self.row_stochastic,
            'irreducible': self.irreducible,
            'aperiodic': self.aperiodic,
            'assumption_a': self.assumption_a,
            'period': self.period,
            'reversible': self.reversible,
        }


def _graph(array: NDArray[np.float64]) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(1, array.shape[0] + 1))
    rows, cols = np.nonzero(array > 0)
    graph.add_edges_from((int(i) + 1, int(j) + 1) for i, j in zip(rows, cols))
    return graph


def _period(graph: nx.DiGraph) -> int:
    # levels of a BFS from state 1 inside its strongly connected component
    component = next(c for c in nx.strongly_connected_components(graph) if 1 in c)
    subgraph = graph.subgraph(component)
    level = nx.single_source_shortest_path_length(subgraph, 1)
    differences = (level[i] + 1 - level[j] for i, j in subgraph.edges())
    return reduce(gcd, differences, 0)


def validate(P: ArrayLike | TransitionMatrix, tol: float = DEFAULT_TOLERANCE) -> ValidationReport:
    """
    Check the properties of ``P`` that the samplers and oracles rely on.
    ``P`` need not be row-stochastic; that is one of the things reported.
    """
    array = as_square(P.entries if isinstance(P, TransitionMatrix) else P)
    graph = _graph(array)
    row_stochastic = _row_stochastic(array, tol)
    irreducible = nx.is_strongly_connected(graph)
    period = _period(graph)
    reversible = False
    if row_stochastic and irreducible:
        pi = _solve(array)
        flow = pi[:, None] * array
        reversible = bool(np.all(np.abs(flow - flow.T) <= tol))
    return ValidationReport(
        row_stochastic=row_stochastic,
        irreducible=irreducible,
        aperiodic=period == 1,
        assumption_a=bool(np.all(array[0] > 0)),
        period=period,
        reversible=reversible,
    )


def require_irreducible(P: TransitionMatrix) -> None:
    if not nx.is_strongly_connected(_graph(P.entries)):
        raise ReducibleChain(f'{P!r} is reducible')


def _solve(array: NDArray[np.float64]) -> NDArray[np.float64]:
    n = array.shape[0]
    system = array.T - np.eye(n)
    system[-1, :] = 1
    rhs = np.zeros(n)
    rhs[-1] = 1
    pi: NDArray[np.float64] = scipy.linalg.solve(system, rhs)
    # round-off can leave tiny negatives where the true value is tiny and positive
    return np.where((pi < 0) & (pi > -DISTRIBUTION_TOLERANCE), 0.0, pi)


def stationary_solve(P: TransitionMatrix) -> Distribution:
    """
    The unique stationary distribution of ``P``, by direct linear solve.
    """
    require_irreducible(P)
    return Distribution(_solve(np.array(P.entries)))


def averaged_matrix(P: TransitionMatrix) -> TransitionMatrix:
    """
    The average of the first ``n`` powers of ``P``. All its entries are positive
    when ``P`` is irreducible.
    """
    require_irreducible(P)
    power = np.eye(P.n)
    total = np.zeros((P.n, P.n))
    for _ in range(P.n):
        power = power @ P.entries
        total += power
    return TransitionMatrix(total / P.n, P.labels)


def _check_state(P: TransitionMatrix, state: int) -> None:
    if not 1 <= state <= P.n:
        raise StateError(f'state {state} outside 1..{P.n}')


def _inverse_cdf(P: TransitionMatrix, state: int, u: float) -> int:
    index = bisect_right(P.cumulative[state - 1], u)
    return min(index, P.last_positive[state - 1]) + 1


def step(P: TransitionMatrix, state: int, rng: RngStream) -> int:
    """
    One transition from ``state``, consuming exactly one uniform from ``rng``
    by inverse-CDF over the row in ascending state order.
    """
    _check_state(P, state)
    return _inverse_cdf(P, state, rng.uniform())


def simulate_trajectory(
        P: TransitionMatrix, start: int, steps: int, rng: RngStream
) -> list[int]:
    """
    A trajectory of ``steps`` transitions from ``start``, consuming uniforms
    from ``rng`` exactly as repeated calls to :func:`step` would.
    """
    _check_state(P, start)
    trajectory = [start]
    state = start
    remaining = steps
    while remaining:
        size = min(remaining, CHUNK)
        for u in rng.uniforms(size).tolist():
            state = _inverse_cdf(P, state, u)
            trajectory.append(state)
        remaining -= size
    return trajectory


def lift_two_state(traj: Iterable[int], n: int, rng: RngStream) -> list[int]:
    """
    Lift a two-state trajectory to ``n`` states: state 1 is kept, and every
    visit to state 2 becomes a fresh uniform draw from ``2..n``.
    """
    if n < 3:
        raise StateError(f'can only lift to 3 or more states, not {n}')
    lifted = []
    for t, state in enumerate(traj):
        if state == 1:
            lifted.append(1)
        elif state == 2:
            lifted.append(rng.integer(2, n))
        else:
            raise StateError(f'state {state} at time {t} is not 1 or 2')
    return lifted


def lifted_stationary(pi: Distribution, n: int) -> Distribution:
    """
    The stationary distribution of a chain lifted from the two-state chain
    with stationary distribution ``pi``.
    """
    if pi.n != 2:
        raise ShapeError(f'need a two-state distribution, got {pi.n} states')
    if n < 3:
        raise StateError(f'can only lift to 3 or more states, not {n}')
    return Distribution(np.array([pi[1]] + [pi[2] / (n - 1)] * (n - 1)))


def lifted_matrix(P: TransitionMatrix, n: int) -> TransitionMatrix:
    """
    The transition matrix followed by a lifted trajectory of the two-state
    chain ``P``.
    """
    if P.n != 2:
        raise ShapeError(f'need a two-state chain, got {P.n} states')
    if n < 3:
        raise StateError(f'can only lift to 3 or more states, not {n}')
    entries = np.empty((n, n))
    entries[0, 0] = P.p(1, 1)
    entries[0, 1:] = P.p(1, 2) / (n - 1)
    entries[1:, 0] = P.p(2, 1)
    entries[1:, 1:] = P.p(2, 2) / (n - 1)
    return TransitionMatrix(entries)


def three_parameter_chain(n: int, alpha: float, beta: float, gamma: float) -> TransitionMatrix:
    """
    The chain with ``p_1j = alpha`` and ``p_i1 = beta`` for ``i, j != 1``,
    ``gamma`` between distinct states other than 1, and diagonals filling
    each row. For this family the summed tree weights rooted at 1 and 2 are
    ``beta * (beta + (n-1) * gamma) ** (n-2)`` and
    ``alpha * (beta + (n-1) * gamma) ** (n-2)``.
    """
    entries = np.full((n, n), gamma)
    entries[0, :] = alpha
    entries[:, 0] = beta
    entries[0, 0] = 1 - (n - 1) * alpha
    for i in range(1, n):
        entries[i, i] = 1 - beta - (n - 2) * gamma
    return TransitionMatrix(entries)
