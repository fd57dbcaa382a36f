"""
Arborescences of a Markov chain, their weights, and the tree distribution.

An arborescence rooted at ``r`` is a spanning tree of the states whose edges
all point towards ``r``. Its weight is the product of the transition
probabilities along its edges; the tree distribution normalises those weights.
"""
from dataclasses import dataclass
from itertools import product
from math import prod
from typing import Any, Iterable, Iterator

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .chain import Distribution, TransitionMatrix, require_irreducible

#: Largest number of states for which arborescences are enumerated.
ENUMERATION_CAP = 7

#: Weights below this are treated as zero.
WEIGHT_FLOOR = 1e-300

ORACLE_TOLERANCE = 1e-10


class StructureError(Exception):
    """
    A set of edges did not form an arborescence.
    """


class CapacityError(Exception):
    """
    The chain has too many states to enumerate its arborescences.
    """

    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap

    def __str__(self) -> str:
        return f'{self.n} states is above the enumeration cap of {self.cap}'


class OracleMismatch(ArithmeticError):
    """
    Two independent computations of the same quantity disagreed.
    """


def _reaches_root(parents: tuple[int, ...], root: int) -> bool:
    n = len(parents)
    # 0: unvisited, 1: on current path, 2: known to reach root
    status = [0] * (n + 1)
    status[root] = 2
    for start in range(1, n + 1):
        path = []
        node = start
        while status[node] == 0:
            status[node] = 1
            path.append(node)
            node = parents[node - 1]
        if status[node] == 1:
            return False
        for visited in path:
            status[visited] = 2
    return True


@dataclass(frozen=True, order=True)
class Arborescence:
    """
    A spanning tree on states ``1..n`` with every edge directed towards
    ``root``. ``parents[i - 1]`` is the state that ``i`` points to, and is
    ``0`` for the root.
    """

    root: int
    parents: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.parents)
        if not 1 <= self.root <= n:
            raise StructureError(f'root {self.root} outside 1..{n}')
        for state, parent in enumerate(self.parents, start=1):
            if state == self.root:
                if parent != 0:
                    raise StructureError(f'root {state} has an out-edge to {parent}')
            elif not 1 <= parent <= n or parent == state:
                raise StructureError(f'state {state} has invalid parent {parent}')
        if not _reaches_root(self.parents, self.root):
            raise StructureError(f'edges {self.parent} contain a cycle')

    @classmethod
    def from_edges(cls, n: int, root: int, edges: Iterable[tuple[int, int]]) -> 'Arborescence':
        """
        Build from ``(source, target)`` pairs, one for every state but the root.
        """
        parents = [0] * n
        count = 0
        for source, target in edges:
            if not 1 <= source <= n:
                raise StructureError(f'edge source {source} outside 1..{n}')
            if source == root:
                raise StructureError(f'root {root} has an out-edge')
            if parents[source - 1]:
                raise StructureError(f'state {source} has more than one out-edge')
            parents[source - 1] = target
            count += 1
        if count != n - 1:
            raise StructureError(f'{count} edges given, an arborescence on {n} states has {n - 1}')
        return cls(root, tuple(parents))

    @property
    def n(self) -> int:
        return len(self.parents)

    @property
    def parent(self) -> dict[int, int]:
        return {
            state: parent for state, parent in enumerate(self.parents, start=1) if parent
        }

    def edges(self) -> Iterator[tuple[int, int]]:
        return iter(self.parent.items())

    def __str__(self) -> str:
        return canonical_encode(self)


def arborescence_from_edges(
        n: int, root: int, edges: Iterable[tuple[int, int]]
) -> Arborescence | None:
    """
    The arborescence formed by ``edges``, or ``None`` if they don't form one.
    """
    try:
        return Arborescence.from_edges(n, root, edges)
    except StructureError:
        return None


def canonical_encode(T: Arborescence) -> str:
    """
    A stable string key for ``T`` of the form ``root:p1,p2,...,pn``.
    """
    return f'{T.root}:' + ','.join(str(p) for p in T.parents)


def canonical_decode(text: str) -> Arborescence:
    try:
        root, parents = text.split(':')
        return Arborescence(int(root), tuple(int(p) for p in parents.split(',')))
    except ValueError as e:
        raise StructureError(f'cannot decode {text!r}') from e


def _floor(weight: float) -> float:
    return 0.0 if weight < WEIGHT_FLOOR else weight


def tree_weight(P: TransitionMatrix, T: Arborescence) -> float:
    """
    The product of the transition probabilities along the edges of ``T``.
    """
    if T.n != P.n:
        raise StructureError(f'arborescence on {T.n} states, chain has {P.n}')
    return _floor(prod(P.p(i, j) for i, j in T.edges()))


def enumerate_arborescences(
        P: TransitionMatrix, cap: int = ENUMERATION_CAP
) -> list[Arborescence]:
    """
    Every arborescence with positive weight under ``P``, ordered by root and
    then lexicographically by parent array.
    """
    n = P.n
    if n > cap:
        raise CapacityError(n, cap)
    entries = P.entries
    found = []
    for root in range(1, n + 1):
        # only positive edges can appear in a positive-weight arborescence
        choices = [
            [0] if i == root else
            [j for j in range(1, n + 1) if j != i and entries[i - 1, j - 1] > 0]
            for i in range(1, n + 1)
        ]
        for parents in product(*choices):
            if not _reaches_root(parents, root):
                continue
            T = Arborescence(root, parents)
            if tree_weight(P, T) > 0:
                found.append(T)
    return found


def laplacian(P: TransitionMatrix) -> NDArray[np.float64]:
    """
    The out-degree Laplacian of ``P``: off-diagonal ``-p_ij`` and diagonal
    ``1 - p_ii``, so every row sums to zero.
    """
    off_diagonal = P.entries - np.diag(np.diag(P.entries))
    result: NDArray[np.float64] = np.diag(off_diagonal.sum(axis=1)) - off_diagonal
    return result


def matrix_tree_root_weight(P: TransitionMatrix, root: int) -> float:
    """
    The summed weight of all arborescences rooted at ``root``, computed as
    the minor of the Laplacian with ``root``'s row and column removed.
    """
    if not 1 <= root <= P.n:
        raise StructureError(f'root {root} outside 1..{P.n}')
    keep = [i for i in range(P.n) if i != root - 1]
    minor = laplacian(P)[np.ix_(keep, keep)]
    if not minor.size:
        return 1.0
    lu, pivots = scipy.linalg.lu_factor(minor)
    swaps = int(np.sum(pivots != np.arange(len(pivots))))
    determinant = float(np.prod(np.diag(lu))) * (-1) ** swaps
    return _floor(determinant)


def root_weights(P: TransitionMatrix) -> NDArray[np.float64]:
    return np.array([matrix_tree_root_weight(P, r) for r in range(1, P.n + 1)])


@dataclass(frozen=True)
class WeightedTree:
    tree: Arborescence
    weight: float
    probability: float

    def as_dict(self) -> dict[str, Any]:
        return {
            'tree': canonical_encode(self.tree),
            'root': self.tree.root,
            'weight': self.weight,
            'prob': self.probability,
        }


@dataclass(frozen=True, eq=False)
class TreeDistribution:
    """
    The tree distribution of a chain: every positive-weight arborescence with
    its probability.
    """

    trees: tuple[WeightedTree, ...]
    total_weight: float
    root_mass: NDArray[np.float64]

    def probabilities(self) -> dict[str, float]:
        """
        Probabilities keyed by :func:`canonical_encode`, in canonical order.
        """
        return {canonical_encode(t.tree): t.probability for t in self.trees}

    def roots(self) -> Distribution:
        return Distribution(self.root_mass)

    def as_json(self) -> list[dict[str, Any]]:
        return [t.as_dict() for t in self.trees]

    def __len__(self) -> int:
        return len(self.trees)


def tree_distribution(P: TransitionMatrix, cap: int = ENUMERATION_CAP) -> TreeDistribution:
    require_irreducible(P)
    trees = enumerate_arborescences(P, cap)
    weights = [tree_weight(P, T) for T in trees]
    total = sum(weights)
    expected = float(root_weights(P).sum())
    if abs(total - expected) > ORACLE_TOLERANCE * expected:
        raise OracleMismatch(f'enumerated weight {total!r} != matrix-tree weight {expected!r}')
    root_mass = np.zeros(P.n)
    for T, weight in zip(trees, weights):
        root_mass[T.root - 1] += weight / total
    return TreeDistribution(
        trees=tuple(
            WeightedTree(T, weight, weight / total) for T, weight in zip(trees, weights)
        ),
        total_weight=total,
        root_mass=root_mass,
    )


def tree_theorem_stationary(P: TransitionMatrix) -> Distribution:
    """
    The stationary distribution of ``P`` by the Markov chain tree theorem:
    each state's share of the total arborescence weight.
    """
    require_irreducible(P)
    weights = root_weights(P)
    return Distribution(weights / weights.sum())

