"""
Reading chain-spec files, and writing the JSON files the command line produces.

A chain-spec file is a JSON object such as::

    {"n": 2, "P": [[0.7, 0.3], [0.6, 0.4]], "labels": ["up", "down"]}

``labels`` is optional. States are always referred to by their 1-based index.
"""
import json
from dataclasses import dataclass
from numbers import Real
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
from numpy.typing import NDArray

from .chain import ChainError, TransitionMatrix


class SpecError(ChainError):
    """
    A chain-spec file could not be read or did not have the required structure.
    """


@dataclass(frozen=True, eq=False)
class ChainSpec:
    path: Path
    n: int
    entries: NDArray[np.float64]
    labels: tuple[str, ...] | None = None

    def matrix(self) -> TransitionMatrix:
        """
        The :class:`~arbor.chain.TransitionMatrix` described by this spec.
        """
        return TransitionMatrix(self.entries, self.labels)


def _number(value: Any) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


def read_chain_spec(path: str | Path) -> ChainSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except OSError as e:
        raise SpecError(f'{path}: {e.strerror}') from e
    except ValueError as e:
        raise SpecError(f'{path}: not valid JSON: {e}') from e
    if not isinstance(data, Mapping):
        raise SpecError(f'{path}: expected a JSON object')
    n = data.get('n')
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SpecError(f'{path}: field "n" must be a positive integer, got {n!r}')
    rows = data.get('P')
    if not isinstance(rows, list) or len(rows) != n:
        raise SpecError(f'{path}: field "P" must be a list of {n} rows')
    for i, row in enumerate(rows, start=1):
        if not isinstance(row, list) or len(row) != n:
            raise SpecError(f'{path}: row {i} of "P" must be a list of {n} numbers')
        for j, value in enumerate(row, start=1):
            if not _number(value):
                raise SpecError(f'{path}: row {i}, column {j} of "P" is not a number: {value!r}')
    labels = data.get('labels')
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != n:
            raise SpecError(f'{path}: field "labels" must be a list of {n} labels')
        labels = tuple(str(label) for label in labels)
    return ChainSpec(path, n, np.array(rows, dtype=float), labels)


def write_chain_spec(path: str | Path, P: TransitionMatrix) -> None:
    data: dict[str, Any] = {'n': P.n, 'P': P.entries.tolist()}
    if P.labels is not None:
        data['labels'] = list(P.labels)
    write_json(path, data)


def dumps(data: Any) -> str:
    """
    Serialise ``data`` deterministically: keys in insertion order, no
    platform-dependent whitespace.
    """
    return json.dumps(data, ensure_ascii=False, allow_nan=False)


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(json.dumps(data, indent=2, ensure_ascii=False) + '\n', encoding='utf-8')


def write_json_lines(path: str | Path, records: Iterable[Mapping[str, Any]]) -> int:
    """
    Write one JSON object per line, streaming ``records``.
    Returns the number of lines written.
    """
    count = 0
    with open(path, 'w', encoding='utf-8', newline='\n') as stream:
        for record in records:
            stream.write(dumps(record) + '\n')
            count += 1
    return count


def read_json_lines(path: str | Path) -> list[dict[str, Any]]:
    with open(path, encoding='utf-8') as stream:
        return [json.loads(line) for line in stream if line.strip()]
