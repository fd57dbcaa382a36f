from pathlib import Path
from typing import Callable

import pytest
from numpy.typing import ArrayLike
from sybil import Sybil
from sybil.parsers.rest import DocTestParser, PythonCodeBlockParser

from arbor.chain import TransitionMatrix
from arbor.chainfile import write_json

pytest_collect_file = Sybil(
    parsers=[DocTestParser(), PythonCodeBlockParser()],
    patterns=['*.rst'],
    path='docs',
).pytest()


ChainFile = Callable[..., Path]


@pytest.fixture()
def chain_file(tmp_path: Path) -> ChainFile:
    """
    Write a chain-spec file and return its path.
    """
    def write(entries: ArrayLike | TransitionMatrix, name: str = 'chain.json', **extra) -> Path:
        if isinstance(entries, TransitionMatrix):
            entries = entries.entries.tolist()
        rows = [list(row) for row in entries]  # type: ignore[union-attr]
        path = tmp_path / name
        write_json(path, {'n': len(rows), 'P': rows, **extra})
        return path
    return write
