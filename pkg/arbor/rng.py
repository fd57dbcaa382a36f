from typing import Sequence

import numpy as np
from numpy.typing import NDArray

MASK_64 = (1 << 64) - 1


class RngStream:
    """
    A reproducible stream of random numbers, identified by a ``seed`` and a
    ``stream_id``.

    Streams with the same identity produce the same sequence of values.
    Streams with different identities are statistically independent, courtesy
    of :class:`numpy.random.SeedSequence` spawning.
    """

    def __init__(self, seed: int, stream_id: int = 0, *, key: Sequence[int] = ()):
        self.seed = seed & MASK_64
        self.stream_id = stream_id & MASK_64
        self.key = (self.stream_id, *key)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def substream(self, index: int) -> 'RngStream':
        """
        Return an independent stream derived from this one, for handing to a
        different consumer.
        """
        return RngStream(self.seed, self.stream_id, key=(*self.key[1:], index))

    def uniform(self) -> float:
        """
        One uniform variate on ``[0, 1)``.
        """
        return float(self._generator.random())

    def uniforms(self, size: int) -> NDArray[np.float64]:
        """
        ``size`` uniform variates, identical to ``size`` successive calls
        to :meth:`uniform`.
        """
        return self._generator.random(size)

    def integer(self, low: int, high: int) -> int:
        """
        One integer drawn uniformly from ``low`` to ``high`` inclusive,
        using one uniform.
        """
        return int(self.integer_array(low, high, 1)[0])

    def integer_array(self, low: int, high: int, size: int) -> NDArray[np.int64]:
        """
        ``size`` integers drawn uniformly from ``low`` to ``high`` inclusive,
        one uniform each, so any split into smaller draws gives the same values.
        """
        span = high - low + 1
        scaled = (self.uniforms(size) * span).astype(np.int64)
        # u * span can round up to span for u just below 1
        result: NDArray[np.int64] = low + np.minimum(scaled, span - 1)
        return result

    def integers(self, low: int, high: int, size: int) -> tuple[int, ...]:
        return tuple(int(i) for i in self.integer_array(low, high, size))

    def choice(self, probs: NDArray[np.float64], size: int) -> tuple[int, ...]:
        """
        ``size`` independent 1-based states drawn from ``probs``.
        """
        drawn = self._generator.choice(len(probs), size=size, p=probs)
        return tuple(int(i) + 1 for i in drawn)

    def __repr__(self) -> str:
        return f'<RngStream: seed={self.seed} key={self.key}>'
