"""Reproducible random number streams for parallel Monte Carlo.

A stream is identified by a root seed and an index key.  Substreams obtained
with distinct keys are statistically independent, and the sequence produced by
a substream depends only on ``(root seed, key)`` -- never on thread scheduling
or the order in which sibling substreams are created.
"""

from __future__ import annotations

import numpy as np


class RngStream:
    """A seed-derived random stream with cheap, independent substreams.

    Built on :class:`numpy.random.Philox` keyed through
    :class:`numpy.random.SeedSequence` so that ``substream(i, j)`` is a pure
    function of ``(seed, parent key, i, j)``.

    Parameters
    ----------
    seed : int
        Root seed shared by the whole experiment.
    key : tuple of int, optional
        Index of this stream in the substream tree.  The root stream has an
        empty key; typical layouts use ``(experiment_id, batch_id)``.
    """

    __slots__ = ("seed", "key", "gen")

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.gen = np.random.Generator(np.random.Philox(ss))

    def substream(self, *key: int) -> "RngStream":
        """Return the independent stream indexed by ``self.key + key``."""
        return RngStream(self.seed, self.key + key)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"
