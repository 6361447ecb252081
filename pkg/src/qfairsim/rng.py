"""Cheap deterministic random streams.

Monte Carlo estimators create several fresh streams per trial (heap,
dealer, one per strategy); seeding ``random.Random`` costs more than a
whole protocol round, so trial streams use a splitmix64 generator instead:
constant-time construction from an integer seed, stable pure-integer
arithmetic on every platform, and good statistical quality at the scales
used here.  Only ``random()`` and ``randrange(n)`` are provided, which is
all the simulator draws.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TO_UNIT = 1.0 / (1 << 53)


class StreamRng:
    """splitmix64 stream; API-compatible with the subset of
    ``random.Random`` used by the simulator."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def _next(self) -> int:
        self._state = s = (self._state + _GOLDEN) & _MASK
        z = ((s ^ (s >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self._next() >> 11) * _TO_UNIT

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n).  The modulo bias is ~n/2**64,
        irrelevant for the small ranges drawn here."""
        return self._next() % n

    def getstate(self) -> int:
        return self._state

    def setstate(self, state: int) -> None:
        self._state = state & _MASK
