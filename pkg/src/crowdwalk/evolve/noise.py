"""Pluggable uniform-noise sources for every random slot in the optimizers.

Both kinds emit reproducible uniform [0, 1) streams from a 64-bit seed:

- "standard": the stdlib Mersenne Twister.
- "chaotic-logistic": the logistic map x <- 4x(1-x) at full chaos. Its raw
  iterates follow the arcsine density 1/(pi*sqrt(x(1-x))), so each draw is
  passed through u = (2/pi)*asin(sqrt(x)), which is exactly that density's
  CDF and therefore uniformizes the stream. Seeds map into (0, 1) avoiding
  the fixed points {0, 0.25, 0.5, 0.75, 1}; if rounding ever drives the
  state onto one of them (or out of the open interval) it is reseeded
  deterministically from a draw counter.

Derived draws are defined on top of the uniform stream so every kind
behaves identically in distributional slots:

- randint(n) = floor(uniform() * n), one uniform.
- gauss(mu, sigma) by Box-Muller, exactly two uniforms:
  z = sqrt(-2*ln(1 - u1)) * cos(2*pi*u2).
"""

from __future__ import annotations

import math
import random

import numpy as np
from numba import njit

from ..errors import ValidationError

_MASK64 = (1 << 64) - 1
_LOGISTIC_FORBIDDEN = (0.0, 0.25, 0.5, 0.75, 1.0)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _derive_seed(seed: int, *key: int) -> int:
    out = _splitmix64(seed & _MASK64)
    for k in key:
        out = _splitmix64(out ^ _splitmix64(k & _MASK64))
    return out


class NoiseSource:
    """Reproducible uniform [0,1) stream plus derived draws."""

    kind: str

    def __init__(self, seed: int):
        self.seed = int(seed)

    def uniform(self) -> float:
        raise NotImplementedError

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])

    def randint(self, n: int) -> int:
        return int(self.uniform() * n)

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return mu + sigma * math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def spawn(self, *key: int) -> "NoiseSource":
        """Independent child stream derived from (seed, key)."""
        return make_noise(self.kind, _derive_seed(self.seed, *key))


class StandardNoise(NoiseSource):
    kind = "standard"

    def __init__(self, seed: int):
        super().__init__(seed)
        self._rng = random.Random(self.seed)

    def uniform(self) -> float:
        return self._rng.random()

    def uniforms(self, n: int) -> np.ndarray:
        rnd = self._rng.random
        return np.array([rnd() for _ in range(n)])


@njit(cache=True)
def _logistic_fill(x, out, start):
    """Fill out[start:] with whitened draws; stops early if the state would
    hit a forbidden point. Returns (next_index, state)."""
    for i in range(start, out.shape[0]):
        x = 4.0 * x * (1.0 - x)
        if x <= 0.0 or x >= 1.0 or x == 0.25 or x == 0.5 or x == 0.75:
            return i, x
        out[i] = (2.0 / math.pi) * math.asin(math.sqrt(x))
    return out.shape[0], x


class ChaoticLogisticNoise(NoiseSource):
    kind = "chaotic-logistic"

    def __init__(self, seed: int):
        super().__init__(seed)
        self._reseed_counter = 0
        self.state = self._fresh_state()

    def _fresh_state(self) -> float:
        while True:
            bits = _derive_seed(self.seed, 0x10C, self._reseed_counter)
            self._reseed_counter += 1
            x = (bits >> 11) / float(1 << 53)
            if 0.0 < x < 1.0 and x not in _LOGISTIC_FORBIDDEN:
                return x

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def uniforms(self, n: int) -> np.ndarray:
        out = np.empty(n)
        done = 0
        while done < n:
            done, state = _logistic_fill(self.state, out, done)
            if done < n:
                self.state = self._fresh_state()
            else:
                self.state = state
        return out


_KINDS = {
    "standard": StandardNoise,
    "chaotic-logistic": ChaoticLogisticNoise,
}


def make_noise(kind: str, seed: int) -> NoiseSource:
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise ValidationError(
            f"unknown noise kind {kind!r}; choose from {sorted(_KINDS)}"
        ) from None
    return cls(seed)
