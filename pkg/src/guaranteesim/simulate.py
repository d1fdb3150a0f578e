"""Deterministic randomness and estimation plumbing.

Streams wrap numpy's Philox generator, a counter-based design keyed here
directly by (seed, stream_id). Two streams with the same key always
produce the same draws no matter which worker or in which order they run,
which is what makes grid sweeps reproducible under any scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binomial import binom_pmf_vector

__all__ = [
    "SeededStream",
    "McEstimate",
    "mc_estimate",
    "enumerate_outcomes",
    "DiscreteDist",
    "ENUMERATION_LIMIT",
]

ENUMERATION_LIMIT = 10_000


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, offset: int) -> "SeededStream":
        return SeededStream(self.seed, self.stream_id + offset)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_draws: int


def mc_estimate(sampler, n_draws: int, stream: SeededStream) -> McEstimate:
    """Monte-Carlo mean of sampler(rng, size) with its standard error.

    sampler must return a length-size float array. Determinism contract:
    fixed (seed, stream_id, n_draws) reproduces the estimate bit for bit.
    """
    if n_draws < 2:
        raise ValueError(f"need at least 2 draws for a standard error, got {n_draws}")
    draws = np.asarray(sampler(stream.generator(), n_draws), dtype=float)
    if draws.shape != (n_draws,):
        raise ValueError(f"sampler returned shape {draws.shape}, expected ({n_draws},)")
    mean = float(draws.mean())
    std_error = float(draws.std(ddof=1) / np.sqrt(n_draws))
    return McEstimate(mean=mean, std_error=std_error, n_draws=n_draws)


def enumerate_outcomes(m: int, p: float, f) -> float:
    """Exact E[f(X)] for X ~ Binomial(m, p), X enumerated outcome by outcome.

    f is applied to the integer vector 0..m and may return a float vector.
    """
    if m > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to m <= {ENUMERATION_LIMIT}, got {m}")
    xs = np.arange(m + 1)
    vals = np.asarray(f(xs), dtype=float)
    if vals.shape != xs.shape:
        vals = np.array([float(f(int(x))) for x in xs])
    return float(binom_pmf_vector(m, p) @ vals)


class DiscreteDist:
    """A finite distribution: support values with matching probabilities."""

    def __init__(self, values, probs, *, atol: float = 1e-9):
        self.values = np.asarray(values, dtype=float)
        self.probs = np.asarray(probs, dtype=float)
        if self.values.shape != self.probs.shape or self.values.ndim != 1:
            raise ValueError("values and probs must be matching 1-d arrays")
        if (self.probs < -atol).any():
            raise ValueError("negative probability in distribution")
        total = float(self.probs.sum())
        if abs(total - 1.0) > atol:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def point(cls, value: float) -> "DiscreteDist":
        return cls([value], [1.0])

    @classmethod
    def binomial(cls, m: int, p: float) -> "DiscreteDist":
        if m > ENUMERATION_LIMIT:
            raise ValueError(f"enumeration limited to m <= {ENUMERATION_LIMIT}, got {m}")
        return cls(np.arange(m + 1, dtype=float), binom_pmf_vector(m, p))

    def map(self, fn) -> "DiscreteDist":
        vals = np.asarray(fn(self.values), dtype=float)
        if vals.shape != self.values.shape:
            vals = np.array([float(fn(v)) for v in self.values])
        return DiscreteDist(vals, self.probs)

    def shift(self, c: float) -> "DiscreteDist":
        return DiscreteDist(self.values + c, self.probs)

    def combine(self, other: "DiscreteDist", fn) -> "DiscreteDist":
        """Joint law of fn(self, other) under independence."""
        v = fn(self.values[:, None], other.values[None, :]).ravel()
        pr = (self.probs[:, None] * other.probs[None, :]).ravel()
        return DiscreteDist(v, pr)

    def mean(self) -> float:
        return float(self.probs @ self.values)

    def variance(self) -> float:
        mu = self.mean()
        return float(self.probs @ (self.values - mu) ** 2)

    def expectation(self, fn) -> float:
        return float(self.probs @ np.asarray(fn(self.values), dtype=float))

    def compress(self, *, decimals: int = 12) -> "DiscreteDist":
        """Merge support points that agree after rounding. Keeps laws small
        when repeated combine() calls blow up the support."""
        rounded = np.round(self.values, decimals)
        uniq, inverse = np.unique(rounded, return_inverse=True)
        probs = np.zeros_like(uniq)
        np.add.at(probs, inverse, self.probs)
        return DiscreteDist(uniq, probs)

    def __len__(self) -> int:
        return len(self.values)
