"""Sampling probability distributions and reproducible index draws.

Distributions are immutable after construction. Each optimizer run owns
its generator streams; distinct runs never share one.
"""

import numpy as np

# n*q_i values within this relative distance of 1 are snapped to exactly
# 1.0, so a numerically-uniform distribution behaves bit-identically to
# the unweighted estimator and the derived constants collapse exactly.
_UNIT_SNAP = 1e-12

_MASS_TOL = 1e-12


class DegenerateDistributionError(ValueError):
    """All-zero weights, or a zero-probability index where one is forbidden."""


class SamplingDistribution:
    """Categorical distribution over {0..n-1} with a prefix-sum lookup table."""

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or probs.shape[0] < 1:
            raise ValueError("probs must be a non-empty 1-d vector")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probs must be finite and non-negative")
        total = probs.sum()
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        self.probs = probs
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        self.cum = cum
        scaled = probs * probs.shape[0]
        scaled[np.abs(scaled - 1.0) <= _UNIT_SNAP] = 1.0
        self.scaled = scaled
        with np.errstate(divide="ignore"):
            self.inv_scaled = np.where(scaled > 0, 1.0 / scaled, np.inf)

    @property
    def n(self):
        return self.probs.shape[0]

    @property
    def is_uniform(self):
        return bool(np.all(self.scaled == 1.0))


def _normalize(weights):
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if not total > 0:
        raise DegenerateDistributionError("all sampling weights are zero")
    positive = weights[weights > 0]
    if positive.shape[0] < weights.shape[0]:
        # A zero weight with a nonzero gradient makes the importance
        # correction 1/(n q_i) undefined, so zero rows get a tiny floor.
        weights = np.where(weights > 0, weights, positive.min() * 1e-6)
    return SamplingDistribution(weights / weights.sum())


def uniform_distribution(n):
    """q_i = 1/n for all i."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return SamplingDistribution(np.full(n, 1.0 / n))


def option1_distribution(dataset, tau):
    """q_i proportional to ||x_i||_inf ** tau."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return _normalize(dataset.row_inf_norms() ** tau)


def option2_distribution(dataset, tau):
    """q_i proportional to ||x_i||_0 ** tau (stored-nonzero counts)."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return _normalize(dataset.row_nnz_counts().astype(np.float64) ** tau)


def draw_uniform_subset(rng, n, b):
    """b distinct indices, each size-b subset equiprobable, sorted."""
    return draw_uniform_subsets(rng, n, b, 1)[0]


def draw_uniform_subsets(rng, n, b, count):
    """`count` independent uniform without-replacement subsets, shape (count, b).

    Small b relative to n uses vectorized rejection (i.i.d. rows are
    redrawn until all entries are distinct, which conditions the draw to
    the uniform subset law); b near n falls back to partial shuffles.
    """
    if not 1 <= b <= n:
        raise ValueError(f"need 1 <= b <= n, got b={b}, n={n}")
    if count < 0:
        raise ValueError("count must be >= 0")
    if b == n:
        return np.tile(np.arange(n, dtype=np.int64), (count, 1))
    if 4 * b >= n:
        out = np.empty((count, b), dtype=np.int64)
        for i in range(count):
            out[i] = np.sort(rng.permutation(n)[:b])
        return out
    out = rng.integers(0, n, size=(count, b), dtype=np.int64)
    out.sort(axis=1)
    if b > 1:
        bad = np.flatnonzero((out[:, 1:] == out[:, :-1]).any(axis=1))
        while bad.size:
            redraw = rng.integers(0, n, size=(bad.size, b), dtype=np.int64)
            redraw.sort(axis=1)
            out[bad] = redraw
            still = (redraw[:, 1:] == redraw[:, :-1]).any(axis=1)
            bad = bad[still]
    return out


def draw_weighted_multiset(rng, dist, b):
    """b i.i.d. draws from `dist`, with replacement."""
    return draw_weighted_multisets(rng, dist, b, 1)[0]


def draw_weighted_multisets(rng, dist, b, count):
    """`count` independent i.i.d.-with-replacement multisets, shape (count, b)."""
    if b < 1:
        raise ValueError("b must be >= 1")
    u = rng.random(size=(count, b))
    return np.searchsorted(dist.cum, u, side="right").astype(np.int64)


def spawn_rngs(seed_or_rng, k):
    """Derive k independent, reproducible generator streams.

    The same 64-bit seed yields the same child streams regardless of
    the order they are later consumed in.
    """
    return np.random.default_rng(seed_or_rng).spawn(k)
