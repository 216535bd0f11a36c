"""Seeded random streams and the handful of distributions the package needs.

Every stream is a ``numpy`` Philox (counter-based) generator keyed by
``(seed, stream_id)`` through a ``SeedSequence``. Substreams are derived by
hashing labels into a new 64-bit ``stream_id``, so replicate ``i`` of an
experiment always sees the same draws regardless of execution order or
thread count.

Fixed sampling algorithms (part of the reproducibility contract):

* normal: numpy's ziggurat ``standard_normal``
* chi-square(df): ``2 * Gamma(df / 2)``, numpy's Marsaglia-Tsang gamma
* bernoulli: ``uniform < p``
"""
from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import InvalidParameter
from .numcore import psd_factor

_MASK64 = (1 << 64) - 1


def derive_stream_id(*parts) -> int:
    """Stable 64-bit id for a tuple of ints/strings (blake2b of its repr)."""
    digest = hashlib.blake2b(repr(tuple(parts)).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """Single-owner random stream identified by ``(seed, stream_id)``."""

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed <= _MASK64 and 0 <= stream_id <= _MASK64):
            raise InvalidParameter("seed and stream_id must be unsigned 64-bit integers")
        self.seed = seed
        self.stream_id = stream_id
        seq = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def substream(self, *labels) -> "RngStream":
        return RngStream(self.seed, derive_stream_id(self.stream_id, *labels))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _finite(*values) -> bool:
    return all(math.isfinite(v) for v in values)


def draw_normal(rng: RngStream, mean: float = 0.0, sd: float = 1.0, size=None):
    """N(mean, sd**2) draws; ``sd == 0`` returns ``mean`` exactly."""
    if not _finite(mean, sd) or sd < 0:
        raise InvalidParameter(f"invalid normal parameters mean={mean}, sd={sd}")
    z = rng.generator.standard_normal(size)
    if sd == 0:
        return np.full(size, float(mean)) if size is not None else float(mean)
    return mean + sd * z


def draw_bernoulli(rng: RngStream, p: float, size=None):
    """0/1 draws with success probability ``p``."""
    if not _finite(p) or not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"bernoulli probability must lie in [0, 1], got {p}")
    u = rng.generator.random(size)
    if size is None:
        return int(u < p)
    return (u < p).astype(np.int8)


def draw_chisq(rng: RngStream, df: float, size=None):
    if not _finite(df) or df <= 0:
        raise InvalidParameter(f"chi-square df must be positive, got {df}")
    return 2.0 * rng.generator.standard_gamma(df / 2.0, size)


def draw_scaled_inv_chisq(rng: RngStream, df: int, scale: float, size=None):
    """Scaled inverse chi-square draw ``df * scale / chi2(df)``."""
    if int(df) != df or df < 1:
        raise InvalidParameter(f"df must be a positive integer, got {df}")
    if not _finite(scale) or scale < 0:
        raise InvalidParameter(f"scale must be finite and non-negative, got {scale}")
    g = draw_chisq(rng, df, size)
    return df * scale / g


def draw_mvn(rng: RngStream, mean, cov, size=None) -> np.ndarray:
    """Multivariate normal draw ``mean + L z`` with ``L L' = (cov + cov') / 2``.

    With ``size`` given, returns a ``(size, p)`` array of independent draws.
    """
    mean = np.asarray(mean, dtype=float)
    factor = psd_factor(cov)
    if factor.shape != (mean.size, mean.size):
        raise InvalidParameter(f"covariance shape {factor.shape} does not match mean length {mean.size}")
    if size is None:
        return mean + factor @ rng.generator.standard_normal(mean.size)
    z = rng.generator.standard_normal((size, mean.size))
    return mean + z @ factor.T


def draw_indices(rng: RngStream, n: int, size: int) -> np.ndarray:
    """Uniform row indices in ``[0, n)`` for resampling with replacement."""
    return rng.generator.integers(0, n, size)
