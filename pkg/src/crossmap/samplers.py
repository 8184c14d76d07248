"""Deterministic point sources in the open unit cube."""
from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

CHUNK = 4096
_SCALE = 2.0 ** -53


def rng_for(seed: int, name: str = "", *extra: int) -> np.random.Generator:
    """Independent stream keyed by (seed, name, extra...)."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode()), *map(int, extra)])


def uniform_open(rng: np.random.Generator, shape) -> np.ndarray:
    """53-bit uniforms on the cell midpoints, never 0 or 1."""
    return (rng.integers(0, 2 ** 53, size=shape, dtype=np.int64) + 0.5) * _SCALE


def first_primes(d: int):
    out, c = [], 2
    while len(out) < d:
        if all(c % p for p in out if p * p <= c):
            out.append(c)
        c += 1
    return out


def radical_inverse(idx, base: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64).copy()
    out = np.zeros(idx.shape)
    f = 1.0 / base
    while np.any(idx > 0):
        idx, dig = np.divmod(idx, base)
        out += dig * f
        f /= base
    return out


@dataclass(frozen=True)
class SamplerSpec:
    """random(seed) | grid(k) | stratified(k, seed) | halton, optionally x^2 warped."""

    kind: str
    dim: int
    k: Optional[int] = None
    seed: int = 0
    warp: bool = False

    def __post_init__(self):
        if self.kind not in ("random", "grid", "stratified", "halton"):
            raise ValueError(f"unknown sampler {self.kind!r}")
        if self.kind in ("grid", "stratified") and (self.k is None or self.k < 1):
            raise ValueError(f"{self.kind} sampler needs k >= 1")
        if self.dim < 1:
            raise ValueError("sampler dimension must be >= 1")

    def natural_count(self) -> Optional[int]:
        """Point count fixed by the sampler itself (grid/stratified)."""
        if self.kind in ("grid", "stratified"):
            return self.k ** self.dim
        return None

    def _lattice(self, idx):
        # row-major multi-index, last axis fastest
        digits = np.empty(idx.shape + (self.dim,), dtype=np.int64)
        rest = idx.copy()
        for j in range(self.dim - 1, -1, -1):
            rest, digits[..., j] = np.divmod(rest, self.k)
        return digits

    def _chunk(self, c: int, lo: int, hi: int) -> np.ndarray:
        idx = np.arange(lo, hi, dtype=np.int64)
        if self.kind == "random":
            rng = rng_for(self.seed, "random", c)
            return uniform_open(rng, (CHUNK, self.dim))[: hi - lo]
        if self.kind == "grid":
            return (self._lattice(idx) + 0.5) / self.k
        if self.kind == "stratified":
            rng = rng_for(self.seed, "stratified", c)
            u = uniform_open(rng, (CHUNK, self.dim))[: hi - lo]
            return (self._lattice(idx) + u) / self.k
        cols = [radical_inverse(idx + 1, b) for b in first_primes(self.dim)]
        return np.stack(cols, axis=-1)

    def chunk(self, c: int, count: int) -> np.ndarray:
        """Points with indices [c*CHUNK, min((c+1)*CHUNK, count))."""
        lo = c * CHUNK
        hi = min(lo + CHUNK, count)
        x = self._chunk(c, lo, hi)
        return x * x if self.warp else x

    def points(self, count: Optional[int] = None) -> np.ndarray:
        count = self.natural_count() if count is None else count
        if count is None:
            raise ValueError(f"{self.kind} sampler needs an explicit count")
        nchunks = -(-count // CHUNK)
        if nchunks == 0:
            return np.zeros((0, self.dim))
        return np.concatenate([self.chunk(c, count) for c in range(nchunks)], axis=0)


def parse_sampler(text: str, dim: int, seed: int = 0, warp: bool = False) -> SamplerSpec:
    """'random', 'grid:K', 'stratified:K', 'halton'."""
    kind, _, arg = text.partition(":")
    k = None
    if kind in ("grid", "stratified"):
        try:
            k = int(arg)
        except ValueError:
            raise ValueError(f"sampler {text!r} needs an integer k") from None
    elif arg:
        raise ValueError(f"sampler {kind!r} takes no parameter")
    return SamplerSpec(kind, dim, k=k, seed=seed, warp=warp)
