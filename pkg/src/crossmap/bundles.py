"""Products of targets and fiber-bundle compositions (Hopf fibration)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .crosses import CrossSpace, complex_proj, canonicalize, sphere
from .specfun import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ProductSpace:
    """Ordered product of targets; the cube splits coordinate-wise."""

    factors: tuple

    def __init__(self, factors: Sequence):
        if not factors:
            raise ValueError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(factors))

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    total_dim = dim

    @property
    def ambient_dim(self):
        return sum(f.ambient_dim for f in self.factors)

    @property
    def name(self):
        return "x".join(f.name for f in self.factors)

    def _cuts(self, attr):
        return np.cumsum([getattr(f, attr) for f in self.factors])[:-1]

    def split(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected cube points of dimension {self.dim}, got {x.shape[-1]}")
        return np.split(x, self._cuts("dim"), axis=-1)

    def split_ambient(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.ambient_dim:
            raise ValueError(f"expected points of length {self.ambient_dim}")
        return np.split(p, self._cuts("ambient_dim"), axis=-1)

    def phi_product(self, x, **kw):
        return tuple(f.phi(xi, **kw) for f, xi in zip(self.factors, self.split(x)))

    def phi(self, x, **kw):
        return np.concatenate(self.phi_product(x, **kw), axis=-1)

    def phi_inv(self, p, **kw):
        parts = p if isinstance(p, tuple) else self.split_ambient(p)
        return np.concatenate([f.phi_inv(pi, **kw) for f, pi in zip(self.factors, parts)],
                              axis=-1)

    def distance_to_base(self, p):
        """Per-factor distances, shape (..., number of factors)."""
        parts = self.split_ambient(p)
        return np.stack([f.distance_to_base(pi) for f, pi in zip(self.factors, parts)], axis=-1)

    def check_points(self, p, tol=1e-12):
        parts = self.split_ambient(p)
        ok = [f.check_points(pi, tol) for f, pi in zip(self.factors, parts)]
        return np.logical_and.reduce(ok)


def phi_product(space: ProductSpace, x, **kw):
    return space.phi_product(x, **kw)


@dataclass(frozen=True)
class FiberSpec:
    """E = xi(B x F): base map, fiber map and fiber placement (y, z) -> Psi_y(z)."""

    base: object
    fiber: object
    place: Callable

    @property
    def dim(self):
        return self.base.dim + self.fiber.dim

    def phi(self, x, **kw):
        x = np.asarray(x, dtype=float)
        db = self.base.dim
        return self.place(self.base.phi(x[..., :db], **kw), self.fiber.phi(x[..., db:], **kw))


def _cmul(z, p):
    # unimodular complex z (..., 2) times every coordinate of p in C^m
    b = p.reshape(p.shape[:-1] + (-1, 2))
    zr, zi = z[..., None, 0], z[..., None, 1]
    re = b[..., 0] * zr - b[..., 1] * zi
    im = b[..., 0] * zi + b[..., 1] * zr
    return np.stack([re, im], axis=-1).reshape(p.shape)


def hopf_place(base_point, z):
    """Psi_y(zeta) = zeta * y for a unit representative y."""
    return _cmul(np.asarray(z, dtype=float), np.asarray(base_point, dtype=float))


class HopfTarget:
    """S^(2n+1) in C^(n+1) as the circle bundle over CP^n."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("Hopf parameter n must be >= 1")
        self.n = int(n)
        self.base = complex_proj(self.n)
        self.fiber = sphere(1)
        self.sphere = sphere(2 * self.n + 1)
        self.spec = FiberSpec(self.base, self.fiber, hopf_place)

    @property
    def sphere_dim(self):
        return 2 * self.n + 1

    dim = sphere_dim

    @property
    def ambient_dim(self):
        return 2 * self.n + 2

    @property
    def name(self):
        return f"Hopf{self.n}"

    @property
    def profile(self):
        return self.sphere.profile

    def phi(self, x, **kw):
        return self.spec.phi(x, **kw)

    def phi_inv(self, p, numeric=False):
        p = np.asarray(p, dtype=float)
        b = p.reshape(p.shape[:-1] + (-1, 2))
        last = b[..., -1, :]
        m = np.sqrt(np.sum(last * last, axis=-1))
        if np.any(m == 0):
            raise DomainError("point in the exceptional set (last coordinate zero)")
        zeta = last / m[..., None]
        # i zeta = e^{-i 2 pi t}
        t = np.mod(-np.arctan2(zeta[..., 0], -zeta[..., 1]) / TWO_PI, 1.0)
        y = self.base.phi_inv(hopf_project(p), numeric=numeric)
        return np.concatenate([y, t[..., None]], axis=-1)

    def distance_to_base(self, p):
        return self.sphere.distance_to_base(p)

    def radial_cdf(self, t):
        return self.sphere.radial_cdf(t)

    def check_points(self, p, tol=1e-12):
        return self.sphere.check_points(p, tol)


def phi_hopf(target: HopfTarget, y, t, **kw):
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    return target.phi(np.concatenate([y, t[..., None]], axis=-1), **kw)


def hopf_project(p, space: CrossSpace = None):
    """h(p) = [p]: canonical unit representative in CP^n."""
    p = np.asarray(p, dtype=float)
    if space is None:
        space = complex_proj(p.shape[-1] // 2 - 1)
    return canonicalize(space, p)
