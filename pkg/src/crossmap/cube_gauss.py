"""Unit cube with Lebesgue measure <-> R^d with the standard Gaussian measure."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import DomainError, erfc, erfc_inv

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GaussianMeasure:
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("variance parameter c must be positive")


def check_cube(x, clamp: bool = False) -> np.ndarray:
    """Validate (or clamp) points of the open unit cube, shape ``(..., d)``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("cube coordinates must be finite")
    if clamp:
        return np.clip(x, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    if np.any((x <= 0.0) | (x >= 1.0)):
        raise DomainError("cube coordinates must lie strictly inside (0, 1)")
    return x


def phi_rd(x, clamp: bool = False) -> np.ndarray:
    """Componentwise sqrt(2) erfinv(2x - 1).

    Evaluated as -sqrt(2) erfcinv(2x) below the centre and through 1 - x
    above it (exact there), so both tails keep full precision.
    """
    x = check_cube(x, clamp=clamp)
    lo = x < 0.5
    tail = np.where(lo, x, 1.0 - x)
    y = SQRT2 * np.asarray(erfc_inv(2.0 * tail))
    return np.where(lo, -y, y)


def phi_rd_inv(y) -> np.ndarray:
    """x_i = (1 + erf(y_i / sqrt 2)) / 2, kept strictly inside (0, 1)."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("Euclidean coordinates must be finite")
    lower = 0.5 * np.asarray(erfc(-y / SQRT2))
    upper = 1.0 - 0.5 * np.asarray(erfc(y / SQRT2))
    x = np.where(y < 0, lower, upper)
    return np.clip(x, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
