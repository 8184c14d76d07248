"""Explicit cube maps for the cases with a closed formula.

These evaluate the formulas literally (tan-form homogeneous vectors for the
projective spaces, then normalized and phase-fixed) and serve both as a fast
path and as an independent check of the generic composition.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .cube_gauss import phi_rd


def _unit(u):
    return u / np.sqrt(np.sum(u * u, axis=-1, keepdims=True))


def _direction(y):
    r = np.sqrt(np.sum(y * y, axis=-1, keepdims=True))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(r > 0, y / r, 0.0), r[..., 0]


def _homogeneous(u, tail_len):
    # (u, 1) with a real unit last coordinate, then normalized
    last = np.zeros(u.shape[:-1] + (tail_len,))
    last[..., 0] = 1.0
    return _unit(np.concatenate([u, last], axis=-1))


def ball(x):
    y = phi_rd(x)
    n = y.shape[-1]
    e, r = _direction(y)
    return e * (special.gammainc(n / 2, r * r / 2) ** (1.0 / n))[..., None]


def sphere1(x):
    t = 2 * math.pi * np.asarray(x, dtype=float)[..., 0]
    return np.stack([-np.sin(t), -np.cos(t)], axis=-1)


def sphere2(x):
    e, r = _direction(phi_rd(x))
    r2 = r * r
    h = 2 * np.exp(-r2 / 4) * np.sqrt(1 - np.exp(-r2 / 2))
    return np.concatenate([e * h[..., None], (2 * np.exp(-r2 / 2) - 1)[..., None]], axis=-1)


def rp1(x):
    x = np.asarray(x, dtype=float)
    return _homogeneous(-1.0 / np.tan(math.pi * x), 1)


def rp2(x):
    e, r = _direction(phi_rd(x))
    return _homogeneous(e * np.sqrt(np.exp(r * r) - 1)[..., None], 1)


def cp1(x):
    e, r = _direction(phi_rd(x))
    return _homogeneous(e * np.sqrt(np.exp(r * r / 2) - 1)[..., None], 2)


def cpn(x):
    y = phi_rd(x)
    n = y.shape[-1] // 2
    e, r = _direction(y)
    g = special.gammainc(n, r * r / 2)  # gamma(n, .)/(n-1)!
    return _homogeneous(e * np.sqrt(-1 + 1 / (1 - g ** (1.0 / n)))[..., None], 2)


def hopf(y, t):
    """(-i e^{-i 2 pi t}) times the unit representative of the CP^n closed form."""
    base = cpn(y)
    t = np.asarray(t, dtype=float)
    zr, zi = -np.sin(2 * math.pi * t), -np.cos(2 * math.pi * t)
    b = base.reshape(base.shape[:-1] + (-1, 2))
    re = b[..., 0] * zr[..., None] - b[..., 1] * zi[..., None]
    im = b[..., 0] * zi[..., None] + b[..., 1] * zr[..., None]
    return np.stack([re, im], axis=-1).reshape(base.shape)


def hopf_s3(y, t):
    """Explicit S^3 formula in C^2 (interleaved re/im)."""
    e, r = _direction(phi_rd(y))
    t = np.asarray(t, dtype=float)
    z = -1j * np.exp(-2j * math.pi * t)
    w = e[..., 0] + 1j * e[..., 1]
    a = z * w * np.sqrt(1 - np.exp(-r * r / 2))
    b = z * np.exp(-r * r / 4)
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def closed_form_map(space):
    """The closed-form evaluator for a space descriptor, or None."""
    kind, n = space.kind, getattr(space, "n", None)
    if kind == "sphere" and n == 1:
        return sphere1
    if kind == "sphere" and n == 2:
        return sphere2
    if kind == "rp" and n == 1:
        return rp1
    if kind == "rp" and n == 2:
        return rp2
    if kind == "cp":
        return cp1 if n == 1 else cpn
    return None
