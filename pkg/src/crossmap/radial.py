"""Radial transport from the standard Gaussian on R^d to radial measures.

A profile describes a probability measure ``omega(|x|) dx`` on the ball
``B^d(0, R)``.  The transport ``y -> y rho(|y|) / |y|`` matches the radial
cumulative functions: ``cdf(rho(r)) = P(d/2, r^2/2)`` with ``P`` the
regularized lower incomplete gamma function.

Profiles work in the normalized radial CDF ``cdf = surface(d) * G``; the
un-normalized ``G`` of the weight is available as :meth:`RadialProfile.G`.
"""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from . import specfun
from .specfun import DomainError, QuadratureSpec, RootSpec, gammainc_inv, integrate

# ρ is kept this far (relative) below a finite outer radius
CAP_EPS = float(np.finfo(float).eps)
_TABLE_SIZE = 2049


class NormalizationError(ValueError):
    pass


def sphere_surface(d: int) -> float:
    """Area of the unit sphere S^(d-1) in R^d: 2 pi^(d/2) / Gamma(d/2)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def _norms(y):
    return np.sqrt(np.sum(y * y, axis=-1))


class RadialProfile:
    """Base class; subclasses supply the CDF pieces and closed forms."""

    kind = "abstract"

    def __init__(self, d: int, R: float):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.d = int(d)
        self.R = float(R)
        self._table = None

    # ---- pieces supplied by subclasses -------------------------------------

    def cdf(self, rho):
        """Probability mass of the ball of radius ``rho``."""
        raise NotImplementedError

    def sf(self, rho):
        return 1.0 - np.asarray(self.cdf(rho))

    def tail(self, delta):
        """Mass within ``delta`` of the outer radius (finite R only)."""
        return self.sf(self.R - np.asarray(delta, dtype=float))

    def radial_density(self, rho):
        """d cdf / d rho = surface(d) * omega(rho) * rho^(d-1)."""
        raise NotImplementedError

    def omega(self, s):
        s = np.asarray(s, dtype=float)
        return np.asarray(self.radial_density(s)) / (sphere_surface(self.d) * s ** (self.d - 1))

    def _rho_closed(self, r, p, q):
        return None

    def _r_closed(self, rho):
        return None

    @property
    def closed_form(self) -> bool:
        return type(self)._rho_closed is not RadialProfile._rho_closed

    # ---- derived quantities -------------------------------------------------

    def G(self, rho):
        """int_0^rho omega(s) s^(d-1) ds."""
        return np.asarray(self.cdf(rho)) / sphere_surface(self.d)

    def normalization(self) -> float:
        """surface(d) * G(R); equals 1 for a probability measure."""
        return float(self.cdf(self.R)) if math.isfinite(self.R) else 1.0

    def _lookup(self):
        if self._table is None and math.isfinite(self.R):
            grid = np.linspace(0.0, self.R, _TABLE_SIZE)
            lower = np.maximum.accumulate(np.asarray(self.cdf(grid)))
            upper = np.maximum.accumulate(np.asarray(self.tail(grid)))
            self._table = (grid, lower, upper)
        return self._table

    def _bracket_inf(self, level, upper: bool):
        hi = 1.0
        while True:
            val = self.sf(hi) if upper else self.cdf(hi)
            if (val <= level) if upper else (val >= level):
                return hi
            hi *= 2.0
            if hi > 1e300:
                raise specfun.ConvergenceError("no bracket for the radius map")

    def _invert_cdf(self, p, q, spec: RootSpec):
        """Radii with cdf = p (lower half) or tail mass = q (upper half)."""
        rho = np.zeros_like(p)
        table = self._lookup()
        lower = (p <= 0.5) & (p > 0)
        upper = (p > 0.5) & (q > 0)
        finite = math.isfinite(self.R)
        if np.any(lower):
            pl = p[lower]
            if finite:
                hi, x0 = self.R, np.interp(pl, table[1], table[0])
            else:
                hi, x0 = self._bracket_inf(pl.max(), upper=False), None
            rho[lower] = specfun.solve_monotone(
                self.cdf, pl, 0.0, hi, spec=spec, dg=self.radial_density, x0=x0)
        if np.any(upper):
            qu = q[upper]
            if finite:
                x0 = np.interp(qu, table[2], table[0])
                delta = specfun.solve_monotone(
                    self.tail, qu, 0.0, self.R, spec=spec,
                    dg=lambda t: self.radial_density(self.R - t), x0=x0)
                rho[upper] = self.R - delta
            else:
                hi = self._bracket_inf(qu.min(), upper=True)
                rho[upper] = specfun.solve_monotone(
                    lambda t: -np.asarray(self.sf(t)), -qu, 0.0, hi, spec=spec,
                    dg=self.radial_density)
        if finite:
            rho[q <= 0] = self.R
        else:
            rho[q <= 0] = np.inf
        return rho

    def rho_of_r(self, r, numeric: bool = False, spec: RootSpec = RootSpec()):
        """Radius map: the rho with cdf(rho) = P(d/2, r^2/2).

        ``numeric=True`` skips any closed form and inverts the CDF with the
        safeguarded Newton solver.
        """
        r = np.asarray(r, dtype=float)
        if np.any(~(r >= 0)):
            raise DomainError("rho_of_r requires r >= 0")
        r1 = np.atleast_1d(r).ravel()
        x = 0.5 * r1 * r1
        a = 0.5 * self.d
        p = np.atleast_1d(specfun.gammainc_p(a, x))
        q = np.atleast_1d(specfun.gammainc_q(a, x))
        rho = None if numeric else self._rho_closed(r1, p, q)
        if rho is None:
            rho = self._invert_cdf(p, q, spec)
        rho = np.where(r1 == 0, 0.0, rho)
        if math.isfinite(self.R):
            rho = np.minimum(rho, self.R * (1.0 - CAP_EPS))
        return specfun._out(rho.reshape(r.shape))

    def r_of_rho(self, rho, numeric: bool = False):
        """Inverse radius map, defined on [0, R)."""
        rho = np.asarray(rho, dtype=float)
        if np.any(~((rho >= 0) & (rho < self.R))):
            raise DomainError(f"r_of_rho requires 0 <= rho < {self.R}")
        rho1 = np.atleast_1d(rho).ravel()
        r = None if numeric else self._r_closed(rho1)
        if r is None:
            p = np.atleast_1d(self.cdf(rho1))
            q = np.atleast_1d(self.sf(rho1))
            if self.d == 2:
                # P(1, x) = 1 - e^-x
                x = np.where(p <= 0.5, -np.log1p(-p), -np.log(np.where(q > 0, q, 1.0)))
            else:
                x = np.asarray(gammainc_inv(0.5 * self.d, p, q))
            r = np.sqrt(2.0 * x)
        r = np.where(rho1 == 0, 0.0, r)
        return specfun._out(np.asarray(r).reshape(rho.shape))

    def varphi(self, y, numeric: bool = False):
        """Vector map y -> y rho(|y|)/|y| (0 -> 0), rows along the last axis."""
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.d:
            raise ValueError(f"expected points of dimension {self.d}, got {y.shape[-1]}")
        r = _norms(y)
        rho = np.asarray(self.rho_of_r(r, numeric=numeric))
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(r > 0, rho / r, 0.0)
        return y * scale[..., None]

    def varphi_inv(self, v, numeric: bool = False):
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.d:
            raise ValueError(f"expected points of dimension {self.d}, got {v.shape[-1]}")
        s = _norms(v)
        if np.any(s >= self.R):
            raise DomainError(f"chart vector outside B(0, {self.R})")
        r = np.asarray(self.r_of_rho(s, numeric=numeric))
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(s > 0, r / s, 0.0)
        return v * scale[..., None]

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d}, R={self.R})"


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------

class BallProfile(RadialProfile):
    """Uniform measure on the unit ball: cdf = rho^d."""

    kind = "ball"

    def __init__(self, d: int):
        super().__init__(d, 1.0)

    def cdf(self, rho):
        return np.asarray(rho, dtype=float) ** self.d

    def sf(self, rho):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            return -np.expm1(self.d * np.log(rho))

    def tail(self, delta):
        with np.errstate(divide="ignore"):
            return -np.expm1(self.d * np.log1p(-np.asarray(delta, dtype=float)))

    def radial_density(self, rho):
        return self.d * np.asarray(rho, dtype=float) ** (self.d - 1)

    def omega(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.d / sphere_surface(self.d))

    def _rho_closed(self, r, p, q):
        with np.errstate(divide="ignore"):
            lo = np.exp(np.log(p) / self.d)
            hi = np.exp(np.log1p(-q) / self.d)
        return np.where(p <= 0.5, lo, hi)


class CrossProfile(RadialProfile):
    """Pullback density Omega/V of a compact rank one symmetric space.

    ``r^(d-1) Omega(r) = sin^a(r) cos^b(r)`` on ``(0, D)``.
    """

    def __init__(self, kind: str, n: int, d: int, a: int, b: int, D: float, V: float,
                 quadrature: bool = False):
        super().__init__(d, D)
        self.kind = kind
        self.n = n
        self.a = a
        self.b = b
        self.V = V
        if kind == "sphere":
            self._total = specfun.sin_power_total(a)
        else:
            self._total = specfun.beta_half(a, b)
        norm = sphere_surface(d) * self._total / V
        if abs(norm - 1.0) > 1e-10:
            raise NormalizationError(f"{kind}({n}): surface * G(D) = {norm!r}")
        # closed antiderivatives where they exist; quadrature otherwise
        self.closed_G = not quadrature and (kind == "cp" or (kind in ("sphere", "rp") and n <= 2))

    def _head(self, rho):
        # int_0^rho sin^a cos^b / total, rho <= D/2
        rho = np.asarray(rho, dtype=float)
        if self.closed_G:
            if self.n == 1 and self.kind != "cp":
                return rho / self.R
            if self.kind == "sphere":
                return np.sin(0.5 * rho) ** 2
            if self.kind == "rp":
                return 2.0 * np.sin(0.5 * rho) ** 2
            return np.sin(rho) ** (2 * self.n)
        return np.asarray(specfun.sin_cos_integral(self.a, self.b, rho)) / self._total

    def tail(self, delta):
        delta = np.asarray(delta, dtype=float)
        if self.closed_G:
            if self.n == 1 and self.kind != "cp":
                return delta / self.R
            if self.kind == "sphere":
                return np.sin(0.5 * delta) ** 2
            if self.kind == "rp":
                return np.sin(delta)
            # 1 - cos^(2n)(delta)
            with np.errstate(divide="ignore"):
                return -np.expm1(self.n * np.log1p(-np.sin(delta) ** 2))
        if self.kind == "sphere":
            return np.asarray(specfun.sin_cos_integral(self.a, 0, delta)) / self._total
        # int_{D-delta}^{D} sin^a cos^b = int_0^delta cos^a sin^b
        return np.asarray(specfun.sin_cos_integral(self.b, self.a, delta)) / self._total

    def cdf(self, rho):
        rho = np.asarray(rho, dtype=float)
        half = 0.5 * self.R
        return np.where(rho <= half, self._head(np.minimum(rho, half)),
                        1.0 - self.tail(self.R - np.maximum(rho, half)))

    def sf(self, rho):
        rho = np.asarray(rho, dtype=float)
        half = 0.5 * self.R
        return np.where(rho >= half, self.tail(self.R - np.maximum(rho, half)),
                        1.0 - self._head(np.minimum(rho, half)))

    def radial_density(self, rho):
        rho = np.asarray(rho, dtype=float)
        v = np.sin(rho) ** self.a
        if self.b:
            v = v * np.cos(rho) ** self.b
        return v / self._total

    def omega(self, s):
        # Table-1 form Omega/V, independent of the normalization above
        s = np.asarray(s, dtype=float)
        v = np.sin(s) ** self.a
        if self.b:
            v = v * np.cos(s) ** self.b
        return v / (self.V * s ** (self.d - 1))

    def _rho_closed(self, r, p, q):
        lower = p <= 0.5
        if self.kind == "sphere" and self.n == 1:
            return np.where(lower, math.pi * p, math.pi - math.pi * q)
        if self.kind == "rp" and self.n == 1:
            return np.where(lower, 0.5 * math.pi * p, 0.5 * math.pi - 0.5 * math.pi * q)
        if self.kind == "sphere" and self.n == 2:
            # sin^2(rho/2) = P, cos^2(rho/2) = Q
            return 2.0 * np.arctan2(np.sqrt(p), np.sqrt(q))
        if self.kind == "rp" and self.n == 2:
            # cos(rho) = Q
            return np.arctan2(np.sqrt(p * (1.0 + q)), q)
        if self.kind == "cp":
            # sin^(2n)(rho) = P
            with np.errstate(divide="ignore"):
                lp = np.where(lower, np.log(p), np.log1p(-q)) / self.n
            return np.arctan2(np.sqrt(np.exp(lp)), np.sqrt(-np.expm1(lp)))
        return None

    def __repr__(self):
        return f"CrossProfile({self.kind}, n={self.n})"


class GaussianProfile(RadialProfile):
    """N(0, b) on R^d; the radius map is rho = r sqrt(b)."""

    kind = "gaussian"

    def __init__(self, d: int, b: float = 1.0):
        super().__init__(d, math.inf)
        if not b > 0:
            raise ValueError("variance b must be positive")
        self.b = float(b)

    def cdf(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.asarray(specfun.gammainc_p(0.5 * self.d, rho * rho / (2 * self.b)))

    def sf(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.asarray(specfun.gammainc_q(0.5 * self.d, rho * rho / (2 * self.b)))

    def radial_density(self, rho):
        rho = np.asarray(rho, dtype=float)
        d = self.d
        return (rho ** (d - 1) * np.exp(-rho * rho / (2 * self.b))
                / (self.b ** (d / 2) * 2 ** (d / 2 - 1) * math.gamma(d / 2)))

    def _rho_closed(self, r, p, q):
        return r * math.sqrt(self.b)

    def _r_closed(self, rho):
        return rho / math.sqrt(self.b)


class Stereographic2DProfile(RadialProfile):
    """Pullback of the uniform S^2 measure by stereographic projection."""

    kind = "stereo2d"

    def __init__(self):
        super().__init__(2, math.inf)

    def cdf(self, rho):
        rho = np.asarray(rho, dtype=float)
        return rho * rho / (1.0 + rho * rho)

    def sf(self, rho):
        rho = np.asarray(rho, dtype=float)
        return 1.0 / (1.0 + rho * rho)

    def radial_density(self, rho):
        rho = np.asarray(rho, dtype=float)
        return 2.0 * rho / (1.0 + rho * rho) ** 2

    def _rho_closed(self, r, p, q):
        return np.sqrt(np.expm1(0.5 * r * r))

    def _r_closed(self, rho):
        return np.sqrt(2.0 * np.log1p(rho * rho))


class CustomProfile(RadialProfile):
    """User-supplied radial weight; G by adaptive quadrature."""

    kind = "custom"

    def __init__(self, omega: Callable, R: float, d: int, auto_normalize: bool = False,
                 quad: QuadratureSpec = QuadratureSpec()):
        super().__init__(d, R)
        self._omega = omega
        self._quad = quad
        self._scale = 1.0
        total = self._mass(R)
        if abs(total - 1.0) > 1e-8:
            if not auto_normalize:
                raise NormalizationError(f"weight integrates to {total!r}, not 1")
            self._scale = 1.0 / total

    def _weight(self, s):
        s = np.asarray(s, dtype=float)
        return sphere_surface(self.d) * np.asarray(self._omega(s), dtype=float) * s ** (self.d - 1)

    def _mass(self, rho):
        if math.isinf(rho):
            # s = u / (1 - u) maps [0, 1) onto [0, inf)
            def f(u):
                u = np.asarray(u, dtype=float)
                return self._weight(u / (1.0 - u)) / (1.0 - u) ** 2
            return integrate(f, 0.0, 1.0, self._quad)
        return integrate(self._weight, 0.0, rho, self._quad)

    def cdf(self, rho):
        rho = np.asarray(rho, dtype=float)
        vals = np.array([self._mass(t) for t in np.atleast_1d(rho).ravel()])
        return (self._scale * vals).reshape(rho.shape)

    def radial_density(self, rho):
        return self._scale * self._weight(rho)

    def omega(self, s):
        return self._scale * np.asarray(self._omega(np.asarray(s, dtype=float)), dtype=float)


def cross_profile(kind: str, n: int = 2, quadrature: bool = False) -> CrossProfile:
    """Profile of a compact rank one symmetric space (Table of d, D, V).

    ``quadrature=True`` evaluates G by quadrature even when a closed
    antiderivative is available.
    """
    pi = math.pi
    q = {"quadrature": quadrature}
    if kind == "sphere":
        if n < 1:
            raise ValueError("sphere dimension must be >= 1")
        return CrossProfile("sphere", n, n, n - 1, 0, pi,
                            2 * pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2), **q)
    if kind == "rp":
        if n < 1:
            raise ValueError("rp dimension must be >= 1")
        return CrossProfile("rp", n, n, n - 1, 0, pi / 2,
                            pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2), **q)
    if kind == "cp":
        if n < 1:
            raise ValueError("cp dimension must be >= 1")
        return CrossProfile("cp", n, 2 * n, 2 * n - 1, 1, pi / 2,
                            pi ** n / math.factorial(n), **q)
    if kind == "hp":
        if n < 1:
            raise ValueError("hp dimension must be >= 1")
        return CrossProfile("hp", n, 4 * n, 4 * n - 1, 3, pi / 2,
                            pi ** (2 * n) / math.factorial(2 * n + 1), **q)
    if kind == "op2":
        return CrossProfile("op2", 2, 16, 15, 7, pi / 2, pi ** 8 / (1320 * math.gamma(8)), **q)
    raise ValueError(f"unknown space kind {kind!r}")


def make_profile(kind: str, n: Optional[int] = None, *, b: float = 1.0,
                 omega: Optional[Callable] = None, R: Optional[float] = None,
                 d: Optional[int] = None, auto_normalize: bool = False,
                 quadrature: bool = False) -> RadialProfile:
    """Build a catalogued profile.

    kinds: ``ball`` (n = d), ``sphere``/``rp``/``cp``/``hp`` (n), ``op2``,
    ``gaussian`` (n = d, variance ``b``), ``stereo2d``, ``custom``
    (``omega``, ``R``, ``d``).
    """
    if kind == "ball":
        if n is None or n < 1:
            raise ValueError("ball needs a dimension >= 1")
        return BallProfile(n)
    if kind in ("sphere", "rp", "cp", "hp"):
        if n is None:
            raise ValueError(f"{kind} needs a dimension parameter")
        return cross_profile(kind, n, quadrature)
    if kind == "op2":
        return cross_profile("op2", quadrature=quadrature)
    if kind == "gaussian":
        if n is None or n < 1:
            raise ValueError("gaussian needs a dimension >= 1")
        return GaussianProfile(n, b)
    if kind == "stereo2d":
        return Stereographic2DProfile()
    if kind == "custom":
        if omega is None or R is None or d is None:
            raise ValueError("custom profile needs omega, R and d")
        return CustomProfile(omega, R, d, auto_normalize=auto_normalize)
    raise ValueError(f"unknown profile kind {kind!r}")
