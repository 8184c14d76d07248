"""Special functions and numerical kernels.

Everything here works elementwise on numpy arrays (scalars are accepted and
returned as 0-d results converted back to float).  Iterative routines freeze
each element once it has converged, so a result never depends on which other
elements were evaluated in the same call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special as _sp

SQRT_PI = math.sqrt(math.pi)
_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


class SpecfunError(ArithmeticError):
    """Base class for numerical failures in this package."""


class DomainError(SpecfunError, ValueError):
    pass


class ConvergenceError(SpecfunError):
    pass


class BracketError(SpecfunError, ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    max_subdivisions: int = 60
    rule_order: int = 15

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.rule_order < 1:
            raise ValueError("rule_order must be >= 1")


@dataclass(frozen=True)
class RootSpec:
    """Stopping rules for :func:`solve_monotone`.

    Both tolerances are relative: ``f_tol`` to ``|target|`` (absolute when
    the target is 0) and ``x_tol`` to ``|x|``, which keeps tiny roots
    resolved to full relative precision.
    """

    x_tol: float = 1e-12
    f_tol: float = 1e-14
    max_iter: int = 200

    def __post_init__(self):
        if not (self.x_tol > 0 and self.f_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


# --------------------------------------------------------------------------
# error function and its inverses
# --------------------------------------------------------------------------

def erf(t):
    return _out(_sp.erf(np.asarray(t, dtype=float)))


def erfc(t):
    return _out(_sp.erfc(np.asarray(t, dtype=float)))


def _giles_guess(w, u):
    # single-precision rational approximation of erfinv(u), w = -log(1 - u^2)
    central = w < 5.0
    wc = w - 2.5
    p1 = 2.81022636e-08
    for c in (3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
              -0.00125372503, -0.00417768164, 0.246640727, 1.50140941):
        p1 = c + p1 * wc
    wt = np.sqrt(w) - 3.0
    p2 = -0.000200214257
    for c in (0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
              -0.0076224613, 0.00943887047, 1.00167406, 2.83297682):
        p2 = c + p2 * wt
    return np.where(central, p1, p2) * u


def _halley(x, residual, max_steps=8):
    # f = erf(x) - u (or erfc(x) - q); f''/f' = -2x for both
    active = np.ones(x.shape, dtype=bool)
    for _ in range(max_steps):
        if not active.any():
            break
        f, fprime = residual(x)
        delta = f / fprime
        xn = x - delta / (1.0 + x * delta)
        x = np.where(active, xn, x)
        active &= np.abs(delta) > _EPS * np.abs(x)
    return x


def erf_inv(u):
    """Inverse error function on (-1, 1).

    Rational initial guess followed by two Halley steps on ``erf``.  For
    ``|u| > 0.5`` the refinement runs on ``erfc`` so the tail keeps its
    relative accuracy.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~(np.abs(u) < 1.0)):
        raise DomainError("erf_inv requires |u| < 1")
    au = np.abs(u)
    x = np.zeros_like(u)
    small = au <= 0.5
    if np.any(small):
        us = u[small]
        x0 = _giles_guess(-np.log1p(-us * us), us)
        x[small] = _halley(
            x0, lambda z: (_sp.erf(z) - us, 2.0 / SQRT_PI * np.exp(-z * z)))
    big = ~small
    if np.any(big):
        x[big] = np.sign(u[big]) * _erfc_inv_pos(1.0 - au[big])
    return _out(x)


def _erfc_inv_pos(q):
    # q in (0, 1]: returns x >= 0 with erfc(x) = q
    q = np.atleast_1d(np.asarray(q, dtype=float))
    w = -np.log(q * (2.0 - q))
    x0 = np.array(_giles_guess(np.minimum(w, 16.0), 1.0 - q), dtype=float)
    tail = w > 16.0
    if np.any(tail):
        # erfc(x) ~ exp(-x^2) / (x sqrt(pi)) beyond the rational fit's range
        lq = -np.log(q[tail])
        xt = np.sqrt(lq)
        for _ in range(4):
            xt = np.sqrt(lq - np.log(xt * SQRT_PI))
        x0[tail] = xt

    def residual(z):
        # (erfc(z) - q) / (-2/sqrt(pi) e^{-z^2}) without underflow
        # q / erfc(z) in log space: erfc itself underflows near the subnormals
        ex = _sp.erfcx(z)
        ratio = np.exp(np.log(q) + z * z - np.log(ex))
        return -(1.0 - ratio) * SQRT_PI / 2.0 * ex, 1.0

    # residual hands back f/f' directly, with f' = 1
    return _halley(x0, residual)


def erfc_inv(q):
    """Inverse complementary error function on (0, 2)."""
    q = np.asarray(q, dtype=float)
    if np.any(~((q > 0.0) & (q < 2.0))):
        raise DomainError("erfc_inv requires 0 < q < 2")
    upper = q > 1.0
    x = _erfc_inv_pos(np.where(upper, 2.0 - q, q)).reshape(q.shape)
    return _out(np.where(upper, -x, x))


# --------------------------------------------------------------------------
# incomplete gamma
# --------------------------------------------------------------------------

def _check_gamma_args(a, x):
    a = float(a)
    if not a > 0:
        raise DomainError("incomplete gamma requires a > 0")
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError("incomplete gamma requires x >= 0")
    return a, x


def _p_series(a, x, max_terms=1000):
    # P(a,x) = x^a e^-x / Gamma(a+1) * sum_j x^j / ((a+1)...(a+j))
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = x > 0
    for j in range(1, max_terms):
        if not active.any():
            break
        term = np.where(active, term * x / (a + j), term)
        total = np.where(active, total + term, total)
        active &= term > 0.25 * _EPS * total
    with np.errstate(divide="ignore"):
        pref = np.exp(a * np.log(x) - x - math.lgamma(a + 1.0))
    return np.where(x > 0, pref * total, 0.0)


def _q_contfrac(a, x, max_terms=1000):
    # modified Lentz evaluation of the continued fraction for Q(a,x), x > a
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, max_terms):
        if not active.any():
            break
        an = -i * (i - a)
        b = b + 2.0
        dn = an * d + b
        dn = np.where(np.abs(dn) < tiny, tiny, dn)
        cn = b + an / c
        cn = np.where(np.abs(cn) < tiny, tiny, cn)
        dn = 1.0 / dn
        delta = dn * cn
        d = np.where(active, dn, d)
        c = np.where(active, cn, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > 0.25 * _EPS
    return np.exp(-x + a * np.log(x) - math.lgamma(a)) * h


def _q_integer(n, x):
    # Q(n,x) = e^-x sum_{k<n} x^k/k!, summed from the largest term down
    total = np.ones_like(x)
    term = np.ones_like(x)
    for j in range(1, n):
        term = term * (n - j) / x
        total = total + term
    return np.exp((n - 1) * np.log(x) - x - math.lgamma(n) + np.log(total))


def _q_half_integer(m, x):
    # Q(m+1/2,x) = erfc(sqrt x) + e^-x sum_{k<m} x^(k+1/2)/Gamma(k+3/2)
    sx = np.sqrt(x)
    total = _sp.erfcx(sx)
    term = sx / math.gamma(1.5)
    for k in range(m):
        if k:
            term = term * x / (k + 0.5)
        total = total + term
    return np.exp(np.log(total) - x)


def _gamma_pq(a, x):
    """Regularized (P, Q) pair, each accurate where it is the smaller one."""
    p = np.empty_like(x)
    q = np.empty_like(x)
    two_a = 2.0 * a
    use_series = x < a + 1.0 if two_a != round(two_a) else x < a
    if np.any(use_series):
        ps = _p_series(a, x[use_series])
        p[use_series] = ps
        q[use_series] = 1.0 - ps
    rest = ~use_series
    if np.any(rest):
        xr = x[rest]
        if a == round(a):
            qs = _q_integer(int(round(a)), xr)
        elif two_a == round(two_a):
            qs = _q_half_integer(int(a - 0.5), xr)
        else:
            qs = _q_contfrac(a, xr)
        q[rest] = qs
        p[rest] = 1.0 - qs
    return p, q


def gammainc_p(a, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a)."""
    a, x = _check_gamma_args(a, x)
    x1 = np.atleast_1d(x)
    p, q = _gamma_pq(a, x1)
    # the smaller of the pair is the accurate one
    p = np.where(p <= 0.5, p, 1.0 - q)
    return _out(p.reshape(x.shape))


def gammainc_q(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    a, x = _check_gamma_args(a, x)
    x1 = np.atleast_1d(x)
    p, q = _gamma_pq(a, x1)
    q = np.where(q <= 0.5, q, 1.0 - p)
    return _out(q.reshape(x.shape))


def lower_incomplete_gamma(a, x):
    """gamma(a, x) = int_0^x s^(a-1) e^-s ds (not regularized)."""
    return _out(np.asarray(gammainc_p(a, x)) * math.gamma(float(a)))


def gammainc_inv(a, p, q=None):
    """Solve P(a, x) = p for x >= 0.

    If ``q = 1 - p`` is supplied it is used for the upper half, where it is
    the more accurate of the two.
    """
    a = float(a)
    if not a > 0:
        raise DomainError("gammainc_inv requires a > 0")
    p = np.asarray(p, dtype=float)
    q = 1.0 - p if q is None else np.broadcast_to(np.asarray(q, dtype=float), p.shape)
    if np.any((p < 0) | (q < 0)):
        raise DomainError("gammainc_inv requires probabilities in [0, 1]")
    shape = p.shape
    p = np.atleast_1d(p).astype(float).ravel()
    q = np.atleast_1d(q).astype(float).ravel()
    x = np.zeros_like(p)
    lg = math.lgamma(a)

    def dens(z):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            v = np.exp((a - 1.0) * np.log(z) - z - lg)
        return np.where(z > 0, v, np.where(a < 1, np.inf, float(a == 1)))

    if np.any(q == 0.0):
        x[q == 0.0] = np.inf
    lower = (p <= 0.5) & (p > 0)
    with np.errstate(divide="ignore"):
        # roots below the double range stay at 0
        lower &= (np.log(p) + math.lgamma(a + 1.0)) / a > math.log(_TINY)
    upper = (p > 0.5) & (q > 0)
    if np.any(lower):
        pl = p[lower]
        hi = np.full_like(pl, 2.0 * (a + 10.0))
        # leading term of the series: P ~ x^a / Gamma(a+1)
        x0 = np.exp((np.log(pl) + math.lgamma(a + 1.0)) / a)
        x[lower] = solve_monotone(lambda z: np.asarray(gammainc_p(a, z)), pl, 0.0, hi,
                                  dg=dens, x0=x0)
    if np.any(upper):
        qu = q[upper]
        lq = -np.log(np.maximum(qu, 1e-300))
        hi = 2.0 * (a + 10.0 + lq)
        # Q ~ x^(a-1) e^-x / Gamma(a) for large x
        x0 = np.maximum(lq + (a - 1.0) * np.log(np.maximum(lq, 1.0)) - lg, a)
        x[upper] = solve_monotone(lambda z: -np.asarray(gammainc_q(a, z)), -qu, 0.0, hi,
                                  dg=dens, x0=x0)
    return _out(x.reshape(shape))


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    """Nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def integrate(f: Callable, a: float, b: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Adaptive Gauss-Legendre quadrature of ``f`` over ``[a, b]``.

    Each panel is compared against the sum over its two halves and bisected
    until the difference drops below its share of ``abs_tol``.  ``f`` must
    accept an array of abscissae.
    """
    a = float(a)
    b = float(b)
    if not b >= a:
        raise ValueError("integrate requires a <= b")
    if a == b:
        return 0.0
    nodes, weights = gauss_legendre(spec.rule_order)

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        vals = np.asarray(f(lo + half * (nodes + 1.0)), dtype=float)
        return half * float(np.sum(weights * vals))

    total = 0.0
    width = b - a
    stack = [(a, b, panel(a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = panel(lo, mid)
        right = panel(mid, hi)
        err = abs(left + right - whole)
        if err <= spec.abs_tol * (hi - lo) / width or err <= 4 * _EPS * abs(left + right):
            total += left + right
            continue
        if depth + 1 >= spec.max_subdivisions:
            raise ConvergenceError(
                f"quadrature did not reach abs_tol={spec.abs_tol} on [{lo}, {hi}]")
        stack.append((mid, hi, right, depth + 1))
        stack.append((lo, mid, left, depth + 1))
    return total


def sin_cos_integral(a: int, b: int, rho, order: int = 32, panels: int = 2):
    """int_0^rho sin^a(s) cos^b(s) ds, vectorized over ``rho``.

    Composite fixed Gauss-Legendre; the integrand is entire so this is at
    machine precision for rho in [0, pi] and the exponents used here.
    """
    rho = np.asarray(rho, dtype=float)
    nodes, weights = gauss_legendre(order)
    t = (np.arange(panels)[:, None] + 0.5 * (nodes[None, :] + 1.0)).ravel() / panels
    w = np.tile(weights, panels) / (2.0 * panels)
    s = rho[..., None] * t
    vals = np.sin(s) ** a
    if b:
        vals = vals * np.cos(s) ** b
    return _out(rho * np.sum(vals * w, axis=-1))


def incomplete_beta_sin(n: int, rho):
    """int_0^rho sin^(n-1)(r) dr for rho in [0, pi].

    Equals 2^(n-1) B_{sin^2(rho/2)}(n/2, n/2).  Evaluated as the shorter of
    the integral from 0 and the complement from pi, so both ends keep their
    relative accuracy.
    """
    n = int(n)
    if n < 1:
        raise DomainError("incomplete_beta_sin requires n >= 1")
    rho = np.asarray(rho, dtype=float)
    if np.any(~((rho >= 0) & (rho <= math.pi))):
        raise DomainError("incomplete_beta_sin requires 0 <= rho <= pi")
    full = sin_power_total(n - 1)
    lower = np.asarray(sin_cos_integral(n - 1, 0, np.minimum(rho, math.pi / 2)))
    upper = full - np.asarray(sin_cos_integral(n - 1, 0, math.pi - np.maximum(rho, math.pi / 2)))
    return _out(np.where(rho <= math.pi / 2, lower, upper))


def sin_power_total(m: int) -> float:
    """int_0^pi sin^m = sqrt(pi) Gamma((m+1)/2) / Gamma(m/2 + 1)."""
    return SQRT_PI * math.exp(math.lgamma((m + 1) / 2) - math.lgamma(m / 2 + 1))


def beta_half(a: int, b: int) -> float:
    """int_0^(pi/2) sin^a cos^b = B((a+1)/2, (b+1)/2) / 2."""
    return 0.5 * math.exp(math.lgamma((a + 1) / 2) + math.lgamma((b + 1) / 2)
                          - math.lgamma((a + b + 2) / 2))


# --------------------------------------------------------------------------
# root finding
# --------------------------------------------------------------------------

def _split_point(a, b):
    # geometric split for positive brackets spanning decades, so tiny roots
    # are reached in O(log log) steps instead of O(log)
    mid = 0.5 * (a + b)
    with np.errstate(invalid="ignore"):
        geo = np.sqrt(a) * np.sqrt(b)
    wide = (a > 0) & (b > 4.0 * a)
    split = np.where(wide, geo, mid)
    split = np.where((a == 0) & (b > 0), b * 2.0 ** -32, split)
    # underflow can put the split on an endpoint
    return np.where((split > a) & (split < b), split, mid)


def solve_monotone(g: Callable, target, lo, hi, spec: RootSpec = RootSpec(),
                   dg: Optional[Callable] = None, x0=None):
    """Solve ``g(x) = target`` for increasing ``g`` on ``[lo, hi]``.

    Newton steps with derivative ``dg`` when given, falling back to bisection
    whenever a step leaves the current bracket.  Works elementwise over array
    targets/brackets; ``g`` and ``dg`` must accept arrays.
    """
    target = np.asarray(target, dtype=float)
    shape = np.broadcast_shapes(target.shape, np.shape(lo), np.shape(hi))
    t = np.broadcast_to(target, shape).astype(float).ravel()
    a = np.broadcast_to(np.asarray(lo, dtype=float), shape).astype(float).ravel()
    b = np.broadcast_to(np.asarray(hi, dtype=float), shape).astype(float).ravel()
    ga = np.asarray(g(a), dtype=float)
    gb = np.asarray(g(b), dtype=float)
    slack = 4 * _EPS * np.maximum(np.abs(ga), np.abs(gb))
    if np.any((t < ga - slack) | (t > gb + slack)) or np.any(np.isnan(t)):
        raise BracketError("target outside [g(lo), g(hi)]")

    if x0 is None:
        x = 0.5 * (a + b)
    else:
        x = np.clip(np.broadcast_to(np.asarray(x0, dtype=float), shape).astype(float).ravel(), a, b)
    done = (t <= ga) | (t >= gb)
    x = np.where(t <= ga, a, np.where(t >= gb, b, x))
    ftol = spec.f_tol * np.where(t != 0, np.abs(t), 1.0)
    prev = np.full_like(x, np.inf)

    for _ in range(spec.max_iter):
        act = ~done
        if not act.any():
            break
        xa = x[act]
        f = np.asarray(g(xa), dtype=float) - t[act]
        conv = np.abs(f) <= ftol[act]
        aa = np.where(f < 0, xa, a[act])
        bb = np.where(f > 0, xa, b[act])
        mid = _split_point(aa, bb)
        if dg is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                step = f / np.asarray(dg(xa), dtype=float)
            xn = xa - step
            stalled = np.isfinite(step) & (np.abs(step) <= 2 * _EPS * np.abs(xa))
            # Newton stuck in its linear regime (e.g. a multiple-like root far
            # away) gets a bracket split instead
            slow = np.abs(step) > 0.25 * prev[act]
            ok = np.isfinite(xn) & (xn > aa) & (xn < bb) & ~slow
            prev[act] = np.where(ok, np.abs(step), np.inf)
            xn = np.where(ok, xn, mid)
        else:
            xn = mid
            ok = stalled = np.zeros_like(conv)
        # the bracket rule only ends bisection runs; Newton runs end on residual
        narrow = ~ok & (((bb - aa) <= spec.x_tol * np.maximum(np.abs(xn), _TINY))
                        | (np.nextafter(aa, bb) >= bb))
        finished = conv | narrow | stalled
        x[act] = np.where(conv | stalled, xa, xn)
        a[act] = aa
        b[act] = bb
        done[act] = finished
    else:
        if not done.all():
            raise ConvergenceError(f"solve_monotone did not converge in {spec.max_iter} iterations")
    return _out(x.reshape(shape))
