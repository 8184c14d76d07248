"""Exponential charts and composed cube maps for the compact rank one symmetric spaces.

Points are float arrays with coordinates along the last axis.

* sphere S^n: unit vectors of R^(n+1), base point e_(n+1).
* RP^n, CP^n, HP^n: unit homogeneous representatives in F^(n+1), stored as
  reals (complex numbers as (re, im) pairs, quaternions as (w, x, y, z)),
  canonicalized so the last nonzero coordinate is real and positive.
* OP^2: chart only; a point is its chart vector in B^16(0, pi/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cube_gauss import phi_rd, phi_rd_inv
from .radial import BallProfile, RadialProfile, cross_profile
from .specfun import DomainError

CUT_TOL = 1e-9

_FIELD = {"sphere": 1, "rp": 1, "cp": 2, "hp": 4, "op2": None}
_NAMES = {"sphere": "S", "rp": "RP", "cp": "CP", "hp": "HP", "op2": "OP"}


class CutLocusError(DomainError):
    """Point on (or numerically at) the cut locus of the base point."""

    def __init__(self, msg, gap=None):
        super().__init__(msg)
        self.gap = gap


class UnsupportedError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scalar algebra on packed reals
# ---------------------------------------------------------------------------

def qmul(a, b):
    """Hamilton product of quaternion arrays (..., 4)."""
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def qconj(a):
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def _split(p, k):
    """(..., m*k) -> (..., m, k)"""
    return p.reshape(p.shape[:-1] + (p.shape[-1] // k, k))


def _scalar_mul_right(p, lam, k):
    """Right-multiply every F-coordinate of p by the scalar lam (..., k)."""
    if k == 1:
        return p * lam
    blocks = _split(p, k)
    lam = lam[..., None, :]
    if k == 2:
        re = blocks[..., 0] * lam[..., 0] - blocks[..., 1] * lam[..., 1]
        im = blocks[..., 0] * lam[..., 1] + blocks[..., 1] * lam[..., 0]
        out = np.stack([re, im], axis=-1)
    else:
        out = qmul(blocks, np.broadcast_to(lam, blocks.shape))
    return out.reshape(p.shape)


def inner_f(p, q, k):
    """F-valued <p, q> = sum conj(p_i) q_i as (..., k) reals."""
    if k == 1:
        return np.sum(p * q, axis=-1, keepdims=True)
    bp, bq = _split(p, k), _split(q, k)
    if k == 2:
        re = bp[..., 0] * bq[..., 0] + bp[..., 1] * bq[..., 1]
        im = bp[..., 0] * bq[..., 1] - bp[..., 1] * bq[..., 0]
        return np.stack([re.sum(-1), im.sum(-1)], axis=-1)
    return qmul(qconj(bp), bq).sum(axis=-2)


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossSpace:
    kind: str
    n: int
    d: int
    D: float
    V: float
    profile: RadialProfile = field(compare=False, repr=False)

    @property
    def k(self):
        """Real dimension of the scalar field (None for OP^2)."""
        return _FIELD[self.kind]

    @property
    def dim(self):
        return self.d

    @property
    def ambient_dim(self):
        return self.d if self.kind == "op2" else self.d + self.k

    @property
    def name(self):
        return "OP2" if self.kind == "op2" else f"{_NAMES[self.kind]}{self.n}"

    @property
    def projective(self):
        return self.kind in ("rp", "cp", "hp")

    def base_point(self):
        p = np.zeros(self.ambient_dim)
        if self.kind == "sphere":
            p[-1] = 1.0
        elif self.kind != "op2":
            p[self.d] = 1.0
        return p

    # target protocol
    def phi(self, x, numeric=False, clamp=False):
        return phi_m(self, x, numeric=numeric, clamp=clamp)

    def phi_inv(self, p, numeric=False):
        return phi_m_inv(self, p, numeric=numeric)

    def distance_to_base(self, p):
        return distance_to_base(self, p)

    def radial_cdf(self, t):
        return self.profile.cdf(t)

    def check_points(self, p, tol=1e-12):
        return check_points(self, p, tol)


def cross_space(kind: str, n: int = 2) -> CrossSpace:
    prof = cross_profile(kind, n)
    return CrossSpace(kind, prof.n, prof.d, prof.R, prof.V, prof)


def sphere(n):
    return cross_space("sphere", n)


def real_proj(n):
    return cross_space("rp", n)


def complex_proj(n):
    return cross_space("cp", n)


def quat_proj(n):
    return cross_space("hp", n)


def octonion_plane():
    return cross_space("op2", 2)


@dataclass(frozen=True)
class Ball:
    """Unit ball B^d with the uniform measure (chart is the identity)."""

    d: int

    @property
    def profile(self):
        return BallProfile(self.d)

    @property
    def dim(self):
        return self.d

    @property
    def ambient_dim(self):
        return self.d

    @property
    def name(self):
        return f"B{self.d}"

    def phi(self, x, numeric=False, clamp=False):
        return self.profile.varphi(phi_rd(x, clamp=clamp), numeric=numeric)

    def phi_inv(self, p, numeric=False):
        return phi_rd_inv(self.profile.varphi_inv(p, numeric=numeric))

    def distance_to_base(self, p):
        return np.sqrt(np.sum(np.asarray(p) ** 2, axis=-1))

    def radial_cdf(self, t):
        return np.asarray(t, dtype=float) ** self.d

    def check_points(self, p, tol=1e-12):
        return self.distance_to_base(p) < 1.0


def phi_ball(d: int, x, numeric=False):
    """Uniform cube -> uniform unit ball."""
    return Ball(d).phi(x, numeric=numeric)


# ---------------------------------------------------------------------------
# canonical representatives
# ---------------------------------------------------------------------------

def _last_nonzero(blocks):
    # index of the last F-coordinate with nonzero norm, per point
    nz = np.any(blocks != 0, axis=-1)
    m = nz.shape[-1]
    idx = m - 1 - np.argmax(nz[..., ::-1], axis=-1)
    return idx, np.any(nz, axis=-1)


def canonicalize(space: CrossSpace, p):
    """Phase-normalize projective representatives (identity otherwise).

    The last nonzero coordinate becomes real and positive.  Points already in
    that form are returned untouched, which makes the operation idempotent.
    """
    p = np.array(p, dtype=float)
    if not space.projective:
        return p
    k = space.k
    blocks = _split(p, k)
    idx, any_nz = _last_nonzero(blocks)
    if not np.all(any_nz):
        raise DomainError("zero vector has no projective class")
    lead = np.take_along_axis(blocks, idx[..., None, None], axis=-2)[..., 0, :]
    done = (lead[..., 0] > 0) & np.all(lead[..., 1:] == 0, axis=-1)
    if np.all(done):
        return p
    norm = np.sqrt(np.sum(lead * lead, axis=-1))
    if k == 1:
        lam = np.sign(lead)
    else:
        lam = lead * np.r_[1.0, -np.ones(k - 1)] / norm[..., None]
    out = _scalar_mul_right(p, lam, k)
    ob = _split(out, k)
    fix = np.zeros_like(lead)
    fix[..., 0] = norm
    np.put_along_axis(ob, idx[..., None, None], fix[..., None, :], axis=-2)
    out = ob.reshape(p.shape)
    return np.where(done[..., None], p, out)


def check_points(space: CrossSpace, p, tol=1e-12):
    """Per-point validity: unit norm (or chart bound for OP^2)."""
    p = np.asarray(p, dtype=float)
    nrm = np.sqrt(np.sum(p * p, axis=-1))
    if space.kind == "op2":
        return nrm < space.D
    return np.abs(nrm - 1.0) <= tol


# ---------------------------------------------------------------------------
# exp / log / distance
# ---------------------------------------------------------------------------

def _check_dim(space, a, m, what):
    if a.shape[-1] != m:
        raise ValueError(f"{space.name}: expected {what} of length {m}, got {a.shape[-1]}")


def exp_chart(space: CrossSpace, v):
    """Chart vector (norm < D) -> point.  Projective targets give the unit
    representative ((v/|v|) sin|v|, cos|v|) of ((v/|v|) tan|v|, 1)."""
    v = np.asarray(v, dtype=float)
    _check_dim(space, v, space.d, "chart vectors")
    s = np.sqrt(np.sum(v * v, axis=-1))
    if np.any(s >= space.D):
        raise DomainError(f"{space.name}: chart vector norm must be < {space.D}")
    if space.kind == "op2":
        return v.copy()
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(s > 0, np.sin(s) / s, 1.0)
    last = np.zeros(v.shape[:-1] + (space.ambient_dim - space.d,))
    last[..., 0] = np.cos(s)
    return np.concatenate([v * scale[..., None], last], axis=-1)


def _polar(space, p):
    # |horizontal part|, signed/positive last coordinate
    w = p[..., :space.d]
    c = p[..., space.d]
    return w, np.sqrt(np.sum(w * w, axis=-1)), c


def log_chart(space: CrossSpace, p):
    """Inverse of exp_chart off the cut locus (rejected within 1e-9)."""
    p = np.asarray(p, dtype=float)
    _check_dim(space, p, space.ambient_dim, "points")
    if space.kind == "op2":
        s = np.sqrt(np.sum(p * p, axis=-1))
        gap = space.D - s
        if np.any(gap < CUT_TOL):
            raise CutLocusError("OP2 chart point at the cut locus", float(np.min(gap)))
        return p.copy()
    if space.projective:
        p = canonicalize(space, p)
    w, s, c = _polar(space, p)
    theta = np.arctan2(s, c)
    if space.projective:
        # canonical form has a zero last coordinate only on the cut locus
        gap = np.where(c > 0, 0.5 * math.pi - theta, 0.0)
    else:
        gap = math.pi - theta
    if np.any(gap < CUT_TOL):
        raise CutLocusError(f"{space.name}: point within {CUT_TOL} of the cut locus",
                            float(np.min(gap)))
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(s > 0, theta / s, 1.0)
    return w * scale[..., None]


def distance_to_base(space: CrossSpace, p):
    p = np.asarray(p, dtype=float)
    if space.kind == "op2":
        return np.sqrt(np.sum(p * p, axis=-1))
    w, s, _ = _polar(space, p)
    if space.projective:
        last = p[..., space.d:]
        return np.arctan2(s, np.sqrt(np.sum(last * last, axis=-1)))
    return np.arctan2(s, p[..., -1])


def distance(space: CrossSpace, p, q):
    """Riemannian distance; projective: arccos |<p, q>_F| in a stable form."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if space.kind == "op2":
        p0 = np.all(p == 0, axis=-1)
        q0 = np.all(q == 0, axis=-1)
        if not np.all(p0 | q0):
            raise UnsupportedError("OP2 distance needs the base point as one argument")
        return np.sqrt(np.sum(np.where(p0[..., None], q, p) ** 2, axis=-1))
    if space.projective:
        # align q's phase with p: <p, q lam> real and positive
        q = _scalar_mul_right(q, _phase_to(p, q, space.k), space.k)
    a = np.sqrt(np.sum((p - q) ** 2, axis=-1))
    b = np.sqrt(np.sum((p + q) ** 2, axis=-1))
    return 2.0 * np.arctan2(a, b)


def _phase_to(p, q, k):
    # unit scalar lam with <p, q lam> = |<p, q>| >= 0
    ip = inner_f(p, q, k)
    m = np.sqrt(np.sum(ip * ip, axis=-1))
    one = np.zeros(ip.shape)
    one[..., 0] = 1.0
    safe = np.where(m > 0, m, 1.0)[..., None]
    conj = ip * np.r_[1.0, -np.ones(k - 1)] if k > 1 else ip
    return np.where(m[..., None] > 0, conj / safe, one)


# ---------------------------------------------------------------------------
# composed maps
# ---------------------------------------------------------------------------

def phi_m(space: CrossSpace, x, closed_form: bool = False, numeric: bool = False,
          clamp: bool = False):
    """Uniform cube (0,1)^d -> uniform measure on the space.

    ``closed_form=True`` uses the explicit table formula when one exists.
    """
    x = np.asarray(x, dtype=float)
    _check_dim(space, x, space.d, "cube points")
    if closed_form:
        from .closed_forms import closed_form_map
        f = closed_form_map(space)
        if f is not None:
            return f(x)
    y = phi_rd(x, clamp=clamp)
    v = space.profile.varphi(y, numeric=numeric)
    return exp_chart(space, v)


def phi_m_inv(space: CrossSpace, p, numeric: bool = False):
    v = log_chart(space, p)
    y = space.profile.varphi_inv(v, numeric=numeric)
    return phi_rd_inv(y)
