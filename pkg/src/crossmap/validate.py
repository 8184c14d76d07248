"""Numerical and statistical checks that the maps are measure preserving."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bundles import HopfTarget, ProductSpace
from .crosses import Ball, CrossSpace, UnsupportedError
from .samplers import rng_for, uniform_open

KS_C = 1.63           # asymptotic KS critical value, alpha = 0.01
KS2_C = 1.628
ALPHA = 0.01


class UndersampledError(ValueError):
    pass


class StepSizeError(ValueError):
    pass


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    test_name: str
    sample_size: int
    statistic: float
    threshold: float
    passed: bool = None
    details: str = ""

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)
        self.passed = bool(self.statistic <= self.threshold)

    def to_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}\ttest={self.test_name}\tn={self.sample_size}"
                f"\tstatistic={self.statistic:.6g}\tthreshold={self.threshold:.6g}"
                f"\tdetails={self.details}")


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------

def ks_statistic(samples, cdf) -> float:
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    f = np.asarray(cdf(s), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_two_sample_statistic(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    allv = np.concatenate([a, b])
    fa = np.searchsorted(a, allv, side="right") / a.size
    fb = np.searchsorted(b, allv, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def _cube(target, N, seed, name, warp):
    x = uniform_open(rng_for(seed, name), (N, target.dim))
    return x * x if warp else x


def ks_radial_test(target, N: int = 100_000, seed: int = 1, warp: bool = False,
                   sampler=None, numeric: bool = False) -> TestReport:
    """Empirical distance-to-base CDF of mapped points vs the radial CDF.

    ``sampler`` may be a callable ``(N, dim) -> cube points``; default is the
    seeded random stream.  Products test every factor and report the worst.
    """
    if N < 1000:
        raise ValueError("ks_radial_test needs N >= 1000")
    name = f"radial-ks:{target.name}"
    x = sampler(N, target.dim) if sampler is not None else _cube(target, N, seed, name, warp)
    p = target.phi(x, numeric=numeric) if not isinstance(target, ProductSpace) else target.phi(x)
    if isinstance(target, ProductSpace):
        dist = target.distance_to_base(p)
        stat = max(ks_statistic(dist[:, j], f.radial_cdf) for j, f in enumerate(target.factors))
    else:
        stat = ks_statistic(target.distance_to_base(p), target.radial_cdf)
    return TestReport(name, N, stat, KS_C / math.sqrt(N),
                      details=f"seed={seed} warp={int(warp)}")


def ks_two_sample_test(a, b, name="two-sample-ks") -> TestReport:
    n, m = len(a), len(b)
    return TestReport(name, n + m, ks_two_sample_statistic(a, b),
                      KS2_C * math.sqrt((n + m) / (n * m)))


def hopf_vs_sphere_test(n: int = 1, N: int = 100_000, seed: int = 1) -> TestReport:
    """Radial distances of the Hopf map and the direct S^(2n+1) map."""
    h = HopfTarget(n)
    xa = _cube(h, N, seed, "hopf-vs-sphere:a", False)
    xb = _cube(h.sphere, N, seed, "hopf-vs-sphere:b", False)
    da = h.distance_to_base(h.phi(xa))
    db = h.sphere.distance_to_base(h.sphere.phi(xb))
    return ks_two_sample_test(da, db, name=f"hopf-vs-sphere:{2 * n + 1}")


# ---------------------------------------------------------------------------
# equal-measure cells
# ---------------------------------------------------------------------------

def _unit_gauss(rng, shape):
    g = rng.standard_normal(shape)
    return g / np.sqrt(np.sum(g * g, axis=-1, keepdims=True))


def uniform_on_target(target, N: int, rng) -> np.ndarray:
    """Independent uniform points on the target (not through the cube map)."""
    if isinstance(target, ProductSpace):
        return np.concatenate([uniform_on_target(f, N, rng) for f in target.factors], axis=-1)
    if isinstance(target, Ball):
        u = _unit_gauss(rng, (N, target.d))
        return u * (uniform_open(rng, (N, 1)) ** (1.0 / target.d))
    if isinstance(target, HopfTarget):
        return _unit_gauss(rng, (N, target.ambient_dim))
    if isinstance(target, CrossSpace) and target.kind != "op2":
        # the uniform sphere in F^(n+1) projects to the uniform projective space
        return _unit_gauss(rng, (N, target.ambient_dim))
    raise UnsupportedError(f"no independent uniform sampler for {target.name}")


def chi2_cell_test(target, k: int, N: int, seed: int = 1, warp: bool = False,
                   source: str = "ambient") -> TestReport:
    """Counts per cube cell of preimages; each cell image must carry k^-d mass.

    ``source='ambient'`` draws uniform target points independently and pulls
    them back with phi_inv; ``source='cube'`` pushes random cube points
    through phi first.  ``warp`` tests the map x -> phi(x^2) instead.
    """
    d = target.dim
    cells = k ** d
    if N < 20 * cells:
        raise UndersampledError(f"expected count {N / cells:.3g} per cell is below 20")
    name = f"chi2-cells:{target.name}:k={k}"
    rng = rng_for(seed, name)
    if source == "ambient":
        p = uniform_on_target(target, N, rng)
    elif source == "cube":
        p = target.phi(uniform_open(rng, (N, d)))
    else:
        raise ValueError(f"unknown source {source!r}")
    x = target.phi_inv(p)
    if warp:
        x = np.sqrt(x)
    idx = np.minimum((x * k).astype(np.int64), k - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (k,) * d)
    counts = np.bincount(flat, minlength=cells)
    expected = N / cells
    stat = float(np.sum((counts - expected) ** 2) / expected)
    thr = float(stats.chi2.ppf(1 - ALPHA, cells - 1)) if cells > 1 else 0.0
    return TestReport(name, N, stat, thr,
                      details=f"cells={cells} df={cells - 1} seed={seed} warp={int(warp)}")


# ---------------------------------------------------------------------------
# caps on S^2
# ---------------------------------------------------------------------------

def cap_test_s2(center, theta: float, N: int = 100_000, seed: int = 1,
                points=None) -> TestReport:
    """Fraction of mapped points in the cap of angular radius theta."""
    if not 0 < theta <= math.pi:
        raise ValueError("cap angle must lie in (0, pi]")
    c = np.asarray(center, dtype=float)
    c = c / np.linalg.norm(c)
    if points is None:
        from .crosses import sphere
        s2 = sphere(2)
        points = s2.phi(uniform_open(rng_for(seed, "cap-s2"), (N, 2)))
    N = len(points)
    ang = 2 * np.arctan2(np.linalg.norm(points - c, axis=-1), np.linalg.norm(points + c, axis=-1))
    frac = float(np.mean(ang <= theta))
    area = (1 - math.cos(theta)) / 2
    tol = 3 * math.sqrt(area * (1 - area) / N)
    return TestReport("cap-s2", N, abs(frac - area), tol,
                      details=f"theta={theta:.6g} fraction={frac:.6g} area={area:.6g}")


def discrepancy_cap_estimate(points, M: int = 1000, seed: int = 1) -> float:
    """sup over M random caps of |fraction inside - normalized area| on S^2."""
    if M < 1000:
        raise ValueError("discrepancy estimate needs M >= 1000 caps")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    rng = rng_for(seed, "cap-discrepancy")
    centers = _unit_gauss(rng, (M, 3))
    heights = rng.uniform(-1.0, 1.0, M)
    worst = 0.0
    for c, t in zip(centers, heights):
        frac = np.mean((pts * c).sum(axis=-1) >= t)
        worst = max(worst, abs(frac - (1 - t) / 2))
    return float(worst)


# ---------------------------------------------------------------------------
# Jacobian identity
# ---------------------------------------------------------------------------

def _fd_jacobian(f, y, h):
    d = y.size
    J = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        J[:, j] = (f(y + e) - f(y - e)) / (2 * h)
    return J


def jacobian_check(profile, y, h: float = 1e-5, rtol: float = 1e-5) -> TestReport:
    """|det D varphi(y)| * omega(rho(|y|)) against the Gaussian density at y."""
    profile = getattr(profile, "profile", profile)
    y = np.asarray(y, dtype=float).ravel()
    if not 1e-8 <= h <= 1e-2:
        raise StepSizeError(f"step {h} outside [1e-8, 1e-2]")
    r = float(np.linalg.norm(y))
    if r < 10 * h:
        raise ValueError("jacobian_check needs |y| >= 10 h")
    d = y.size

    def f(z):
        return profile.varphi(z[None, :])[0]

    det1 = abs(np.linalg.det(_fd_jacobian(f, y, h)))
    det2 = abs(np.linalg.det(_fd_jacobian(f, y, 2 * h)))
    if abs(det1 - det2) > 1e-3 * max(abs(det1), 1e-300):
        raise StepSizeError("finite differences at h and 2h disagree (cancellation)")
    rho = float(profile.rho_of_r(r))
    lhs = det1 * float(profile.omega(rho))
    rhs = (2 * math.pi) ** (-d / 2) * math.exp(-r * r / 2)
    rel = abs(lhs - rhs) / rhs
    return TestReport(f"jacobian:{type(profile).__name__}", 1, rel, rtol,
                      details=f"|y|={r:.6g} rho={rho:.6g}")


def _embed_cp(p):
    # p p^* / sqrt 2 as a real vector: isometric on the Fubini-Study metric
    z = p[..., 0::2] + 1j * p[..., 1::2]
    m = np.einsum("...i,...j->...ij", z, z.conj()) / math.sqrt(2)
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


def njac_hopf_check(n: int = 1, points: int = 20, seed: int = 1,
                    h: float = 1e-6, tol: float = 1e-6) -> TestReport:
    """Finite-difference normal Jacobian of h: S^(2n+1) -> CP^n at random points.

    The relative variance of the sampled values must stay below ``tol``.
    """
    rng = rng_for(seed, "njac-hopf")
    m = 2 * n + 2
    vals = []
    for p in _unit_gauss(rng, (points, m)):
        # orthonormal basis of the tangent space at p
        q, _ = np.linalg.qr(np.column_stack([p, rng.standard_normal((m, m - 1))]))
        J = []
        for j in range(1, m):
            e = q[:, j]
            fp = _embed_cp((p + h * e) / np.linalg.norm(p + h * e))
            fm = _embed_cp((p - h * e) / np.linalg.norm(p - h * e))
            J.append((fp - fm) / (2 * h))
        sv = np.linalg.svd(np.array(J), compute_uv=False)
        vals.append(float(np.prod(sv[: 2 * n])))
    vals = np.array(vals)
    rel_var = float(np.var(vals) / np.mean(vals) ** 2)
    return TestReport(f"njac-hopf:{n}", points, rel_var, tol,
                      details=f"mean={np.mean(vals):.9g}")
