import math

import numpy as np
import pytest

from crossmap import closed_forms
from crossmap.bundles import (FiberSpec, HopfTarget, ProductSpace, hopf_place, hopf_project,
                              phi_hopf, phi_product)
from crossmap.crosses import (Ball, canonicalize, complex_proj, distance, phi_m, sphere)
from crossmap.specfun import DomainError
from crossmap.validate import ks_radial_test


def test_product_example():
    sp = ProductSpace([sphere(1), sphere(1)])
    a, b = phi_product(sp, np.array([0.5, 0.5]))
    # (-sin pi, -cos pi) = (0, 1)
    assert np.allclose(a, [0, 1], atol=1e-15) and np.allclose(b, [0, 1], atol=1e-15)
    assert np.allclose(sp.phi(np.array([0.5, 0.5])), [0, 1, 0, 1], atol=1e-15)


def test_product_structure():
    sp = ProductSpace([sphere(2), Ball(3), complex_proj(1)])
    assert sp.dim == sp.total_dim == 7
    assert sp.ambient_dim == 3 + 3 + 4
    x = np.random.default_rng(1).random((50, 7))
    parts = phi_product(sp, x)
    assert np.array_equal(parts[0], phi_m(sphere(2), x[:, :2]))
    assert np.array_equal(parts[2], phi_m(complex_proj(1), x[:, 5:]))
    assert np.max(np.abs(sp.phi_inv(sp.phi(x)) - x)) <= 1e-8
    with pytest.raises(ValueError):
        phi_product(sp, np.zeros(6) + 0.5)


def test_single_factor_product_is_plain_map():
    sp = ProductSpace([sphere(3)])
    x = np.random.default_rng(2).random((40, 3))
    assert np.array_equal(sp.phi(x), phi_m(sphere(3), x))


def test_product_marginals_uniform():
    sp = ProductSpace([sphere(2), complex_proj(2)])
    rep = ks_radial_test(sp, N=100_000, seed=1)
    assert rep.passed, rep.to_line()


# ---- Hopf -----------------------------------------------------------------

def test_hopf_unit_norm():
    for n in (1, 2, 3):
        rng = np.random.default_rng(n)
        p = phi_hopf(HopfTarget(n), rng.random((2000, 2 * n)), rng.random(2000))
        assert p.shape == (2000, 2 * n + 2)
        assert np.max(np.abs(np.linalg.norm(p, axis=1) - 1)) <= 1e-12


def test_hopf_base_fiber_circle():
    t = np.linspace(0.05, 0.95, 7)
    p = phi_hopf(HopfTarget(1), np.full((7, 2), 0.5), t)
    # -i e^{-i 2 pi t} = -sin(2 pi t) - i cos(2 pi t)
    want = np.stack([0 * t, 0 * t, -np.sin(2 * math.pi * t), -np.cos(2 * math.pi * t)], axis=1)
    assert np.allclose(p, want, atol=1e-15)


def test_hopf_s3_explicit_formula():
    rng = np.random.default_rng(4)
    y, t = rng.random((500, 2)), rng.random(500)
    assert np.allclose(phi_hopf(HopfTarget(1), y, t), closed_forms.hopf_s3(y, t), atol=1e-12)


def test_hopf_projection_consistency():
    for n in (1, 2):
        rng = np.random.default_rng(10 + n)
        y, t = rng.random((1000, 2 * n)), rng.random(1000)
        p = phi_hopf(HopfTarget(n), y, t)
        got = hopf_project(p)
        want = canonicalize(complex_proj(n), phi_m(complex_proj(n), y))
        assert np.max(np.abs(got - want)) <= 1e-10


def test_hopf_project_phase_invariance():
    rng = np.random.default_rng(5)
    p = rng.standard_normal((1000, 6))
    p /= np.linalg.norm(p, axis=1)[:, None]
    a = rng.random(1000) * 2 * math.pi
    zeta = np.stack([np.cos(a), np.sin(a)], axis=1)
    assert np.allclose(hopf_project(hopf_place(p, zeta)), hopf_project(p), atol=1e-12)
    base = np.array([0.0, 0, 0, 0, 1, 0])
    assert np.array_equal(hopf_project(base), complex_proj(2).base_point())


def test_fiber_isometry():
    rng = np.random.default_rng(6)
    y = rng.random((200, 4))
    t = rng.random(200) * 0.5
    for delta in (1e-3, 0.1, 0.3):
        a = phi_hopf(HopfTarget(2), y, t)
        b = phi_hopf(HopfTarget(2), y, t + delta)
        d = np.linalg.norm(a - b, axis=1)
        assert np.allclose(d, 2 * math.sin(math.pi * delta), atol=1e-10)


def test_hopf_inverse_and_exceptional_set():
    h = HopfTarget(2)
    rng = np.random.default_rng(7)
    x = rng.random((500, 5))
    assert np.max(np.abs(h.phi_inv(h.phi(x)) - x)) <= 1e-8
    with pytest.raises(DomainError):
        h.phi_inv(np.array([1.0, 0, 0, 0, 0, 0]))
    with pytest.raises(ValueError):
        HopfTarget(0)


def test_fiberspec_composition():
    spec = FiberSpec(complex_proj(1), sphere(1), hopf_place)
    assert spec.dim == 3
    x = np.random.default_rng(8).random((20, 3))
    assert np.array_equal(spec.phi(x), HopfTarget(1).phi(x))


def test_hopf_distance_on_sphere_matches_cp_distance():
    # h is a Riemannian submersion: projecting two points cannot increase distance
    h = HopfTarget(1)
    rng = np.random.default_rng(9)
    p, q = h.phi(rng.random((300, 3))), h.phi(rng.random((300, 3)))
    ds = distance(sphere(3), p, q)
    dc = distance(complex_proj(1), hopf_project(p), hopf_project(q))
    assert np.all(dc <= ds + 1e-12)
