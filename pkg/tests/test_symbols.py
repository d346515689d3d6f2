import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvstab import front
from pvstab.background import BackgroundState
from pvstab.symbols import (
    FrequencyPoint,
    eval_symbols,
    hemisphere_point,
    principal_sqrt,
    random_sigma_points,
)

from conftest import random_state


def oracle_sqrt(tau, eta, eps):
    # library root flipped into the right half plane; valid only for Re tau > 0
    z = cmath.sqrt(eta * eta + eps * eps * tau * tau)
    return z if z.real >= 0 else -z


def test_principal_sqrt_examples():
    assert principal_sqrt(1.0, 0.0, 1.0) == 1.0
    assert principal_sqrt(2j, 1.0, 1.0) == pytest.approx(1j * math.sqrt(3), abs=1e-15)
    r5 = math.sqrt(5)
    want = math.sqrt((1 + r5) / 2) + 1j * math.sqrt((-1 + r5) / 2)
    assert principal_sqrt(1 + 1j, 1.0, 1.0) == pytest.approx(want, abs=1e-15)


def test_principal_sqrt_sign_convention_on_boundary():
    # delta < 0 on the purely imaginary branch gives -i
    assert principal_sqrt(-2j, 1.0, 1.0) == pytest.approx(-1j * math.sqrt(3), abs=1e-15)
    # radicand exactly zero at the cone
    assert principal_sqrt(1j, 1.0, 1.0) == 0.0


def test_principal_sqrt_rejections():
    with pytest.raises(ValueError):
        principal_sqrt(0.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        principal_sqrt(-1.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        principal_sqrt(1.0, 1.0, 0.0)


def test_principal_sqrt_matches_library_oracle(rng):
    for _ in range(2000):
        tau = complex(rng.exponential(), rng.normal() * 3)
        eta, eps = abs(rng.normal()), rng.uniform(0.01, 1)
        assert principal_sqrt(tau, eta, eps) == pytest.approx(oracle_sqrt(tau, eta, eps), rel=1e-13, abs=1e-15)


def test_eval_symbols_orthogonal_example():
    s = BackgroundState(H2=1.0, Hv3=1.0, eps=0.1)
    v = eval_symbols(s, FrequencyPoint(1.0, 0.0, 0.0, 1.0))
    assert v.ell == 1
    assert v.w_plus == 0 and v.w_minus == 1 and v.w_perp == 0
    assert v.Lambda == pytest.approx(math.sqrt(2), abs=1e-15)
    assert v.sigma == pytest.approx(math.sqrt(1.01), abs=1e-15)
    assert v.sigma_plus == pytest.approx(1.0, abs=1e-15)
    assert v.sigma_minus == pytest.approx(1.01, abs=1e-15)


def test_eval_symbols_eta_zero(rng):
    for _ in range(20):
        s = random_state(rng)
        g = rng.exponential()
        v = eval_symbols(s, FrequencyPoint(g, 0.0, 0.0, 0.0))
        assert v.w_plus == v.w_minus == v.w_perp == 0
        assert v.sigma == pytest.approx(s.eps * g, rel=1e-15)
        assert v.sigma_minus == pytest.approx(s.eps ** 2 * (s.Hv2 ** 2 + s.Hv3 ** 2) * g * g, rel=1e-14)
        assert v.sigma_plus == pytest.approx(g * g, rel=1e-15)


def test_eval_symbols_doppler():
    s = BackgroundState(v2=1.0, eps=0.1)
    v = eval_symbols(s, FrequencyPoint(0.0, 1.0, 1.0, 0.0))
    assert v.ell == 2j


def test_frequency_point_validation():
    with pytest.raises(ValueError):
        FrequencyPoint(-1e-3, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        FrequencyPoint(0.0, 0.0, 0.0, 0.0)


def test_hemisphere_examples():
    p = hemisphere_point(0.0, 0.0, 0.0)
    assert (p.gamma, p.delta, p.eta) == (1.0, 0.0, 0.0)
    p = hemisphere_point(math.pi / 2, 0.0, 0.0)
    assert p.gamma == 0.0 and p.delta == pytest.approx(1.0) and p.eta == 0.0


@settings(max_examples=300, deadline=None)
@given(st.floats(0, math.pi / 2), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_hemisphere_on_sigma(theta, psi, phi):
    p = hemisphere_point(theta, psi, phi)
    assert p.gamma >= 0
    assert abs(p.gamma ** 2 + p.delta ** 2 + p.eta ** 2 - 1.0) <= 1e-14


def test_homogeneity(rng):
    pts = random_sigma_points(rng, 500, 50)
    for p in pts:
        s = random_state(rng)
        f = FrequencyPoint(*p)
        a = eval_symbols(s, f)
        for k in (0.5, 2.0, 10.0):
            b = eval_symbols(s, f.scaled(k))
            assert abs(b.sigma - k * a.sigma) <= 1e-12 * k * abs(a.Lambda)
            assert abs(b.sigma_plus - k * k * a.sigma_plus) <= 1e-12 * k * k * max(1.0, abs(a.sigma_plus))
            assert abs(b.sigma_minus - k * k * a.sigma_minus) <= 1e-12 * k * k * max(1.0, abs(a.sigma_minus))
            assert b.Lambda == pytest.approx(k * a.Lambda, rel=1e-14)


@pytest.mark.parametrize("delta,eta", [(3.0, 0.1), (0.5, 1.0), (-4.0, 0.05), (2.0, 0.2)])
def test_continuity_to_boundary(delta, eta):
    eps = 0.05
    edge = principal_sqrt(1j * delta, eta, eps)
    gaps = [abs(principal_sqrt(g + 1j * delta, eta, eps) - edge) for g in (1e-3, 1e-6, 1e-9)]
    assert gaps[0] > gaps[1] > gaps[2] or gaps[2] == 0.0
    assert gaps[2] < 1e-9


def test_continuity_across_cone():
    # the two boundary branches meet at eps |delta| = eta where both vanish
    eps, eta = 0.1, 0.3
    d0 = eta / eps
    for h in (1e-4, 1e-8, 1e-12):
        assert abs(principal_sqrt(1j * (d0 + h), eta, eps)) < 2 * math.sqrt(2 * eps * eps * d0 * h)
        assert abs(principal_sqrt(1j * (d0 - h), eta, eps)) < 2 * math.sqrt(2 * eps * eps * d0 * h)


def test_real_part_bound(rng):
    pts = random_sigma_points(rng, 20000, 1000)
    for eps in (0.01, 0.05, 0.5):
        for p in pts[:2000]:
            s = principal_sqrt(complex(p[0], p[1]), math.hypot(p[2], p[3]), eps)
            assert s.real >= eps * p[0] / math.sqrt(2) - 1e-15


def test_sum_identity_with_front(rng):
    for p in random_sigma_points(rng, 500, 20):
        s = random_state(rng)
        f = FrequencyPoint(*p)
        v = eval_symbols(s, f)
        L = front.front_symbol(s, f)
        assert abs(L - (v.sigma_plus + v.sigma_minus)) <= 1e-12 * max(1.0, abs(L))
