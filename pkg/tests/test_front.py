import math

import numpy as np
import pytest

from pvstab import front
from pvstab.background import BackgroundState, stability_margin
from pvstab.symbols import FrequencyPoint, eval_symbols, random_sigma_points

from pvstab import lopatinski as L

from conftest import directions, orthogonal_state, random_state


def test_wave_operator():
    s = BackgroundState(E1=1.0, eps=0.1)
    for tau, eta in [(1.0, 0.5), (0.3 + 2j, 2.0)]:
        f = FrequencyPoint.from_tau(tau, (eta, 0.0))
        assert front.front_symbol(s, f, eps=0.0) == pytest.approx(tau * tau - eta * eta, abs=1e-14)


def test_orthogonal_symbol_and_pressure():
    s = BackgroundState(H2=1.0, Hv3=1.0, eps=0.1)
    f = FrequencyPoint(1.0, 0.0, 0.0, 1.0)
    assert front.front_symbol(s, f) == pytest.approx(2.01, abs=1e-14)
    assert front.pressure_symbol(s, f) == pytest.approx(0.01, abs=1e-14)


def test_identities(rng):
    for p in random_sigma_points(rng, 2000, 100):
        s = random_state(rng)
        f = FrequencyPoint(*p)
        v = eval_symbols(s, f)
        L = front.front_symbol(s, f)
        P = front.pressure_symbol(s, f)
        assert abs(L - (v.sigma_plus + v.sigma_minus)) <= 1e-12 * max(1.0, abs(L))
        assert abs(P - (v.sigma_minus - v.sigma_plus)) <= 1e-12 * max(1.0, abs(P))


def test_coefficients_match_direct(rng):
    for p in random_sigma_points(rng, 200):
        s = random_state(rng)
        f = FrequencyPoint(*p)
        fs = front.front_coefficients(s, (f.eta2, f.eta3))
        assert fs(f.tau) == pytest.approx(front.front_symbol(s, f), rel=1e-12, abs=1e-13)


def test_zero_field_roots():
    s = BackgroundState(E1=1.0, eps=0.1)
    r = front.dispersion_roots(s, (0.6, 0.8), eps=0.0)
    assert r[0] == pytest.approx(1.0, abs=1e-15)
    assert r[1] == pytest.approx(-1.0, abs=1e-15)


def test_orthogonal_roots_imaginary():
    s = orthogonal_state(E1=0.0)
    for d in [(1.0, 0.0), (0.6, 0.8), (0.0, 1.0)]:
        r = front.dispersion_roots(s, d, eps=0.0)
        w2 = (s.H2 * d[0] + s.H3 * d[1]) ** 2 + (s.Hv2 * d[0] + s.Hv3 * d[1]) ** 2
        for z in r:
            assert abs(z.real) < 1e-15
            assert z * z == pytest.approx(-w2, abs=1e-14)


def test_roots_are_roots(rng):
    for _ in range(200):
        s = random_state(rng)
        d = rng.normal(size=2)
        fs = front.front_coefficients(s, d)
        for z in front.dispersion_roots(s, d):
            assert abs(fs(z)) <= 1e-12 * max(1.0, abs(fs.a0), abs(fs.a2 * z * z))


def test_doppler_shift(rng):
    # exact in the pre-Maxwell limit, where tau enters only through ell
    for _ in range(50):
        s = random_state(rng)
        d = rng.normal(size=2)
        still = front.dispersion_roots(s.replace(v2=0.0, v3=0.0), d, eps=0.0)
        moving = front.dispersion_roots(s, d, eps=0.0)
        shift = 1j * (s.v2 * d[0] + s.v3 * d[1])
        got = sorted(moving, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        want = sorted((z - shift for z in still), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_growth_rate_examples():
    assert front.growth_rate(orthogonal_state(0.5)) <= front.GROWTH_TOL
    assert front.growth_rate(BackgroundState(H2=1.0, Hv2=1.0, E1=0.3, eps=0.05)) > 0
    # margin exactly zero
    assert abs(front.growth_rate(orthogonal_state(1.0))) <= 1e-6


def _sweep(rng, n):
    out = []
    while len(out) < n:
        s = random_state(rng)
        m = stability_margin(s)
        if abs(m) >= 1e-3:
            out.append((s, m))
    return out


def test_verdict_agreement_pre_maxwell_limit(rng):
    for s, m in _sweep(rng, 1000):
        assert (m > 0) == (front.growth_rate(s, 256, eps=0.0) <= front.GROWTH_TOL)


def test_verdict_agreement_at_small_eps(rng):
    """At eps = 0.05 the O(eps) coupling flips a few states with O(1) flow and fields.

    The disagreement count must be small and vanish as eps decreases.
    """
    sweep = _sweep(rng, 1000)
    counts = {}
    for eps in (0.05, 0.005, 1e-4):
        counts[eps] = sum(
            (m > 0) != (front.growth_rate(s.replace(eps=eps), 256) <= front.GROWTH_TOL) for s, m in sweep
        )
    print(f"front/verdict disagreements per 1000 states: {counts}")
    assert counts[0.05] <= 30
    assert counts[0.05] >= counts[0.005] >= counts[1e-4]
    assert counts[1e-4] == 0


def test_displacement_current_can_stabilize():
    s = BackgroundState(v2=-0.9969624245218904, v3=-0.814312921521728, H2=-1.3599663240249162,
                        H3=0.22341155858105105, Hv2=1.7617794317958786, Hv3=-2.17088984670659,
                        E1=-0.9934540787330252, eps=0.05)
    assert stability_margin(s) < -0.25
    assert front.growth_rate(s, 256) <= front.GROWTH_TOL
    assert all(L.count_unstable_zeros(s, d) == 0 for d in directions(16))
    assert front.growth_rate(s, 256, eps=0.0) > 0.5


def test_validation():
    s = orthogonal_state()
    with pytest.raises(ValueError):
        front.dispersion_roots(s, (0.0, 0.0))
    with pytest.raises(ValueError):
        front.growth_rate(s, 4)
    with pytest.raises(ValueError):
        front.front_symbol(s, FrequencyPoint(1, 0, 0, 0), eps=-1.0)
