import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvstab.background import BackgroundState
from pvstab.maxwell_sym import (
    build_family,
    constrained_equivalence_residual,
    constrained_vectors,
    family_from_nu,
    hyperbolicity_check,
)
from pvstab.symbols import FrequencyPoint

FREQ = FrequencyPoint(0.3, 0.2, 0.7, -0.4)


def unit_nu(rng, length):
    n = rng.normal(size=3)
    return length * n / np.linalg.norm(n)


def test_zero_nu_is_identity_and_skeleton():
    f = family_from_nu([0, 0, 0])
    np.testing.assert_array_equal(f.B0, np.eye(6))
    for a, b in zip(f.calB, f.B_maxwell):
        np.testing.assert_array_equal(a, b)
    assert hyperbolicity_check(f) == (1.0, True)


def test_limiting_nu_entries():
    B0 = family_from_nu([0, 1, 0]).B0
    off = B0 - np.eye(6)
    assert set(np.unique(off)) == {-1.0, 0.0, 1.0}
    assert off[0, 5] == -1 and off[5, 0] == -1 and off[2, 3] == 1 and off[3, 2] == 1


def test_standard_choice_of_nu():
    f = build_family(BackgroundState(v2=1.0, v3=2.0, eps=0.1))
    np.testing.assert_allclose(f.nu, [0, 0.1, 0.2], rtol=0, atol=1e-16)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_exact_symmetry(nu):
    f = family_from_nu(nu)
    for m in (f.B0, *f.calB, *f.B_maxwell):
        assert np.array_equal(m, m.T)


def test_eigenvalues_are_one_plus_minus_norm(rng):
    for length in np.linspace(0, 1.2, 25):
        f = family_from_nu(unit_nu(rng, length))
        ev = np.linalg.eigvalsh(f.B0)
        want = np.sort([1 - length] * 2 + [1.0] * 2 + [1 + length] * 2)
        np.testing.assert_allclose(ev, want, atol=1e-14)
        assert hyperbolicity_check(f)[1] == (length < 1)


def test_crossing_at_unit_norm(rng):
    f = family_from_nu(unit_nu(rng, 1.0))
    assert abs(hyperbolicity_check(f)[0]) <= 1e-10
    assert hyperbolicity_check(family_from_nu(unit_nu(rng, 0.5)))[1]


def test_residual_zero_at_zero_nu():
    assert constrained_equivalence_residual(family_from_nu([0, 0, 0]), FREQ, 50) == 0.0


def test_residual_vanishes_on_constrained_vectors(rng):
    for _ in range(10):
        f = family_from_nu(unit_nu(rng, 0.3))
        assert constrained_equivalence_residual(f, FREQ, 100, rng) <= 1e-12


def test_unconstrained_negative_control(rng):
    f = family_from_nu(unit_nu(rng, 0.3))
    assert constrained_equivalence_residual(f, FREQ, 100, rng, constrained=False) > 1e-3


def test_constrained_vectors_satisfy_constraint(rng):
    xi = np.array([0.4, -1.0, 2.0])
    V = constrained_vectors(xi, rng, 20)
    xm = np.array([-0.4, -1.0, 2.0])
    assert np.max(np.abs(V[:, :3] @ xm)) < 1e-13
    assert np.max(np.abs(V[:, 3:] @ xm)) < 1e-13


def test_mhd_matrices():
    f = build_family(BackgroundState(v2=0.3, H3=2.0, eps=0.1))
    A2 = f.A_mhd[1]
    np.testing.assert_array_equal(A2[:3, :3], 0.3 * np.eye(3))
    np.testing.assert_array_equal(A2[:3, 3:], 0.0 * np.eye(3))
    np.testing.assert_array_equal(f.A_mhd[2][:3, 3:], -2.0 * np.eye(3))


def test_residual_rejects_zero_trials():
    with pytest.raises(ValueError):
        constrained_equivalence_residual(family_from_nu([0, 0, 0]), FREQ, 0)
