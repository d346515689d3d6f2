import numpy as np
import pytest

from pvstab.background import BackgroundState, stability_margin


def orthogonal_state(E1=0.5, eps=0.05):
    return BackgroundState(H2=1.0, Hv3=1.0, E1=E1, eps=eps)


def collinear_state(E1=0.5, eps=0.05):
    return BackgroundState(H2=1.0, Hv2=1.0, E1=E1, eps=eps)


def random_state(rng, eps=0.05):
    v = rng.uniform(-1, 1, 2)
    H = rng.normal(size=2)
    Hv = rng.normal(size=2)
    return BackgroundState(v[0], v[1], H[0], H[1], Hv[0], Hv[1], float(rng.uniform(-1.5, 1.5)), eps)


def stable_states(n=20, eps=0.05, seed=2024):
    """Random states passing the verdict: noncollinear fields, E1^2 at most 81% of the threshold."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        v = rng.uniform(-1, 1, 2)
        H = rng.normal(size=2)
        Hv = rng.normal(size=2)
        s = BackgroundState(v[0], v[1], H[0], H[1], Hv[0], Hv[1], 0.0, eps)
        rhs = stability_margin(s)
        if rhs < 0.05:
            continue
        E1 = rng.uniform(0, 0.9) * np.sqrt(rhs) * rng.choice([-1, 1])
        out.append(s.replace(E1=float(E1)))
    return out


def collinear_states(n=20, eps=0.05, seed=7):
    """Collinear fields of random orientation and length, E1 evenly spread over [0.1, 1]."""
    rng = np.random.default_rng(seed)
    out = []
    for E1 in np.linspace(0.1, 1.0, n):
        ang = rng.uniform(0, 2 * np.pi)
        u = np.array([np.cos(ang), np.sin(ang)])
        a, b = rng.uniform(0.5, 1.5, 2) * rng.choice([-1, 1], 2)
        v = rng.uniform(-0.5, 0.5, 2)
        out.append(BackgroundState(v[0], v[1], a * u[0], a * u[1], b * u[0], b * u[1], float(E1), eps))
    return out


def directions(n):
    a = 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(a), np.sin(a)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    rows = sorted((k, v) for k, v in RESULTS.items() if isinstance(k, int))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, (ok, detail) in rows:
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
