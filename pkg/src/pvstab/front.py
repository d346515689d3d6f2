"""Symbol of the interface evolution operator and its dispersion roots.

At frequency (tau, eta') the front operator has the symbol

    L(tau) = l^2 + w+^2 + w-^2 - E1^2 eta^2 - 2 i eps E1 tau w_perp + eps^2 |Hv|^2 tau^2

with l = tau + i v.eta'. It is a quadratic in tau, so the dispersion roots are
explicit and serve as an independent instability oracle.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from pvstab.background import BackgroundState
from pvstab.symbols import FrequencyPoint

GROWTH_TOL = 1e-8


@dataclass(frozen=True)
class FrontSymbol:
    """Coefficients of L(tau) = a2 tau^2 + a1 tau + a0 at fixed eta'."""

    a2: complex
    a1: complex
    a0: complex

    def __call__(self, tau):
        return (self.a2 * tau + self.a1) * tau + self.a0


def _eps(state: BackgroundState, eps):
    """State eps, or an explicit override (eps = 0 gives the pre-Maxwell limit)."""
    if eps is None:
        return state.eps
    if not (eps >= 0 and math.isfinite(eps)):
        raise ValueError("eps override must be finite and nonnegative")
    return float(eps)


def front_coefficients(state: BackgroundState, eta_prime, eps: float | None = None) -> FrontSymbol:
    eps = _eps(state, eps)
    e2, e3 = float(eta_prime[0]), float(eta_prime[1])
    vn = state.v2 * e2 + state.v3 * e3
    w_plus = state.H2 * e2 + state.H3 * e3
    w_minus = state.Hv2 * e2 + state.Hv3 * e3
    w_perp = state.Hv3 * e2 - state.Hv2 * e3
    eta_sq = e2 * e2 + e3 * e3
    hv_sq = state.Hv2 ** 2 + state.Hv3 ** 2
    return FrontSymbol(
        a2=complex(1.0 + eps ** 2 * hv_sq),
        a1=2j * vn - 2j * eps * state.E1 * w_perp,
        a0=complex(-vn * vn + w_plus ** 2 + w_minus ** 2 - state.E1 ** 2 * eta_sq),
    )


def front_symbol(state: BackgroundState, freq: FrequencyPoint, eps: float | None = None) -> complex:
    """L(tau; eta') evaluated term by term from the operator definition."""
    eps = _eps(state, eps)
    tau = freq.tau
    e2, e3 = freq.eta2, freq.eta3
    ell = tau + 1j * (state.v2 * e2 + state.v3 * e3)
    w_plus = state.H2 * e2 + state.H3 * e3
    w_minus = state.Hv2 * e2 + state.Hv3 * e3
    w_perp = state.Hv3 * e2 - state.Hv2 * e3
    eta_sq = e2 * e2 + e3 * e3
    hv_sq = state.Hv2 ** 2 + state.Hv3 ** 2
    return (
        ell * ell
        + w_plus ** 2
        + w_minus ** 2
        - state.E1 ** 2 * eta_sq
        - 2j * eps * state.E1 * tau * w_perp
        + eps ** 2 * hv_sq * tau * tau
    )


def pressure_symbol(state: BackgroundState, freq: FrequencyPoint, eps: float | None = None) -> complex:
    """Symbol of the companion operator P = L - 2 L_gamma^2 + 2 K^2 (equals sigma- - sigma+)."""
    tau = freq.tau
    e2, e3 = freq.eta2, freq.eta3
    ell = tau + 1j * (state.v2 * e2 + state.v3 * e3)  # symbol of gamma + d_t + v'.grad
    k_hat = 1j * (state.H2 * e2 + state.H3 * e3)  # symbol of H'.grad
    return front_symbol(state, freq, eps) - 2.0 * ell * ell + 2.0 * k_hat * k_hat


def _stable_quadratic_roots(a: complex, b: complex, c: complex) -> tuple[complex, complex]:
    if a == 0:
        raise ArithmeticError("degenerate leading coefficient in the front symbol")
    disc = cmath.sqrt(b * b - 4.0 * a * c)
    # pick the sign that avoids cancellation in -b -+ disc
    if (b.conjugate() * disc).real < 0:
        disc = -disc
    q = -0.5 * (b + disc)
    if q == 0:
        return 0j, 0j
    return q / a, c / q


def dispersion_roots(state: BackgroundState, eta_prime, eps: float | None = None) -> tuple[complex, complex]:
    """Both roots of L(tau; eta') = 0, larger real part first."""
    e = np.asarray(eta_prime, dtype=float)
    if not np.any(e):
        raise ValueError("eta' must be nonzero")
    fs = front_coefficients(state, e, eps)
    r1, r2 = _stable_quadratic_roots(fs.a2, fs.a1, fs.a0)
    return (r1, r2) if r1.real >= r2.real else (r2, r1)


def growth_rate(state: BackgroundState, directions_n: int = 64, eps: float | None = None) -> float:
    """Largest Re tau of the dispersion roots over unit directions (uniform angles)."""
    if directions_n < 8:
        raise ValueError("directions_n must be >= 8")
    best = -math.inf
    for k in range(directions_n):
        phi = 2.0 * math.pi * k / directions_n
        r = dispersion_roots(state, (math.cos(phi), math.sin(phi)), eps)
        best = max(best, r[0].real, r[1].real)
    return best


def unstable_roots_normalized(state: BackgroundState, eta_prime) -> list[FrequencyPoint]:
    """Dispersion roots with Re tau > 0 at eta', projected onto the hemisphere."""
    out = []
    for r in dispersion_roots(state, eta_prime):
        if r.real > 0:
            out.append(FrequencyPoint.from_tau(r, eta_prime).normalized())
    return out
