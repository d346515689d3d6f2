"""Frequency-domain symbols of the transformed boundary problem."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pvstab import kernels
from pvstab.background import BackgroundState


@dataclass(frozen=True)
class FrequencyPoint:
    """Dual variable (tau, eta') with tau = gamma + i delta and gamma >= 0."""

    gamma: float
    delta: float
    eta2: float
    eta3: float

    def __post_init__(self):
        for name in ("gamma", "delta", "eta2", "eta3"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma!r}")
        if self.gamma == 0.0 and self.delta == 0.0 and self.eta2 == 0.0 and self.eta3 == 0.0:
            raise ValueError("the origin is not a frequency")

    @classmethod
    def from_tau(cls, tau: complex, eta_prime) -> "FrequencyPoint":
        tau = complex(tau)
        return cls(tau.real, tau.imag, float(eta_prime[0]), float(eta_prime[1]))

    @property
    def tau(self) -> complex:
        return complex(self.gamma, self.delta)

    @property
    def eta_prime(self) -> np.ndarray:
        return np.array([self.eta2, self.eta3])

    @property
    def eta(self) -> float:
        return math.hypot(self.eta2, self.eta3)

    @property
    def Lambda(self) -> float:
        return math.sqrt(self.gamma ** 2 + self.delta ** 2 + self.eta2 ** 2 + self.eta3 ** 2)

    def scaled(self, s: float) -> "FrequencyPoint":
        if s <= 0:
            raise ValueError("scale must be positive")
        return FrequencyPoint(s * self.gamma, s * self.delta, s * self.eta2, s * self.eta3)

    def normalized(self) -> "FrequencyPoint":
        """Radial projection onto the hemisphere |tau|^2 + eta^2 = 1."""
        return self.scaled(1.0 / self.Lambda)

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma, self.delta, self.eta2, self.eta3])


@dataclass(frozen=True)
class SymbolValues:
    ell: complex
    w_plus: float
    w_minus: float
    w_perp: float
    eta: float
    Lambda: float
    sigma: complex
    sigma_plus: complex
    sigma_minus: complex


def principal_sqrt(tau: complex, eta: float, eps: float) -> complex:
    """Branch of sqrt(eta^2 + eps^2 tau^2) with positive real part for Re tau > 0.

    On Re tau = 0 the continuous extension is returned. The branch is picked
    from explicit real formulas rather than a library complex square root.
    """
    tau = complex(tau)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if tau.real < 0.0:
        raise ValueError("Re tau must be nonnegative")
    if tau == 0 and eta == 0:
        raise ValueError("sigma is undefined at the origin")
    return kernels.sigma_scalar(tau.real, tau.imag, abs(float(eta)), float(eps))


def eval_symbols(state: BackgroundState, freq: FrequencyPoint) -> SymbolValues:
    tau = freq.tau
    e2, e3 = freq.eta2, freq.eta3
    eta = freq.eta
    ell = tau + 1j * (state.v2 * e2 + state.v3 * e3)
    w_plus = state.H2 * e2 + state.H3 * e3
    w_minus = state.Hv2 * e2 + state.Hv3 * e3
    w_perp = state.Hv3 * e2 - state.Hv2 * e3
    hv_sq = state.Hv2 ** 2 + state.Hv3 ** 2
    eps, E1 = state.eps, state.E1
    sigma_minus = (
        w_minus ** 2
        - E1 ** 2 * eta ** 2
        + eps ** 2 * hv_sq * tau ** 2
        - 2j * eps * E1 * tau * w_perp
    )
    return SymbolValues(
        ell=ell,
        w_plus=w_plus,
        w_minus=w_minus,
        w_perp=w_perp,
        eta=eta,
        Lambda=freq.Lambda,
        sigma=principal_sqrt(tau, eta, eps),
        sigma_plus=ell ** 2 + w_plus ** 2,
        sigma_minus=sigma_minus,
    )


def hemisphere_point(theta: float, psi: float, phi: float) -> FrequencyPoint:
    """Spherical angles on the hemisphere; theta = 0 is the pole tau = 1."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError("theta must lie in [0, pi/2]")
    if not (-math.pi <= psi <= math.pi and -math.pi <= phi <= math.pi):
        raise ValueError("psi and phi must lie in [-pi, pi]")
    st = math.sin(theta)
    sp = math.sin(psi)
    # cos(pi/2) is 6e-17, not 0; keep the boundary exact
    gamma = 0.0 if theta == math.pi / 2 else math.cos(theta)
    return FrequencyPoint(gamma, st * math.cos(psi), st * sp * math.cos(phi), st * sp * math.sin(phi))


def random_sigma_points(rng: np.random.Generator, n: int, boundary_n: int = 0) -> np.ndarray:
    """Uniform samples on the hemisphere as an (n, 4) array of (gamma, delta, eta2, eta3).

    The last ``boundary_n`` rows have gamma = 0 exactly.
    """
    x = rng.standard_normal((n, 4))
    x[:, 0] = np.abs(x[:, 0])
    if boundary_n:
        x[n - boundary_n:, 0] = 0.0
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x
