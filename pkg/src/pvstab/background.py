"""Constant planar background state and its stability test.

Two equivalent criteria are exposed: the closed-form margin on the vacuum
electric field, and positivity of the 2x2 quadratic form that controls
hyperbolicity of the front equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_BOUNDARY_TOL = 1e-9
# guard for the (algebraically nonnegative) discriminant
_DISC_FLOOR = -1e-14


@dataclass(frozen=True)
class BackgroundState:
    """Uniform flow with a planar interface at rest.

    Only tangential components are stored: the normal components of the
    plasma and vacuum magnetic fields vanish identically.
    """

    v2: float = 0.0
    v3: float = 0.0
    H2: float = 0.0
    H3: float = 0.0
    Hv2: float = 0.0
    Hv3: float = 0.0
    E1: float = 0.0
    eps: float = 0.05

    def __post_init__(self):
        for name in ("v2", "v3", "H2", "H3", "Hv2", "Hv3", "E1", "eps"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)):
                raise TypeError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")

    @property
    def v(self) -> np.ndarray:
        return np.array([self.v2, self.v3])

    @property
    def H(self) -> np.ndarray:
        return np.array([self.H2, self.H3])

    @property
    def Hv(self) -> np.ndarray:
        return np.array([self.Hv2, self.Hv3])

    @property
    def params(self) -> tuple:
        """Flat parameter tuple consumed by the compiled kernels."""
        return (self.v2, self.v3, self.H2, self.H3, self.Hv2, self.Hv3, self.E1, self.eps)

    def replace(self, **changes) -> "BackgroundState":
        return replace(self, **changes)


@dataclass(frozen=True)
class StabilityVerdict:
    margin: float
    q_eigs: tuple
    stable: bool
    marginal: bool = False
    extras: dict = field(default_factory=dict, compare=False)


def _field_energy_bound(state: BackgroundState) -> float:
    """Smaller eigenvalue of H H^T + Hv Hv^T, i.e. the right side of the threshold."""
    h2 = state.H2 ** 2 + state.H3 ** 2
    g2 = state.Hv2 ** 2 + state.Hv3 ** 2
    total = h2 + g2
    cross = state.H2 * state.Hv3 - state.H3 * state.Hv2
    dot = state.H2 * state.Hv2 + state.H3 * state.Hv3
    # total**2 - 4 cross**2 rewritten as a sum of squares
    disc = (h2 - g2) ** 2 + 4.0 * dot ** 2
    if disc < 0.0:
        if disc < _DISC_FLOOR * max(1.0, total ** 2):
            raise ArithmeticError(f"negative discriminant {disc!r}")
        disc = 0.0
    denom = total + math.sqrt(disc)
    if denom == 0.0:
        return 0.0
    # (total - sqrt(disc)) / 2 without cancellation
    return 2.0 * cross ** 2 / denom


def stability_margin(state: BackgroundState) -> float:
    """Threshold minus E1**2; positive exactly when the interface is stable."""
    return _field_energy_bound(state) - state.E1 ** 2


def quadratic_form_matrix(state: BackgroundState) -> np.ndarray:
    h, g = state.H, state.Hv
    return np.outer(h, h) + np.outer(g, g) - state.E1 ** 2 * np.eye(2)


def verdict(state: BackgroundState, boundary_tol: float = DEFAULT_BOUNDARY_TOL) -> StabilityVerdict:
    if boundary_tol < 0:
        raise ValueError("boundary_tol must be nonnegative")
    margin = stability_margin(state)
    q_eigs = tuple(float(x) for x in np.linalg.eigvalsh(quadratic_form_matrix(state)))
    return StabilityVerdict(
        margin=margin,
        q_eigs=q_eigs,
        stable=margin > boundary_tol,
        marginal=abs(margin) <= boundary_tol,
    )
