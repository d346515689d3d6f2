"""Closed-form solution of the transformed half-line problem.

For x1 > 0 the only decaying solutions of dY/dx1 = A Y are combinations of the
stable modes E+ exp(-eta x1) and E- exp(-sigma x1); the two coefficients come
from the 2x2 boundary system beta (E+ E-) c = G whose determinant is Delta.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from pvstab.background import BackgroundState
from pvstab.lopatinski import E_MINUS, E_PLUS, boundary_system
from pvstab.symbols import FrequencyPoint, SymbolValues, eval_symbols

SOLVE_FLOOR = 1e-8


class NearRootError(ArithmeticError):
    """|Delta| is below the solve floor; the trace estimate degenerates here."""


@dataclass(frozen=True)
class BoundaryData:
    """Transformed boundary data G = (g1 / Lambda^2, eta sigma g2 / Lambda)."""

    G: np.ndarray
    g1_hat: complex | None = None
    g2_hat: complex | None = None

    def __post_init__(self):
        G = np.asarray(self.G, dtype=complex).reshape(2)
        if not np.all(np.isfinite(G)):
            raise ValueError("G must be finite")
        object.__setattr__(self, "G", G)

    @classmethod
    def from_transformed(cls, state: BackgroundState, freq: FrequencyPoint, g1_hat: complex, g2_hat: complex):
        s = eval_symbols(state, freq)
        G = np.array([g1_hat / s.Lambda ** 2, s.eta * s.sigma * g2_hat / s.Lambda])
        return cls(G=G, g1_hat=complex(g1_hat), g2_hat=complex(g2_hat))


@dataclass(frozen=True)
class BVPSolution:
    c_plus: complex
    c_minus: complex
    Y0: np.ndarray
    decay: tuple
    A_cal: np.ndarray
    beta: np.ndarray

    def Y(self, x1) -> np.ndarray:
        """Y at the points x1 (shape (..., 4))."""
        x = np.asarray(x1, dtype=float)[..., None]
        eta, sigma = self.decay
        return self.c_plus * E_PLUS * np.exp(-eta * x) + self.c_minus * E_MINUS * np.exp(-sigma * x)

    def dY(self, x1) -> np.ndarray:
        x = np.asarray(x1, dtype=float)[..., None]
        eta, sigma = self.decay
        return -eta * self.c_plus * E_PLUS * np.exp(-eta * x) - sigma * self.c_minus * E_MINUS * np.exp(-sigma * x)

    def ode_residual(self, x1) -> float:
        Y = self.Y(x1)
        return float(np.max(np.abs(self.dY(x1) - Y @ self.A_cal.T)))

    def boundary_residual(self, data: BoundaryData) -> float:
        return float(np.max(np.abs(self.beta @ self.Y0 - data.G)))


def solve(
    state: BackgroundState,
    freq: FrequencyPoint,
    data: BoundaryData,
    solve_floor: float = SOLVE_FLOOR,
) -> BVPSolution:
    bs = boundary_system(state, freq)
    M = bs.stable_matrix
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) <= solve_floor:
        raise NearRootError(f"|Delta| = {abs(det):.3g} <= solve floor {solve_floor:g}")
    g = data.G
    c_plus = (M[1, 1] * g[0] - M[0, 1] * g[1]) / det
    c_minus = (M[0, 0] * g[1] - M[1, 0] * g[0]) / det
    eta = bs.A_cal[0, 1].real
    sigma = bs.A_cal[2, 3]
    Y0 = c_plus * E_PLUS + c_minus * E_MINUS
    return BVPSolution(complex(c_plus), complex(c_minus), Y0, (eta, complex(sigma)), bs.A_cal, bs.beta)


def trace_ratio(state: BackgroundState, freq: FrequencyPoint, data: BoundaryData, solve_floor: float = SOLVE_FLOOR) -> float:
    """gamma^2 |Y(0)|^2 / (Lambda^2 |G|^2)."""
    gnorm = np.linalg.norm(data.G)
    if gnorm == 0.0:
        raise ValueError("G must be nonzero")
    sol = solve(state, freq, data, solve_floor)
    return float(freq.gamma ** 2 * np.linalg.norm(sol.Y0) ** 2 / (freq.Lambda ** 2 * gnorm ** 2))


def worst_trace_ratio(
    state: BackgroundState,
    freq: FrequencyPoint,
    n_data: int = 32,
    rng: np.random.Generator | None = None,
    solve_floor: float = SOLVE_FLOOR,
) -> float:
    """Max of trace_ratio over random complex unit G (batched)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    G = rng.standard_normal((n_data, 2)) + 1j * rng.standard_normal((n_data, 2))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    best = 0.0
    for g in G:
        best = max(best, trace_ratio(state, freq, BoundaryData(g), solve_floor))
    return best


def reconstruct_pressures(sol: BVPSolution, symbols: SymbolValues) -> tuple[Callable, Callable]:
    """Pressure transforms q+(x1) = y2+/eta and q-(x1) = y2-/sigma."""
    if not symbols.eta > 0.0:
        raise ValueError("q+ is not recoverable from Y when eta = 0")
    if symbols.sigma == 0:
        raise ValueError("q- is not recoverable from Y when sigma = 0")
    eta, sigma = symbols.eta, symbols.sigma

    def q_plus(x1):
        return sol.Y(x1)[..., 1] / eta

    def q_minus(x1):
        return sol.Y(x1)[..., 3] / sigma

    return q_plus, q_minus
