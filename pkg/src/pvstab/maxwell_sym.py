"""Secondary symmetrization of the vacuum Maxwell system.

The vacuum unknown is V = (H, E) in R^6. The constant Maxwell matrices B_j
are rewritten as the symmetric family (B0, B1, B2, B3) parametrized by a
vector nu; the two forms agree on fields obeying the divergence constraints.
With nu = eps * v the family is hyperbolic (B0 > 0) iff |nu| < 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pvstab.background import BackgroundState
from pvstab.symbols import FrequencyPoint

_B1 = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, -1, 0],
        [0, 0, 0, 0, 0, 0],
        [0, 0, -1, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
    ],
    dtype=float,
)
_B2 = np.array(
    [
        [0, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, 0, 0],
        [0, 0, 0, -1, 0, 0],
        [0, 0, -1, 0, 0, 0],
        [0, 0, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0],
    ],
    dtype=float,
)
_B3 = np.array(
    [
        [0, 0, 0, 0, -1, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [-1, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class SymmetrizationFamily:
    nu: np.ndarray
    B0: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    B3: np.ndarray
    B_maxwell: tuple
    A_mhd: tuple

    @property
    def calB(self) -> tuple:
        return (self.B1, self.B2, self.B3)


def _symmetric_family(nu):
    n1, n2, n3 = nu
    B0 = np.array(
        [
            [1, 0, 0, 0, n3, -n2],
            [0, 1, 0, -n3, 0, n1],
            [0, 0, 1, n2, -n1, 0],
            [0, -n3, n2, 1, 0, 0],
            [n3, 0, -n1, 0, 1, 0],
            [-n2, n1, 0, 0, 0, 1],
        ],
        dtype=float,
    )
    # sign of the first matrix reflects the mirrored vacuum region
    B1 = np.array(
        [
            [-n1, -n2, -n3, 0, 0, 0],
            [-n2, n1, 0, 0, 0, 1],
            [-n3, 0, n1, 0, -1, 0],
            [0, 0, 0, -n1, -n2, -n3],
            [0, 0, -1, -n2, n1, 0],
            [0, 1, 0, -n3, 0, n1],
        ],
        dtype=float,
    )
    B2 = np.array(
        [
            [-n2, n1, 0, 0, 0, 1],
            [n1, n2, n3, 0, 0, 0],
            [0, n3, -n2, -1, 0, 0],
            [0, 0, -1, -n2, n1, 0],
            [0, 0, 0, n1, n2, n3],
            [1, 0, 0, 0, n3, -n2],
        ],
        dtype=float,
    )
    B3 = np.array(
        [
            [-n3, 0, n1, 0, -1, 0],
            [0, -n3, n2, 1, 0, 0],
            [n1, n2, n3, 0, 0, 0],
            [0, 1, 0, -n3, 0, n1],
            [-1, 0, 0, 0, -n3, n2],
            [0, 0, 0, n1, n2, n3],
        ],
        dtype=float,
    )
    return B0, B1, B2, B3


def _mhd_matrices(state: BackgroundState):
    v = (0.0, state.v2, state.v3)
    H = (0.0, state.H2, state.H3)
    eye3 = np.eye(3)
    return tuple(np.kron(np.array([[v[k], -H[k]], [-H[k], v[k]]]), eye3) for k in range(3))


def family_from_nu(nu, state: BackgroundState | None = None) -> SymmetrizationFamily:
    """Family for an arbitrary constant vector nu (A_mhd from ``state`` or zero flow)."""
    nu = np.asarray(nu, dtype=float).reshape(3)
    B0, B1, B2, B3 = _symmetric_family(nu)
    state = state if state is not None else BackgroundState()
    for m in (B0, B1, B2, B3):
        m.setflags(write=False)
    return SymmetrizationFamily(
        nu=nu,
        B0=B0,
        B1=B1,
        B2=B2,
        B3=B3,
        B_maxwell=(_B1.copy(), _B2.copy(), _B3.copy()),
        A_mhd=_mhd_matrices(state),
    )


def build_family(state: BackgroundState) -> SymmetrizationFamily:
    """Family with the standard choice nu = eps * (0, v2, v3)."""
    nu = state.eps * np.array([0.0, state.v2, state.v3])
    return family_from_nu(nu, state)


def hyperbolicity_check(family: SymmetrizationFamily) -> tuple[float, bool]:
    min_eig = float(np.linalg.eigvalsh(family.B0)[0])
    return min_eig, min_eig > 0.0


def equivalence_operator(family: SymmetrizationFamily, xi) -> np.ndarray:
    """B0 * sum_j B_j xi_j - sum_j calB_j xi_j, the symbol-level gap between both forms."""
    xi = np.asarray(xi, dtype=float)
    maxwell = sum(x * b for x, b in zip(xi, family.B_maxwell))
    symmetric = sum(x * b for x, b in zip(xi, family.calB))
    return family.B0 @ maxwell - symmetric


def constrained_vectors(xi, rng: np.random.Generator, n: int, constrained: bool = True) -> np.ndarray:
    """Random complex 6-vectors, optionally projected onto the divergence-free subspace.

    The constraint is xi_minus . H = xi_minus . E = 0 with xi_minus = (-xi1, xi2, xi3).
    Returns an (n, 6) array.
    """
    V = rng.standard_normal((n, 6)) + 1j * rng.standard_normal((n, 6))
    if not constrained:
        return V
    xm = np.array([-xi[0], xi[1], xi[2]], dtype=float)
    P = np.eye(3) - np.outer(xm, xm) / (xm @ xm)
    return np.concatenate([V[:, :3] @ P.T, V[:, 3:] @ P.T], axis=1)


def constrained_equivalence_residual(
    family: SymmetrizationFamily,
    freq: FrequencyPoint,
    trials: int,
    rng: np.random.Generator | None = None,
    constrained: bool = True,
) -> float:
    """Max-norm gap between the two Maxwell forms on constrained random vectors.

    The tangential dual variables come from ``freq``; the normal one xi1 is
    drawn at random per trial. Vectors are unit-normalized so the value is a
    relative residual.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    worst = 0.0
    for _ in range(trials):
        xi = np.array([rng.standard_normal(), freq.eta2, freq.eta3])
        V = constrained_vectors(xi, rng, 1, constrained)[0]
        V /= np.linalg.norm(V)
        M = equivalence_operator(family, xi)
        worst = max(worst, float(np.max(np.abs(M @ V))))
    return worst
