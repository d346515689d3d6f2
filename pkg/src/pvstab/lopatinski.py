"""Lopatinski determinant of the transformed boundary problem.

Delta is homogeneous of degree zero in (tau, eta'), so all searches work on
the hemisphere |tau|^2 + eta^2 = 1. Zeros with Re tau > 0 mean ill-posedness;
under the stability condition zeros occur only on Re tau = 0 and are simple.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from pvstab import kernels
from pvstab.background import BackgroundState
from pvstab.symbols import FrequencyPoint, eval_symbols

ROOT_TOL = 1e-9
SIMPLICITY_TOL = 1e-6
# |Delta| below this on a contour means the contour passes through a zero
CONTOUR_FLOOR = 1e-10

T = 0.5 * np.array([[1, -1, 0, 0], [1, 1, 0, 0], [0, 0, 1, -1], [0, 0, 1, 1]], dtype=float)
T_INV = np.array([[1, 1, 0, 0], [-1, 1, 0, 0], [0, 0, 1, 1], [0, 0, -1, 1]], dtype=float)
E_PLUS = np.array([1.0, -1.0, 0.0, 0.0])
E_MINUS = np.array([0.0, 0.0, 1.0, -1.0])


class ContourHazard(ArithmeticError):
    """The argument-principle contour passes (numerically) through a zero."""


@dataclass(frozen=True)
class BoundarySystem:
    A_cal: np.ndarray
    beta: np.ndarray
    T: np.ndarray
    T_inv: np.ndarray
    E_plus: np.ndarray
    E_minus: np.ndarray

    @property
    def stable_matrix(self) -> np.ndarray:
        """beta (E+ E-), the 2x2 matrix whose determinant is Delta."""
        return self.beta @ np.column_stack([self.E_plus, self.E_minus])

    @property
    def beta_tilde(self) -> np.ndarray:
        return self.beta @ self.T_inv


def boundary_system(state: BackgroundState, freq: FrequencyPoint) -> BoundarySystem:
    s = eval_symbols(state, freq)
    lam = s.Lambda
    A = np.zeros((4, 4), dtype=complex)
    A[0, 1] = A[1, 0] = s.eta
    A[2, 3] = A[3, 2] = s.sigma
    beta = np.array(
        [
            [s.sigma_minus / lam ** 2, 0.0, s.sigma_plus / lam ** 2, 0.0],
            [0.0, s.sigma / lam, 0.0, -s.eta / lam],
        ],
        dtype=complex,
    )
    return BoundarySystem(A, beta, T, T_INV, E_PLUS, E_MINUS)


def lopatinski_det(state: BackgroundState, freq: FrequencyPoint) -> complex:
    return kernels.delta_scalar(state.params, freq.gamma, freq.delta, freq.eta2, freq.eta3)


def lopatinski_det_array(state: BackgroundState, points) -> np.ndarray:
    """Delta at an (n, 4) array of (gamma, delta, eta2, eta3) rows."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(p[:, 0] < 0):
        raise ValueError("gamma must be nonnegative")
    if np.any(np.all(p == 0.0, axis=1)):
        raise ValueError("the origin is not a frequency")
    return kernels.delta_array(state.params, p[:, 0], p[:, 1], p[:, 2], p[:, 3])


def det_via_boundary_matrix(state: BackgroundState, freq: FrequencyPoint) -> complex:
    """Delta computed as det of beta (E+ E-) with a dense determinant."""
    return complex(np.linalg.det(boundary_system(state, freq).stable_matrix))


def _numerator(state: BackgroundState, tau, eta2: float, eta3: float) -> np.ndarray:
    """Lambda^3 Delta: holomorphic in tau for Re tau > 0 (Lambda itself is not)."""
    tau = np.asarray(tau, dtype=complex)
    g, d = tau.real, tau.imag
    lam = np.sqrt(g * g + d * d + eta2 * eta2 + eta3 * eta3)
    return kernels.delta_array(state.params, g, d, eta2, eta3) * lam ** 3


# ---------------------------------------------------------------- boundary roots


@dataclass(frozen=True)
class RootRecord:
    location: FrequencyPoint
    residual: float
    derivative_mag: float
    simple: bool
    on_branch_cone: bool = False


@dataclass
class ScanResult:
    """Roots located on one direction slice plus refinements that did not converge."""

    roots: list = field(default_factory=list)
    unconverged: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def _unit(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float).reshape(2)
    n = np.hypot(d[0], d[1])
    if n == 0.0:
        raise ValueError("direction must be nonzero")
    return d / n


def delta_derivative(state: BackgroundState, freq: FrequencyPoint, h: float = 1e-6) -> complex:
    """Central difference of Delta in delta (Im tau) at fixed eta'."""
    step = h * freq.Lambda
    args = (freq.gamma, freq.eta2, freq.eta3)
    plus = kernels.delta_scalar(state.params, args[0], freq.delta + step, args[1], args[2])
    minus = kernels.delta_scalar(state.params, args[0], freq.delta - step, args[1], args[2])
    return (plus - minus) / (2.0 * step)


def _make_record(state, freq, simplicity_tol, on_cone=False) -> RootRecord:
    dmag = abs(delta_derivative(state, freq))
    return RootRecord(
        location=freq,
        residual=abs(lopatinski_det(state, freq)),
        derivative_mag=dmag,
        simple=dmag > simplicity_tol,
        on_branch_cone=on_cone,
    )


def _slice_point(theta: float, d: np.ndarray) -> FrequencyPoint:
    eta = math.cos(theta)
    return FrequencyPoint(0.0, math.sin(theta), eta * d[0], eta * d[1])


def scan_boundary_roots(
    state: BackgroundState,
    direction,
    grid_n: int = 512,
    root_tol: float = ROOT_TOL,
    simplicity_tol: float = SIMPLICITY_TOL,
) -> ScanResult:
    """Roots of Delta on the Re tau = 0 slice of the hemisphere in one eta' direction.

    The slice is tau = i sin(theta), eta' = cos(theta) d for theta in [-pi/2, pi/2].
    Where |eps delta| < eta Delta is real and sign changes are bracketed; elsewhere
    (and near tangencies) local minima of |Delta| are refined.
    """
    if grid_n < 16:
        raise ValueError("grid_n must be >= 16")
    d = _unit(direction)
    theta = np.linspace(-math.pi / 2, math.pi / 2, grid_n)
    eta = np.cos(theta)
    delta = np.sin(theta)
    vals = kernels.delta_array(state.params, np.zeros_like(theta), delta, eta * d[0], eta * d[1])
    real_region = np.abs(state.eps * delta) < eta
    mag = np.abs(vals)

    def f_abs(t):
        return abs(lopatinski_det(state, _slice_point(t, d)))

    def f_re(t):
        return lopatinski_det(state, _slice_point(t, d)).real

    candidates: list[float] = []
    unconverged: list[float] = []
    for i in range(grid_n - 1):
        if real_region[i] and real_region[i + 1]:
            a, b = vals[i].real, vals[i + 1].real
            if a == 0.0:
                candidates.append(theta[i])
            elif a * b < 0.0:
                t = brentq(f_re, theta[i], theta[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
                (candidates if f_abs(t) <= root_tol else unconverged).append(t)
    for i in range(1, grid_n - 1):
        if mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]:
            if real_region[i - 1] and real_region[i + 1] and vals[i - 1].real * vals[i + 1].real < 0:
                continue
            res = minimize_scalar(f_abs, bounds=(theta[i - 1], theta[i + 1]), method="bounded",
                                  options={"xatol": 1e-14})
            if res.fun <= root_tol:
                candidates.append(float(res.x))
            elif res.fun <= 1e3 * root_tol:
                unconverged.append(float(res.x))
    # the two cone points, where sigma switches branch
    cone = math.atan(1.0 / state.eps)
    for t in (-cone, cone):
        p = _cone_point(state, t, d)
        if abs(lopatinski_det(state, p)) <= root_tol:
            candidates.append(t)

    candidates.sort()
    roots = []
    last = None
    for t in candidates:
        if last is not None and t - last < 1e-7:
            continue
        last = t
        on_cone = abs(abs(t) - cone) < 1e-7
        p = _cone_point(state, t, d) if on_cone else _slice_point(t, d)
        roots.append(_make_record(state, p, simplicity_tol, on_cone))
    return ScanResult(roots=roots, unconverged=unconverged)


def _cone_point(state: BackgroundState, theta: float, d: np.ndarray) -> FrequencyPoint:
    """Slice point at theta with delta nudged so eta^2 - eps^2 delta^2 is as close to 0 as floats allow."""
    eta = math.cos(theta)
    delta = math.copysign(eta / state.eps, theta)
    best, best_rad = delta, abs(eta * eta - (state.eps * delta) ** 2)
    cur = delta
    for direction in (math.inf, -math.inf):
        cur = delta
        for _ in range(64):
            cur = math.nextafter(cur, direction)
            rad = abs(eta * eta - (state.eps * cur) ** 2)
            if rad < best_rad:
                best, best_rad = cur, rad
            if best_rad == 0.0:
                break
    return FrequencyPoint(0.0, best, eta * d[0], eta * d[1])


def branch_cone_roots(state: BackgroundState, simplicity_tol: float = SIMPLICITY_TOL) -> list[RootRecord]:
    """Exact zeros of Delta on the cone eps*delta = +-eta, Re tau = 0.

    There sigma = 0 and Delta = -eta (w_perp -+ E1 eta)^2 / Lambda^3, so the zeros
    are the unit directions d with Hv_perp . d = +-E1 (two per sign when |Hv| > |E1|).
    Points are returned on the hemisphere.
    """
    hv = math.hypot(state.Hv2, state.Hv3)
    if hv == 0.0 or abs(state.E1) > hv:
        return []
    # w_perp = eta * (Hv3, -Hv2) . d ; write (Hv3, -Hv2) = hv (cos a, sin a)
    a = math.atan2(-state.Hv2, state.Hv3)
    theta_c = math.atan(1.0 / state.eps)
    out = []
    for sign in (1.0, -1.0):
        c = sign * state.E1 / hv
        b = math.acos(max(-1.0, min(1.0, c)))
        for phi in (a + b, a - b) if 0.0 < b < math.pi else (a + b,):
            d = np.array([math.cos(phi), math.sin(phi)])
            p = _cone_point(state, sign * theta_c, d)
            out.append(_make_record(state, p, simplicity_tol, on_cone=True))
    return out


# ---------------------------------------------------------------- argument principle


@dataclass(frozen=True)
class ContourParams:
    gamma0: float = 1e-4
    R: float | None = None
    r_sigma: float = 0.995
    max_depth: int = 30

    def radius(self, eps: float) -> float:
        if self.R is not None:
            return float(self.R)
        return max(self.r_sigma / math.sqrt(1.0 - self.r_sigma ** 2), 2.0 / eps)


@dataclass
class ContourResult:
    count: int
    raw: complex
    moments: list
    min_abs_delta: float
    segments: int


_GL_CACHE: dict = {}


def _fd_step(tau, eta: float, eps: float):
    """Central-difference step 1e-6 Lambda, shrunk near the sigma branch points tau = +-i eta/eps."""
    tau = np.asarray(tau, dtype=complex)
    lam = np.sqrt(np.abs(tau) ** 2 + eta * eta)
    branch = eta / eps
    dist = np.minimum(np.abs(tau - 1j * branch), np.abs(tau + 1j * branch))
    return 1e-6 * np.minimum(lam, np.maximum(dist, 1e-6 * lam))


def _gauss(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _contour_integrals(state, d, params: ContourParams, quad_n: int, n_moments: int) -> ContourResult:
    g0 = params.gamma0
    R = params.radius(state.eps)
    corners = [complex(g0, -R), complex(R, -R), complex(R, R), complex(g0, R), complex(g0, -R)]
    x, w = _gauss(quad_n)
    e2, e3 = float(d[0]), float(d[1])
    eta = math.hypot(e2, e3)
    moments = np.zeros(n_moments + 1, dtype=complex)
    min_abs = math.inf
    segments = 0

    def delta_norm(tau):
        tau = np.asarray(tau)
        lam = np.sqrt(np.abs(tau) ** 2 + 1.0)
        return np.abs(_numerator(state, tau, e2, e3)) / lam ** 3

    def piece(a: complex, b: complex, depth: int):
        nonlocal min_abs, segments
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        tau = mid + half * x
        h = _fd_step(tau, eta, state.eps)
        N = _numerator(state, tau, e2, e3)
        dN = (_numerator(state, tau + 1j * h, e2, e3) - _numerator(state, tau - 1j * h, e2, e3)) / (2j * h)
        ends = _numerator(state, np.array([a, b]), e2, e3)
        dn = np.concatenate([delta_norm(tau), delta_norm(np.array([a, b]))])
        min_abs = min(min_abs, float(dn.min()))
        if min_abs < CONTOUR_FLOOR:
            raise ContourHazard(f"|Delta| = {min_abs:.3g} on the contour near tau = {a:.6g}")
        integrand = dN / N * half
        total = np.sum(w * integrand)
        increment = np.log(ends[1] / ends[0])
        # the principal log increment is trustworthy only for small phase changes
        phases = np.angle(np.concatenate([[ends[0]], N, [ends[1]]]))
        jumps = np.abs(np.angle(np.exp(1j * np.diff(phases))))
        ok = jumps.max() < math.pi / 4 and abs(total - increment) < 1e-5 * max(1.0, abs(increment))
        if not ok and depth < params.max_depth:
            piece(a, mid, depth + 1)
            piece(mid, b, depth + 1)
            return
        if not ok:
            raise ContourHazard(f"contour quadrature did not resolve near tau = {mid:.6g}")
        segments += 1
        powers = tau[None, :] ** np.arange(n_moments + 1)[:, None]
        moments[:] += (powers * (w * integrand)[None, :]).sum(axis=1)

    for a, b in zip(corners[:-1], corners[1:]):
        n_init = 4
        nodes = [a + (b - a) * k / n_init for k in range(n_init + 1)]
        for p, q in zip(nodes[:-1], nodes[1:]):
            piece(p, q, 0)

    moments /= 2j * math.pi
    raw = moments[0]
    count = int(round(raw.real))
    if abs(raw.real - count) > 1e-2 or abs(raw.imag) > 1e-2:
        raise ContourHazard(f"non-integer winding number {raw:.6g}")
    return ContourResult(count, complex(raw), list(moments[1:]), min_abs, segments)


def count_unstable_zeros(
    state: BackgroundState,
    direction,
    contour_radius_params: ContourParams | None = None,
    quad_n: int = 64,
) -> int:
    """Zeros of Delta in Re tau > 0 at fixed unit eta' = direction (argument principle)."""
    if quad_n < 64:
        raise ValueError("quad_n must be >= 64")
    params = contour_radius_params or ContourParams()
    return _contour_integrals(state, _unit(direction), params, quad_n, 0).count


def _newton_polish(state, tau: complex, d, iters: int = 50) -> complex:
    e2, e3 = float(d[0]), float(d[1])
    for _ in range(iters):
        h = 0.1 * float(_fd_step(tau, math.hypot(e2, e3), state.eps))
        N = _numerator(state, np.array([tau]), e2, e3)[0]
        dN = (_numerator(state, np.array([tau + 1j * h]), e2, e3)[0]
              - _numerator(state, np.array([tau - 1j * h]), e2, e3)[0]) / (2j * h)
        if dN == 0:
            break
        step = N / dN
        tau = tau - step
        if tau.real < 0:
            tau = complex(0.0, tau.imag)
        if abs(step) < 1e-15 * max(1.0, abs(tau)):
            break
    return tau


def locate_unstable_zeros(
    state: BackgroundState,
    direction,
    contour_radius_params: ContourParams | None = None,
    quad_n: int = 64,
) -> list[FrequencyPoint]:
    """Zeros inside the contour, from power-sum moments and Newton's identities, then polished.

    Returned on the hemisphere (normalized by Lambda).
    """
    d = _unit(direction)
    params = contour_radius_params or ContourParams()
    first = _contour_integrals(state, d, params, quad_n, 0)
    n = first.count
    if n == 0:
        return []
    res = _contour_integrals(state, d, params, quad_n, n)
    p = res.moments  # p[k-1] = sum z^k
    # Newton's identities: e_k = (1/k) sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1)) / k)
    coeffs = [(-1) ** k * e[k] for k in range(n + 1)]
    zeros = np.roots(coeffs) if n > 1 else np.array([-coeffs[1]])
    out = []
    for z in zeros:
        z = _newton_polish(state, complex(z), d)
        out.append(FrequencyPoint(max(z.real, 0.0), z.imag, d[0], d[1]).normalized())
    return out


# ---------------------------------------------------------------- coercivity constant near roots


@dataclass(frozen=True)
class LemmaEstimate:
    k0: float
    degenerate: bool
    probes: int

    def __float__(self):
        return self.k0


def stable_matrix_smin(state: BackgroundState, points) -> np.ndarray:
    """Smallest singular value of beta (E+ E-) at an (n, 4) array of points."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    Bs = stable_matrices(state, p)
    return np.linalg.svd(Bs, compute_uv=False)[:, -1]


def stable_matrices(state: BackgroundState, p: np.ndarray) -> np.ndarray:
    """Batched 2x2 matrices beta (E+ E-) = [[s-/L^2, s+/L^2], [-sigma/L, eta/L]]."""
    s = _symbols_array(state, p)
    lam = s["Lambda"]
    out = np.empty((p.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = s["sigma_minus"] / lam ** 2
    out[:, 0, 1] = s["sigma_plus"] / lam ** 2
    out[:, 1, 0] = -s["sigma"] / lam
    out[:, 1, 1] = s["eta"] / lam
    return out


def _symbols_array(state: BackgroundState, p: np.ndarray) -> dict:
    g, d, e2, e3 = p[:, 0], p[:, 1], p[:, 2], p[:, 3]
    tau = g + 1j * d
    eta = np.hypot(e2, e3)
    ell = tau + 1j * (state.v2 * e2 + state.v3 * e3)
    w_plus = state.H2 * e2 + state.H3 * e3
    w_minus = state.Hv2 * e2 + state.Hv3 * e3
    w_perp = state.Hv3 * e2 - state.Hv2 * e3
    eps, E1 = state.eps, state.E1
    sigma_minus = (w_minus ** 2 - E1 ** 2 * eta ** 2 + eps ** 2 * (state.Hv2 ** 2 + state.Hv3 ** 2) * tau ** 2
                   - 2j * eps * E1 * tau * w_perp)
    return {
        "eta": eta,
        "Lambda": np.sqrt(g * g + d * d + eta * eta),
        "sigma": kernels.sigma_array(g, d, eta, eps),
        "sigma_plus": ell ** 2 + w_plus ** 2,
        "sigma_minus": sigma_minus,
    }


def lemma_constant(
    state: BackgroundState,
    root: RootRecord,
    probe_radius: float = 1e-2,
    n_probes: int = 512,
    rng: np.random.Generator | None = None,
    degenerate_tol: float = 1e-12,
) -> LemmaEstimate:
    """Empirical k0 with |beta(E+,E-) Z|^2 >= k0 gamma^2 |Z|^2 near a boundary root.

    Probes are hemisphere points within ``probe_radius`` of the root with gamma > 0,
    including points straight above the root at geometric heights.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    c = root.location.normalized().as_array()
    pert = rng.standard_normal((n_probes, 4))
    pert -= np.outer(pert @ c, c)
    pert /= np.linalg.norm(pert, axis=1, keepdims=True)
    radii = probe_radius * rng.random(n_probes) ** (1 / 3)
    pts = c + radii[:, None] * pert
    pts[:, 0] = np.abs(pts[:, 0])
    heights = probe_radius * np.logspace(-4, 0, 32)
    vertical = np.tile(c, (32, 1))
    vertical[:, 0] = heights
    pts = np.vstack([pts, vertical])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts = pts[pts[:, 0] > 0]
    smin = stable_matrix_smin(state, pts)
    k0 = float(np.min(smin ** 2 / pts[:, 0] ** 2))
    if not k0 > degenerate_tol:
        return LemmaEstimate(0.0, True, len(pts))
    return LemmaEstimate(k0, False, len(pts))
