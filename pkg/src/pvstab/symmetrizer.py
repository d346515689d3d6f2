"""Degenerate Kreiss symmetrizer: patchwise certification over the hemisphere.

Each patch is a spherical cap on the hemisphere (chordal radius in R^4) that is
tagged interior (gamma > 0), boundary_regular (gamma ~ 0, Delta != 0) or
boundary_degenerate (centered at a zero of Delta). The symmetrizer is

    r = diag(-w, K, -w, K),  w = 1 (regular patches) or gamma^2 (degenerate),

and a patch is certified when, at every sample,

    Re(r T A T^-1)       >= kappa * eps * min(eta, gamma) * W,   W = diag(w, 1, w, 1)
    r + C bt^* bt - w I  >= 0,                                   bt = beta T^-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from pvstab import kernels
from pvstab.background import BackgroundState
from pvstab.lopatinski import (
    ROOT_TOL,
    T,
    T_INV,
    RootRecord,
    branch_cone_roots,
    lopatinski_det,
    scan_boundary_roots,
)
from pvstab.symbols import FrequencyPoint

INTERIOR = "interior"
BOUNDARY_REGULAR = "boundary_regular"
BOUNDARY_DEGENERATE = "boundary_degenerate"
CASE_TAGS = (INTERIOR, BOUNDARY_REGULAR, BOUNDARY_DEGENERATE)

INTERIOR_TOL = 0.05
KAPPA = 1.0 / math.sqrt(2.0)
EIG_TOL = 1e-12
MAX_EXP = 20
SLOPE_RANGE = (1.9, 2.1)


def _kappa(slack: float) -> float:
    return KAPPA * (1.0 - slack)


def _on_sigma(p: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(float(np.dot(p, p)) - 1.0) <= tol and p[0] >= 0.0


def classify(
    state: BackgroundState,
    point: FrequencyPoint,
    interior_tol: float = INTERIOR_TOL,
    root_tol: float = ROOT_TOL,
) -> str:
    p = point.as_array()
    if not _on_sigma(p):
        raise ValueError("point must lie on the hemisphere to 1e-12")
    if point.gamma > interior_tol:
        return INTERIOR
    if abs(lopatinski_det(state, point)) <= root_tol:
        return BOUNDARY_DEGENERATE
    return BOUNDARY_REGULAR


def r_matrix(case_tag: str, K: float, gamma: float) -> np.ndarray:
    w = gamma * gamma if case_tag == BOUNDARY_DEGENERATE else 1.0
    return np.diag([-w, K, -w, K]).astype(complex)


@dataclass
class SymmetrizerPatch:
    case_tag: str
    center: FrequencyPoint
    radius: float
    K: float = 1.0
    C: float = math.inf
    root: RootRecord | None = None

    def __post_init__(self):
        if self.case_tag not in CASE_TAGS:
            raise ValueError(f"unknown case tag {self.case_tag!r}")
        if self.K < 1.0:
            raise ValueError("K must be >= 1")

    def r(self, freq: FrequencyPoint) -> np.ndarray:
        """Symmetrizer at a point of the patch (evaluated on the hemisphere)."""
        g = freq.normalized().gamma
        return r_matrix(self.case_tag, self.K, g)

    @property
    def center_array(self) -> np.ndarray:
        return self.center.as_array()

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(points) - self.center_array, axis=1) <= self.radius


# ---------------------------------------------------------------- batched algebra


def _batched(state: BackgroundState, p: np.ndarray):
    """Diagonalized A (as T A T^-1) and beta_tilde at an (n, 4) array of points."""
    g, d, e2, e3 = p[:, 0], p[:, 1], p[:, 2], p[:, 3]
    n = p.shape[0]
    tau = g + 1j * d
    eta = np.hypot(e2, e3)
    lam = np.sqrt(g * g + d * d + eta * eta)
    sigma = kernels.sigma_array(g, d, eta, state.eps)
    ell = tau + 1j * (state.v2 * e2 + state.v3 * e3)
    w_plus = state.H2 * e2 + state.H3 * e3
    w_minus = state.Hv2 * e2 + state.Hv3 * e3
    w_perp = state.Hv3 * e2 - state.Hv2 * e3
    hv_sq = state.Hv2 ** 2 + state.Hv3 ** 2
    s_minus = (w_minus ** 2 - state.E1 ** 2 * eta ** 2 + state.eps ** 2 * hv_sq * tau ** 2
               - 2j * state.eps * state.E1 * tau * w_perp)
    s_plus = ell ** 2 + w_plus ** 2
    A = np.zeros((n, 4, 4), dtype=complex)
    A[:, 0, 1] = A[:, 1, 0] = eta
    A[:, 2, 3] = A[:, 3, 2] = sigma
    beta = np.zeros((n, 2, 4), dtype=complex)
    beta[:, 0, 0] = s_minus / lam ** 2
    beta[:, 0, 2] = s_plus / lam ** 2
    beta[:, 1, 1] = sigma / lam
    beta[:, 1, 3] = -eta / lam
    D = T @ A @ T_INV
    bt = beta @ T_INV
    return D, bt, eta, g


def _herm(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def _r_batch(case_tag: str, K: float, gamma: np.ndarray) -> np.ndarray:
    n = gamma.shape[0]
    w = gamma ** 2 if case_tag == BOUNDARY_DEGENERATE else np.ones(n)
    r = np.zeros((n, 4, 4), dtype=complex)
    r[:, 0, 0] = r[:, 2, 2] = -w
    r[:, 1, 1] = r[:, 3, 3] = K
    return r, w


def dissipation_lambda(case_tag: str, K: float, state: BackgroundState, p: np.ndarray) -> np.ndarray:
    """lambda_min of Re(r T A T^-1) at each point (unweighted)."""
    D, _, _, g = _batched(state, p)
    r, _ = _r_batch(case_tag, K, g)
    return np.linalg.eigvalsh(_herm(r @ D))[:, 0]


def dissipation_ratios(case_tag: str, K: float, state: BackgroundState, p: np.ndarray) -> np.ndarray:
    """Weighted lambda_min divided by eps min(eta, gamma); +inf where that denominator is 0."""
    D, _, eta, g = _batched(state, p)
    r, w = _r_batch(case_tag, K, g)
    H = _herm(r @ D)
    denom = state.eps * np.minimum(eta, g)
    out = np.full(p.shape[0], np.inf)
    ok = denom > 0
    if case_tag == BOUNDARY_DEGENERATE:
        s = np.zeros((p.shape[0], 4))
        s[ok] = 1.0 / np.sqrt(np.stack([w[ok], np.ones(ok.sum()), w[ok], np.ones(ok.sum())], axis=1))
        H = H * s[:, :, None] * s[:, None, :]
    lam = np.linalg.eigvalsh(H)[:, 0]
    out[ok] = lam[ok] / denom[ok]
    # zero denominator: pass iff the form is nonnegative
    bad = ~ok & (lam < -EIG_TOL)
    out[bad] = -np.inf
    return out


def boundary_lambda(case_tag: str, K: float, C: float, state: BackgroundState, p: np.ndarray,
                    cache=None) -> np.ndarray:
    """lambda_min of r + C bt^* bt - w I at each point."""
    if cache is None:
        cache = _boundary_cache(state, p)
    bb, g = cache
    r, w = _r_batch(case_tag, K, g)
    M = r + C * bb - w[:, None, None] * np.eye(4)
    return np.linalg.eigvalsh(M)[:, 0]


def boundary_margin(case_tag: str, K: float, C: float, state: BackgroundState, p: np.ndarray,
                    cache=None) -> np.ndarray:
    """lambda_min of r + C bt^* bt - w I in units of max(1, ||M||): >= -EIG_TOL means satisfied.

    The norm scaling absorbs eigensolver rounding, which grows with K and C.
    """
    if cache is None:
        cache = _boundary_cache(state, p)
    bb, g = cache
    r, w = _r_batch(case_tag, K, g)
    M = r + C * bb - w[:, None, None] * np.eye(4)
    ev = np.linalg.eigvalsh(M)
    scale = np.maximum(1.0, np.abs(ev).max(axis=1))
    return ev[:, 0] / scale


def _boundary_cache(state, p):
    _, bt, _, g = _batched(state, p)
    bb = np.conj(np.swapaxes(bt, -1, -2)) @ bt
    return bb, g


# ---------------------------------------------------------------- patch sampling


def patch_samples(patch: SymmetrizerPatch, n: int, rng: np.random.Generator) -> np.ndarray:
    """Points of the cap on the hemisphere: random interior points, boundary projections, center."""
    c = patch.center_array
    a_max = 2.0 * math.asin(min(1.0, patch.radius / 2.0))
    m = max(n - n // 4 - 1, 1)
    t = rng.standard_normal((m, 4))
    t -= np.outer(t @ c, c)
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    ang = a_max * rng.random(m) ** (1.0 / 3.0)
    pts = np.cos(ang)[:, None] * c + np.sin(ang)[:, None] * t
    pts[:, 0] = np.abs(pts[:, 0])
    # boundary (gamma = 0) points of the cap
    b = pts[: n // 4].copy()
    b[:, 0] = 0.0
    nb = np.linalg.norm(b, axis=1)
    b = b[nb > 0] / nb[nb > 0, None]
    b = b[np.linalg.norm(b - c, axis=1) <= patch.radius]
    pts = np.vstack([c[None, :], pts, b])
    if patch.case_tag == BOUNDARY_DEGENERATE:
        pts = np.vstack([pts, vertical_samples(patch, 16)])
    pts = pts[np.any(pts != 0.0, axis=1)]
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def vertical_samples(patch: SymmetrizerPatch, n: int, gmin: float = 1e-4, gmax: float | None = None) -> np.ndarray:
    """Points straight above the center (same delta, eta'), gamma geometric, on the hemisphere."""
    gmax = gmax if gmax is not None else min(0.5 * patch.radius, 1e-1)
    gam = np.geomspace(gmin, gmax, n)
    c = patch.center_array
    pts = np.tile(c, (n, 1))
    pts[:, 0] = gam
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


# ---------------------------------------------------------------- certification


def certify_dissipation(
    patch: SymmetrizerPatch,
    state: BackgroundState,
    sample_n: int = 64,
    rng: np.random.Generator | None = None,
    slack: float = 0.05,
    samples: np.ndarray | None = None,
) -> tuple[float, bool]:
    if samples is None:
        if sample_n < 32:
            raise ValueError("sample_n must be >= 32")
        samples = patch_samples(patch, sample_n, rng if rng is not None else np.random.default_rng(0))
    ratios = dissipation_ratios(patch.case_tag, patch.K, state, samples)
    min_ratio = float(np.min(ratios))
    return min_ratio, min_ratio >= _kappa(slack)


def _least_C(case_tag, K, state, samples, cache, max_exp) -> float:
    """Least C = 2^k (k = 0..max_exp) with the boundary inequality at all samples, or inf."""
    def ok(k):
        return bool(np.all(boundary_margin(case_tag, K, 2.0 ** k, state, samples, cache) >= -EIG_TOL))

    if not ok(max_exp):
        return math.inf
    if ok(0):
        return 1.0
    lo, hi = 0, max_exp  # ok(hi) holds, ok(lo) does not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return 2.0 ** hi


def certify_boundary(
    patch: SymmetrizerPatch,
    state: BackgroundState,
    sample_n: int = 64,
    rng: np.random.Generator | None = None,
    samples: np.ndarray | None = None,
    max_exp: int = MAX_EXP,
) -> tuple[float, bool]:
    """Least C on the doubling schedule 1, 2, ..., 2^max_exp at the patch's K."""
    if samples is None:
        if sample_n < 32:
            raise ValueError("sample_n must be >= 32")
        samples = patch_samples(patch, sample_n, rng if rng is not None else np.random.default_rng(0))
    cache = _boundary_cache(state, samples)
    C = _least_C(patch.case_tag, patch.K, state, samples, cache, max_exp)
    return C, math.isfinite(C)


def search_K(
    patch: SymmetrizerPatch,
    state: BackgroundState,
    samples: np.ndarray,
    max_exp: int = MAX_EXP,
) -> tuple[float, float]:
    """Double K from 1 until some C on the schedule works; returns (K, C) or (2^max_exp, inf)."""
    cache = _boundary_cache(state, samples)
    for kexp in range(max_exp + 1):
        K = 2.0 ** kexp
        C = _least_C(patch.case_tag, K, state, samples, cache, max_exp)
        if math.isfinite(C):
            return K, C
    return 2.0 ** max_exp, math.inf


def gamma_scaling_slope(patch: SymmetrizerPatch, state: BackgroundState, n: int = 16) -> float:
    """Fitted slope of log lambda_min(Re(r T A T^-1)) against log gamma above the center."""
    pts = vertical_samples(patch, n, 1e-6, 1e-4)
    lam = dissipation_lambda(patch.case_tag, patch.K, state, pts)
    good = lam > 0
    if good.sum() < 3:
        return math.nan
    return float(np.polyfit(np.log(pts[good, 0]), np.log(lam[good]), 1)[0])


@dataclass
class PatchCertificate:
    index: int
    case_tag: str
    center: FrequencyPoint
    radius: float
    K: float
    found_C: float
    min_ratio: float
    dissipation_pass: bool
    boundary_pass: bool
    slope: float = math.nan
    slope_checked: bool = False
    slope_pass: bool = True
    on_branch_cone: bool = False

    @property
    def passed(self) -> bool:
        return self.dissipation_pass and self.boundary_pass and self.slope_pass


def certify_patch(
    patch: SymmetrizerPatch,
    state: BackgroundState,
    sample_n: int = 64,
    rng: np.random.Generator | None = None,
    slack: float = 0.05,
    index: int = 0,
    max_exp: int = MAX_EXP,
) -> PatchCertificate:
    """K search, then both inequalities on one fixed sample set; slope fit for degenerate patches.

    The slope criterion is not applied at roots on the sigma branch cone, where
    Re sigma itself vanishes like sqrt(gamma).
    """
    rng = rng if rng is not None else np.random.default_rng(index)
    samples = patch_samples(patch, sample_n, rng)
    K, C = search_K(patch, state, samples, max_exp)
    patch.K, patch.C = K, C
    min_ratio, d_pass = certify_dissipation(patch, state, samples=samples, slack=slack)
    cert = PatchCertificate(
        index=index,
        case_tag=patch.case_tag,
        center=patch.center,
        radius=patch.radius,
        K=K,
        found_C=C,
        min_ratio=min_ratio,
        dissipation_pass=d_pass,
        boundary_pass=math.isfinite(C),
    )
    if patch.case_tag == BOUNDARY_DEGENERATE:
        cert.slope = gamma_scaling_slope(patch, state)
        cert.on_branch_cone = bool(patch.root is not None and patch.root.on_branch_cone)
        if not cert.on_branch_cone:
            cert.slope_checked = True
            cert.slope_pass = SLOPE_RANGE[0] <= cert.slope <= SLOPE_RANGE[1]
    return cert


# ---------------------------------------------------------------- cover


@dataclass
class Cover:
    patches: list
    rho: float
    roots: list
    coverage_fraction: float
    uncovered: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    def __iter__(self):
        return iter(self.patches)

    def __len__(self):
        return len(self.patches)

    def __getitem__(self, i):
        return self.patches[i]


def sphere_centers(n: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform points on the hemisphere from a scrambled Sobol sequence."""
    m = max(1, math.ceil(math.log2(n)))
    u = qmc.Sobol(d=4, scramble=True, seed=seed).random_base2(m)[:n]
    x = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x[:, 0] = np.abs(x[:, 0])
    return x


def uniform_sigma(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((n, 4))
    x[:, 0] = np.abs(x[:, 0])
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def boundary_root_set(state: BackgroundState, n_directions: int = 120, grid_n: int = 256) -> list[RootRecord]:
    """Zeros of Delta on Re tau = 0 along many eta' directions, plus the branch-cone zeros."""
    roots = []
    for k in range(n_directions):
        phi = 2.0 * math.pi * k / n_directions
        roots.extend(scan_boundary_roots(state, (math.cos(phi), math.sin(phi)), grid_n).roots)
    roots.extend(branch_cone_roots(state))
    return roots


def build_cover(
    state: BackgroundState,
    n_patches: int = 128,
    seed: int = 0,
    n_directions: int = 120,
    interior_tol: float = INTERIOR_TOL,
    root_tol: float = ROOT_TOL,
    coverage_samples: int = 10_000,
    snap_factor: float = 1.5,
    inflate: float = 1.3,
) -> Cover:
    """Overlapping caps on the hemisphere; centers near a boundary zero are moved onto it."""
    if n_patches < 8:
        raise ValueError("n_patches must be >= 8")
    rng = np.random.default_rng(seed)
    centers = sphere_centers(n_patches, seed)
    tree = cKDTree(centers)
    probe = uniform_sigma(4 * coverage_samples, rng)
    rho = inflate * float(tree.query(probe)[0].max())

    roots = boundary_root_set(state, n_directions)
    radii = np.full(n_patches, rho)
    root_idx = np.full(n_patches, -1)
    if roots:
        rpts = np.array([r.location.normalized().as_array() for r in roots])
        dist, idx = cKDTree(rpts).query(centers)
        near = dist <= snap_factor * rho
        # snapped caps grow by the shift so each still contains its original cap
        radii[near] = rho + dist[near]
        root_idx[near] = idx[near]
    patches: dict = {}
    for i in range(n_patches):
        if root_idx[i] >= 0:
            key = ("root", int(root_idx[i]))
            rec = roots[root_idx[i]]
            center = rec.location.normalized()
        else:
            key = ("free", i)
            rec = None
            center = FrequencyPoint(*centers[i])
        if key in patches and patches[key].radius >= radii[i]:
            continue
        # a recorded root keeps its tag: renormalizing a branch-cone root moves it off the cone slightly
        tag = BOUNDARY_DEGENERATE if rec is not None else classify(state, center, interior_tol, root_tol)
        patches[key] = SymmetrizerPatch(tag, center, float(radii[i]), root=rec)
    plist = list(patches.values())

    check = uniform_sigma(coverage_samples, np.random.default_rng(seed + 1))
    C = np.array([p.center_array for p in plist])
    R = np.array([p.radius for p in plist])
    inside = np.linalg.norm(check[:, None, :] - C[None, :, :], axis=2) <= R[None, :]
    covered = inside.any(axis=1)
    return Cover(plist, rho, roots, float(covered.mean()), check[~covered])


def certify_cover(
    cover: Cover,
    state: BackgroundState,
    sample_n: int = 64,
    seed: int = 0,
    slack: float = 0.05,
    executor=None,
) -> list[PatchCertificate]:
    """Certify every patch; each patch gets its own deterministic RNG stream."""
    seeds = np.random.SeedSequence(seed).spawn(len(cover.patches))

    def work(i):
        return certify_patch(cover.patches[i], state, sample_n, np.random.default_rng(seeds[i]), slack, i)

    idx = range(len(cover.patches))
    if executor is None:
        return [work(i) for i in idx]
    return list(executor.map(work, idx))
