import math

import numpy as np
import pytest

from pvstab import symmetrizer as S
from pvstab.lopatinski import lopatinski_det, scan_boundary_roots
from pvstab.symbols import FrequencyPoint, eval_symbols

from conftest import orthogonal_state


@pytest.fixture(scope="module")
def state():
    return orthogonal_state(0.5)


@pytest.fixture(scope="module")
def cover(state):
    return S.build_cover(state, n_patches=128, seed=0)


def test_classify_examples(state):
    assert S.classify(state, FrequencyPoint(1.0, 0.0, 0.0, 0.0)) == S.INTERIOR
    regular = FrequencyPoint(0.0, 0.0, 0.0, 1.0)
    assert abs(lopatinski_det(state, regular)) > 0.5
    assert S.classify(state, regular) == S.BOUNDARY_REGULAR
    root = scan_boundary_roots(state, (0.0, 1.0))[0].location
    assert S.classify(state, root) == S.BOUNDARY_DEGENERATE
    with pytest.raises(ValueError):
        S.classify(state, FrequencyPoint(1.0, 1.0, 0.0, 0.0))


def test_r_hermitian():
    for tag in S.CASE_TAGS:
        r = S.r_matrix(tag, 4.0, 0.3)
        assert np.array_equal(r, r.conj().T)
    np.testing.assert_array_equal(S.r_matrix(S.BOUNDARY_DEGENERATE, 2.0, 0.5), np.diag([-0.25, 2, -0.25, 2]))


def test_case_i_diagonal_lambda(state, rng):
    pts = S.uniform_sigma(500, rng)
    for K in (1.0, 8.0):
        lam = S.dissipation_lambda(S.INTERIOR, K, state, pts)
        for p, l in zip(pts, lam):
            v = eval_symbols(state, FrequencyPoint(*p))
            assert l == pytest.approx(min(v.eta, v.sigma.real), abs=1e-13)
            assert l >= min(v.eta, state.eps * p[0] / math.sqrt(2)) - 1e-14


def test_eta_zero_ratio_passes_by_convention(state):
    p = np.array([[0.6, 0.8, 0.0, 0.0]])
    assert S.dissipation_ratios(S.INTERIOR, 1.0, state, p)[0] == math.inf


def test_patch_validation():
    with pytest.raises(ValueError):
        S.SymmetrizerPatch("bogus", FrequencyPoint(1, 0, 0, 0), 0.1)
    with pytest.raises(ValueError):
        S.SymmetrizerPatch(S.INTERIOR, FrequencyPoint(1, 0, 0, 0), 0.1, K=0.5)


def test_cover_coverage(cover):
    assert cover.coverage_fraction == 1.0
    assert len(cover.uncovered) == 0


def test_cover_tags_match_invariants(state, cover):
    for p in cover:
        if p.case_tag == S.INTERIOR:
            assert p.center.gamma > S.INTERIOR_TOL
        else:
            assert p.center.gamma <= S.INTERIOR_TOL
        if p.case_tag == S.BOUNDARY_DEGENERATE:
            assert p.root is not None
            assert abs(lopatinski_det(state, p.root.location)) <= S.ROOT_TOL


def test_every_root_neighbourhood_in_a_degenerate_patch(state, cover, rng):
    degenerate = [p for p in cover if p.case_tag == S.BOUNDARY_DEGENERATE]
    d = 0.02
    for r in cover.roots[::10]:
        c = r.location.normalized().as_array()
        t = rng.standard_normal((20, 4))
        t -= np.outer(t @ c, c)
        t /= np.linalg.norm(t, axis=1, keepdims=True)
        pts = c + d * t
        pts[:, 0] = np.abs(pts[:, 0])
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        inside = np.zeros(len(pts), bool)
        for p in degenerate:
            inside |= p.contains(pts)
        assert inside.all()


def test_no_roots_means_no_degenerate_patches(state, monkeypatch):
    monkeypatch.setattr(S, "boundary_root_set", lambda *a, **k: [])
    cov = S.build_cover(state, n_patches=64)
    assert all(p.case_tag != S.BOUNDARY_DEGENERATE for p in cov)
    assert cov.coverage_fraction == 1.0


def test_build_cover_rejects_small():
    with pytest.raises(ValueError):
        S.build_cover(orthogonal_state(), n_patches=4)


def test_certification_passes(state, cover):
    certs = S.certify_cover(cover, state, sample_n=64, seed=0)
    assert len(certs) == len(cover)
    for c in certs:
        assert c.passed, c
        assert c.min_ratio >= S.KAPPA * 0.95
        assert math.isfinite(c.found_C)
        if c.slope_checked:
            assert S.SLOPE_RANGE[0] <= c.slope <= S.SLOPE_RANGE[1]
    assert any(c.case_tag == S.BOUNDARY_DEGENERATE for c in certs)


def test_certified_inequalities_hold_pointwise(state, cover):
    for i, patch in enumerate(cover.patches[::8]):
        cert = S.certify_patch(patch, state, 64, np.random.default_rng(i))
        pts = S.patch_samples(patch, 64, np.random.default_rng(i))
        assert np.all(S.boundary_margin(patch.case_tag, cert.K, cert.found_C, state, pts) >= -S.EIG_TOL)
        assert np.all(S.dissipation_ratios(patch.case_tag, cert.K, state, pts) >= S.KAPPA * 0.95)


def test_K_doubling_monotone(state, cover, rng):
    for patch in cover.patches[::16]:
        samples = S.patch_samples(patch, 64, rng)
        K, C = S.search_K(patch, state, samples)
        prev = C
        for k in range(1, 4):
            patch.K = K * 2 ** k
            C2, ok = S.certify_boundary(patch, state, samples=samples)
            assert ok and C2 <= prev
            prev = C2


def test_degenerate_patch_shrinking(state):
    rec = scan_boundary_roots(state, (0.0, 1.0))[0]
    for radius in (0.2, 0.1, 0.05, 0.02):
        patch = S.SymmetrizerPatch(S.BOUNDARY_DEGENERATE, rec.location.normalized(), radius, root=rec)
        cert = S.certify_patch(patch, state, 64, np.random.default_rng(1))
        assert cert.passed and math.isfinite(cert.found_C)
        assert 1.9 <= cert.slope <= 2.1


def test_regular_patch_small_C(state):
    patch = S.SymmetrizerPatch(S.BOUNDARY_REGULAR, FrequencyPoint(0.0, 0.0, 0.0, 1.0), 0.05)
    cert = S.certify_patch(patch, state, 64, np.random.default_rng(2))
    assert cert.passed and cert.found_C <= 64


def test_certify_is_deterministic(state):
    a = S.certify_cover(S.build_cover(state, 64, seed=5), state, seed=5)
    b = S.certify_cover(S.build_cover(state, 64, seed=5), state, seed=5)
    assert [(c.K, c.found_C, c.min_ratio) for c in a] == [(c.K, c.found_C, c.min_ratio) for c in b]
