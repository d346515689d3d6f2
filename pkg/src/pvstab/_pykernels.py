"""Reference (numpy / math) implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function. The scalar routines use
``math`` so that they stay cheap inside adaptive loops; the ``*_array``
routines are vectorised with numpy.

``params`` is always the 8-tuple ``(v2, v3, H2, H3, Hv2, Hv3, E1, eps)``.
Inputs are assumed valid (gamma >= 0, not the origin); validation lives in
the public wrappers.
"""
from __future__ import annotations

import math

import numpy as np


def sigma_scalar(gamma: float, delta: float, eta: float, eps: float) -> complex:
    if gamma > 0.0:
        alpha = eps * eps * (gamma * gamma - delta * delta) + eta * eta
        beta = 2.0 * eps * eps * gamma * delta
        r = math.hypot(alpha, beta)
        # the smaller component is recovered from re*im = beta/2 (no cancellation)
        if alpha >= 0.0:
            re = math.sqrt(0.5 * (alpha + r))
            im = beta / (2.0 * re)
        else:
            im = math.copysign(math.sqrt(0.5 * (r - alpha)), 1.0 if beta >= 0.0 else -1.0)
            re = abs(beta) / (2.0 * abs(im))
        return complex(re, im)
    rad = eta * eta - eps * eps * delta * delta
    if rad >= 0.0:
        return complex(math.sqrt(rad), 0.0)
    return complex(0.0, (1.0 if delta >= 0.0 else -1.0) * math.sqrt(-rad))


def delta_scalar(params, gamma: float, delta: float, eta2: float, eta3: float) -> complex:
    v2, v3, H2, H3, Hv2, Hv3, E1, eps = params
    eta_sq = eta2 * eta2 + eta3 * eta3
    eta = math.sqrt(eta_sq)
    tau = complex(gamma, delta)
    ell = complex(gamma, delta + v2 * eta2 + v3 * eta3)
    w_plus = H2 * eta2 + H3 * eta3
    w_minus = Hv2 * eta2 + Hv3 * eta3
    w_perp = Hv3 * eta2 - Hv2 * eta3
    sig = sigma_scalar(gamma, delta, eta, eps)
    s_minus = (
        w_minus * w_minus
        - E1 * E1 * eta_sq
        + eps * eps * (Hv2 * Hv2 + Hv3 * Hv3) * tau * tau
        - 2j * eps * E1 * tau * w_perp
    )
    s_plus = ell * ell + w_plus * w_plus
    lam = math.sqrt(gamma * gamma + delta * delta + eta_sq)
    return (eta * s_minus + s_plus * sig) / (lam * lam * lam)


def sigma_array(gamma, delta, eta, eps: float) -> np.ndarray:
    gamma, delta, eta = np.broadcast_arrays(
        np.asarray(gamma, float), np.asarray(delta, float), np.asarray(eta, float)
    )
    out = np.empty(gamma.shape, complex)

    interior = gamma > 0.0
    g, d, e = gamma[interior], delta[interior], eta[interior]
    alpha = eps * eps * (g * g - d * d) + e * e
    beta = 2.0 * eps * eps * g * d
    r = np.hypot(alpha, beta)
    pos = alpha >= 0.0
    re = np.empty_like(alpha)
    im = np.empty_like(alpha)
    re[pos] = np.sqrt(0.5 * (alpha[pos] + r[pos]))
    im[pos] = beta[pos] / (2.0 * re[pos])
    neg = ~pos
    im[neg] = np.where(beta[neg] >= 0.0, 1.0, -1.0) * np.sqrt(0.5 * (r[neg] - alpha[neg]))
    re[neg] = np.abs(beta[neg]) / (2.0 * np.abs(im[neg]))
    out[interior] = re + 1j * im

    edge = ~interior
    d, e = delta[edge], eta[edge]
    rad = e * e - eps * eps * d * d
    sgn = np.where(d >= 0.0, 1.0, -1.0)
    root = np.sqrt(np.abs(rad))
    out[edge] = np.where(rad >= 0.0, root + 0j, 1j * sgn * root)
    return out


def delta_array(params, gamma, delta, eta2, eta3) -> np.ndarray:
    v2, v3, H2, H3, Hv2, Hv3, E1, eps = params
    gamma, delta, eta2, eta3 = np.broadcast_arrays(
        np.asarray(gamma, float),
        np.asarray(delta, float),
        np.asarray(eta2, float),
        np.asarray(eta3, float),
    )
    eta_sq = eta2 * eta2 + eta3 * eta3
    eta = np.sqrt(eta_sq)
    tau = gamma + 1j * delta
    ell = gamma + 1j * (delta + v2 * eta2 + v3 * eta3)
    w_plus = H2 * eta2 + H3 * eta3
    w_minus = Hv2 * eta2 + Hv3 * eta3
    w_perp = Hv3 * eta2 - Hv2 * eta3
    sig = sigma_array(gamma, delta, eta, eps)
    s_minus = (
        w_minus * w_minus
        - E1 * E1 * eta_sq
        + eps * eps * (Hv2 * Hv2 + Hv3 * Hv3) * tau * tau
        - 2j * eps * E1 * tau * w_perp
    )
    s_plus = ell * ell + w_plus * w_plus
    lam = np.sqrt(gamma * gamma + delta * delta + eta_sq)
    return (eta * s_minus + s_plus * sig) / (lam * lam * lam)
