# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: principal root sigma and the Lopatinski determinant.

Same contract as ``_pykernels``; see that module for the argument layout.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, hypot, fabs, copysign

cnp.import_array()


cdef inline double complex _sigma(double gamma, double delta, double eta, double eps) noexcept nogil:
    cdef double alpha, beta, r, re, im, rad
    if gamma > 0.0:
        alpha = eps * eps * (gamma * gamma - delta * delta) + eta * eta
        beta = 2.0 * eps * eps * gamma * delta
        r = hypot(alpha, beta)
        if alpha >= 0.0:
            re = sqrt(0.5 * (alpha + r))
            im = beta / (2.0 * re)
        else:
            im = copysign(sqrt(0.5 * (r - alpha)), 1.0 if beta >= 0.0 else -1.0)
            re = fabs(beta) / (2.0 * fabs(im))
        return re + 1j * im
    rad = eta * eta - eps * eps * delta * delta
    if rad >= 0.0:
        return sqrt(rad) + 0j
    return 1j * (1.0 if delta >= 0.0 else -1.0) * sqrt(-rad)


cdef inline double complex _delta(const double[::1] p, double gamma, double delta,
                                  double eta2, double eta3) noexcept nogil:
    cdef double v2 = p[0], v3 = p[1], H2 = p[2], H3 = p[3]
    cdef double Hv2 = p[4], Hv3 = p[5], E1 = p[6], eps = p[7]
    cdef double eta_sq = eta2 * eta2 + eta3 * eta3
    cdef double eta = sqrt(eta_sq)
    cdef double complex tau = gamma + 1j * delta
    cdef double complex ell = gamma + 1j * (delta + v2 * eta2 + v3 * eta3)
    cdef double w_plus = H2 * eta2 + H3 * eta3
    cdef double w_minus = Hv2 * eta2 + Hv3 * eta3
    cdef double w_perp = Hv3 * eta2 - Hv2 * eta3
    cdef double complex sig = _sigma(gamma, delta, eta, eps)
    cdef double complex s_minus = (w_minus * w_minus - E1 * E1 * eta_sq
                                   + eps * eps * (Hv2 * Hv2 + Hv3 * Hv3) * tau * tau
                                   - 2j * eps * E1 * tau * w_perp)
    cdef double complex s_plus = ell * ell + w_plus * w_plus
    cdef double lam = sqrt(gamma * gamma + delta * delta + eta_sq)
    return (eta * s_minus + s_plus * sig) / (lam * lam * lam)


def sigma_scalar(double gamma, double delta, double eta, double eps):
    return complex(_sigma(gamma, delta, eta, eps))


def delta_scalar(params, double gamma, double delta, double eta2, double eta3):
    cdef const double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    return complex(_delta(p, gamma, delta, eta2, eta3))


def sigma_array(gamma, delta, eta, double eps):
    g, d, e = np.broadcast_arrays(np.asarray(gamma, np.float64),
                                  np.asarray(delta, np.float64),
                                  np.asarray(eta, np.float64))
    shape = g.shape
    cdef const double[::1] gv = np.ascontiguousarray(g).ravel()
    cdef const double[::1] dv = np.ascontiguousarray(d).ravel()
    cdef const double[::1] ev = np.ascontiguousarray(e).ravel()
    cdef Py_ssize_t n = gv.shape[0], i
    out = np.empty(n, np.complex128)
    cdef double complex[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _sigma(gv[i], dv[i], ev[i], eps)
    return out.reshape(shape)


def delta_array(params, gamma, delta, eta2, eta3):
    cdef const double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    g, d, e2, e3 = np.broadcast_arrays(np.asarray(gamma, np.float64),
                                       np.asarray(delta, np.float64),
                                       np.asarray(eta2, np.float64),
                                       np.asarray(eta3, np.float64))
    shape = g.shape
    cdef const double[::1] gv = np.ascontiguousarray(g).ravel()
    cdef const double[::1] dv = np.ascontiguousarray(d).ravel()
    cdef const double[::1] av = np.ascontiguousarray(e2).ravel()
    cdef const double[::1] bv = np.ascontiguousarray(e3).ravel()
    cdef Py_ssize_t n = gv.shape[0], i
    out = np.empty(n, np.complex128)
    cdef double complex[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _delta(p, gv[i], dv[i], av[i], bv[i])
    return out.reshape(shape)
