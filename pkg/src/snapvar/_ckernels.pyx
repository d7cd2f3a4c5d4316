# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Same signatures and conventions; loops run per sample with the GIL released.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, atan2, cos, sin
from scipy.linalg.cython_blas cimport zgemm

from snapvar._pykernels import ConvergenceError

cnp.import_array()

ctypedef double complex cplx

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double cimag(double complex)
    double creal(double complex)
    double complex conj(double complex)


cdef double _offdiag(cplx[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t i, j, d = a.shape[0]
    cdef double acc = 0.0
    for i in range(d):
        for j in range(d):
            if i != j:
                acc += creal(a[i, j]) * creal(a[i, j]) + cimag(a[i, j]) * cimag(a[i, j])
    return sqrt(acc)


def jacobi_eigh(h, double rel_tol, int max_sweeps):
    """Cyclic complex Jacobi rotations; returns unsorted ``(eigenvalues, V)``."""
    cdef cplx[:, ::1] a = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t d = a.shape[0]
    vv = np.eye(d, dtype=np.complex128)
    cdef cplx[:, ::1] v = vv
    cdef double threshold = rel_tol * float(np.linalg.norm(np.asarray(a)))
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double mag, app, aqq, theta, c, s
    cdef cplx ph, phc, x, y, j00, j01, j10, j11
    cdef bint done = False
    with nogil:
        for sweep in range(max_sweeps):
            if _offdiag(a) <= threshold:
                done = True
                break
            for p in range(d - 1):
                for q in range(p + 1, d):
                    mag = cabs(a[p, q])
                    if mag == 0.0:
                        continue
                    ph = a[p, q] / mag
                    phc = conj(ph)
                    app = creal(a[p, p])
                    aqq = creal(a[q, q])
                    theta = 0.5 * atan2(2.0 * mag, aqq - app)
                    c = cos(theta)
                    s = sin(theta)
                    j00 = c
                    j01 = s
                    j10 = -s * phc
                    j11 = c * phc
                    for i in range(d):
                        x = a[i, p]
                        y = a[i, q]
                        a[i, p] = x * j00 + y * j10
                        a[i, q] = x * j01 + y * j11
                        x = v[i, p]
                        y = v[i, q]
                        v[i, p] = x * j00 + y * j10
                        v[i, q] = x * j01 + y * j11
                    for i in range(d):
                        x = a[p, i]
                        y = a[q, i]
                        a[p, i] = conj(j00) * x + conj(j10) * y
                        a[q, i] = conj(j01) * x + conj(j11) * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    a[p, p] = creal(a[p, p])
                    a[q, q] = creal(a[q, q])
        if not done and _offdiag(a) <= threshold:
            done = True
    if not done:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    lam = np.real(np.diag(np.asarray(a))).copy()
    return lam, vv

# Both gradient kernels work in the eigenbasis of the displacement generator:
# with D = V E V^dagger, a block is V E^* V^dagger S V E V^dagger, so between
# consecutive blocks V^dagger V cancels and each block costs two dense products.

cdef void _mv(const cplx* a, const cplx* x, cplx* out, Py_ssize_t d) noexcept nogil:
    # out = A x, A row-major; split real/imag sums vectorize better than complex ones
    cdef const double* ar = <const double*>a
    cdef const double* xr = <const double*>x
    cdef Py_ssize_t i, j
    cdef double re, im, p, q, u, w
    for i in range(d):
        re = 0.0
        im = 0.0
        for j in range(d):
            p = ar[2 * (i * d + j)]
            q = ar[2 * (i * d + j) + 1]
            u = xr[2 * j]
            w = xr[2 * j + 1]
            re += p * u - q * w
            im += p * w + q * u
        out[i] = re + 1j * im


cdef inline void _scale(cplx* x, const cplx* f, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(d):
        x[i] = x[i] * f[i]


cdef void _block_vec(const cplx* v, const cplx* vh, const cplx* e, const cplx* s,
                     const cplx* ec, cplx* xf, cplx* tmp, Py_ssize_t d) noexcept nogil:
    # xf <- E^* V^dagger S V E xf
    _scale(xf, e, d)
    _mv(v, xf, tmp, d)
    _scale(tmp, s, d)
    _mv(vh, tmp, xf, d)
    _scale(xf, ec, d)


cdef void _phases(const double* alphas, const double* thetas, const double* lam,
                  cplx* e, cplx* ec, cplx* s, cplx* sc, Py_ssize_t nt,
                  Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t t, i
    cdef double a, c, sn
    for t in range(nt):
        for i in range(d):
            a = alphas[t] * lam[i]
            c = cos(a)
            sn = sin(a)
            e[t * d + i] = c + 1j * sn
            ec[t * d + i] = c - 1j * sn
            a = thetas[t * d + i]
            c = cos(a)
            sn = sin(a)
            s[t * d + i] = c + 1j * sn
            sc[t * d + i] = c - 1j * sn


def _frame(v_in):
    v = np.ascontiguousarray(v_in, dtype=np.complex128)
    return v, np.ascontiguousarray(v.conj().T)


def state_grads(v_in, lam_in, alphas_in, thetas_in, int k, int nu,
                observable_in, psi0s_in, weights_in):
    v_arr, vh_arr = _frame(v_in)
    obs = np.asarray(observable_in, dtype=np.complex128)
    psi = np.atleast_2d(np.asarray(psi0s_in, dtype=np.complex128))
    cdef const cplx[:, ::1] v = v_arr
    cdef const cplx[:, ::1] vh = vh_arr
    cdef const cplx[:, ::1] obs_f = np.ascontiguousarray(vh_arr @ obs @ v_arr)
    cdef const cplx[:, ::1] psi_f = np.ascontiguousarray(psi @ vh_arr.T)
    cdef const double[::1] lam = np.ascontiguousarray(lam_in, dtype=np.float64)
    cdef const double[:, ::1] alphas = np.ascontiguousarray(alphas_in, dtype=np.float64)
    cdef const double[:, :, ::1] thetas = np.ascontiguousarray(thetas_in, dtype=np.float64)
    cdef const double[::1] weights = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef Py_ssize_t n = thetas.shape[0], nt = thetas.shape[1], d = thetas.shape[2]
    cdef Py_ssize_t r = psi_f.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef cplx[:, ::1] e = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[:, ::1] ec = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[:, ::1] s = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[:, ::1] sc = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[::1] xf = np.empty(d, dtype=np.complex128)
    cdef cplx[::1] yf = np.empty(d, dtype=np.complex128)
    cdef cplx[::1] phi = np.empty(d, dtype=np.complex128)
    cdef cplx[::1] tmp = np.empty(d, dtype=np.complex128)
    cdef Py_ssize_t smp, t, i, comp, kk = k - 1
    cdef cplx y_nu, z
    cdef const cplx* pv = &v[0, 0]
    cdef const cplx* pvh = &vh[0, 0]
    with nogil:
        for smp in range(n):
            _phases(&alphas[smp, 0], &thetas[smp, 0, 0], &lam[0],
                    &e[0, 0], &ec[0, 0], &s[0, 0], &sc[0, 0], nt, d)
            for comp in range(r):
                for i in range(d):
                    xf[i] = psi_f[comp, i]
                for t in range(kk):
                    _block_vec(pv, pvh, &e[t, 0], &s[t, 0], &ec[t, 0], &xf[0], &tmp[0], d)
                # phi = S_high D U_L psi0, then back through S_low and D^dagger
                _scale(&xf[0], &e[kk, 0], d)
                _mv(pv, &xf[0], &phi[0], d)
                for i in range(nu + 1, d):
                    phi[i] = phi[i] * s[kk, i]
                for i in range(d):
                    tmp[i] = phi[i] * s[kk, i] if i <= nu else phi[i]
                _mv(pvh, &tmp[0], &xf[0], d)
                _scale(&xf[0], &ec[kk, 0], d)
                for t in range(kk + 1, nt):
                    _block_vec(pv, pvh, &e[t, 0], &s[t, 0], &ec[t, 0], &xf[0], &tmp[0], d)
                _mv(&obs_f[0, 0], &xf[0], &yf[0], d)
                for t in range(nt - 1, kk, -1):
                    _block_vec(pv, pvh, &e[t, 0], &sc[t, 0], &ec[t, 0], &yf[0], &tmp[0], d)
                y_nu = 0.0
                for i in range(d):
                    y_nu = y_nu + v[nu, i] * e[kk, i] * yf[i]
                z = conj(phi[nu]) * y_nu * sc[kk, nu]
                out[smp] += weights[comp] * (-2.0 * cimag(z))
    return out_arr


cdef void _mm(const cplx* a, const cplx* b, cplx* c, int d) noexcept nogil:
    # c = a @ b for row-major operands (column-major BLAS sees the transposes)
    cdef char tr = b"N"
    cdef cplx one = 1.0
    cdef cplx zero = 0.0
    zgemm(&tr, &tr, &d, &d, &d, &one, <cplx*>b, &d, <cplx*>a, &d, &zero, c, &d)


cdef inline void _scale_rows(cplx* m, const cplx* f, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef cplx c
    for i in range(d):
        c = f[i]
        for j in range(d):
            m[i * d + j] = c * m[i * d + j]


cdef void _block_mat(const cplx* v, const cplx* vh, const cplx* e, const cplx* s,
                     const cplx* ec, cplx* mf, cplx* tmp, int d) noexcept nogil:
    # mf <- E^* V^dagger S V E mf
    _scale_rows(mf, e, d)
    _mm(v, mf, tmp, d)
    _scale_rows(tmp, s, d)
    _mm(vh, tmp, mf, d)
    _scale_rows(mf, ec, d)


def gate_grads(v_in, lam_in, alphas_in, thetas_in, int k, int nu, target_in):
    v_arr, vh_arr = _frame(v_in)
    tgt = np.asarray(target_in, dtype=np.complex128)
    cdef const cplx[:, ::1] v = v_arr
    cdef const cplx[:, ::1] vh = vh_arr
    cdef const cplx[:, ::1] g = np.ascontiguousarray(vh_arr @ tgt.conj().T @ v_arr)
    cdef const double[::1] lam = np.ascontiguousarray(lam_in, dtype=np.float64)
    cdef const double[:, ::1] alphas = np.ascontiguousarray(alphas_in, dtype=np.float64)
    cdef const double[:, :, ::1] thetas = np.ascontiguousarray(thetas_in, dtype=np.float64)
    cdef Py_ssize_t n = thetas.shape[0], nt = thetas.shape[1], d = thetas.shape[2]
    cdef int di = <int>d
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef cplx[:, ::1] e = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[:, ::1] ec = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[:, ::1] s = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[:, ::1] sc = np.empty((nt, d), dtype=np.complex128)
    cdef cplx[:, ::1] mf = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] tmp = np.empty((d, d), dtype=np.complex128)
    cdef Py_ssize_t smp, t, i, j, kk = k - 1
    cdef cplx a_ii, tau, y_nu
    cdef double scale = 2.0 / (d * d)
    cdef const cplx* pv = &v[0, 0]
    cdef const cplx* pvh = &vh[0, 0]
    with nogil:
        for smp in range(n):
            _phases(&alphas[smp, 0], &thetas[smp, 0, 0], &lam[0],
                    &e[0, 0], &ec[0, 0], &s[0, 0], &sc[0, 0], nt, d)
            # mf = V^dagger U_L U_t^dagger U_R
            for i in range(d):
                for j in range(d):
                    mf[i, j] = vh[i, j]
            for t in range(kk + 1, nt):
                _block_mat(pv, pvh, &e[t, 0], &s[t, 0], &ec[t, 0], &mf[0, 0], &tmp[0, 0], di)
            _mm(&g[0, 0], &mf[0, 0], &tmp[0, 0], di)
            for i in range(d):
                for j in range(d):
                    mf[i, j] = tmp[i, j]
            for t in range(kk):
                _block_mat(pv, pvh, &e[t, 0], &s[t, 0], &ec[t, 0], &mf[0, 0], &tmp[0, 0], di)
            # A = V E mf V E^* V^dagger, Y = S_high A S_low
            _scale_rows(&mf[0, 0], &e[kk, 0], d)
            _mm(&mf[0, 0], pv, &tmp[0, 0], di)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = tmp[i, j] * ec[kk, j]
            _mm(pv, &tmp[0, 0], &mf[0, 0], di)
            tau = 0.0
            y_nu = 0.0
            for i in range(d):
                a_ii = 0.0
                for j in range(d):
                    a_ii = a_ii + mf[i, j] * vh[j, i]
                tau = tau + s[kk, i] * a_ii
                if i == nu:
                    y_nu = s[kk, i] * a_ii
            out[smp] = scale * cimag(conj(tau) * y_nu)
    return out_arr
