# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-stepping kernels; see ``_core_py`` for the reference versions."""
import numpy as np
cimport numpy as cnp

ctypedef double complex cplx


cdef inline void _matvec(const cplx[:, ::1] A, const cplx[::1] x, cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, n = A.shape[0]
    cdef cplx acc
    for i in range(n):
        acc = 0
        for j in range(n):
            acc = acc + A[i, j] * x[j]
        out[i] = acc


cdef inline void _memory_sums(const double[:, ::1] ht, const double[::1] k, Py_ssize_t step,
                              double[::1] acc_p, double[::1] acc_c) noexcept nogil:
    # one pass over the component-major history ht for both Heun stages:
    # acc_p[c] = sum_{j=1}^{step-1} k[step - j] ht[c, j]
    # acc_c[c] = sum_{j=1}^{step} k[step + 1 - j] ht[c, j]
    cdef Py_ssize_t j, c, m = ht.shape[0]
    cdef double p0, p1, c0, c1, h0, h1
    for c in range(m):
        # two partial sums per stage break the floating-point add dependency chain
        p0 = p1 = c0 = c1 = 0.0
        j = 1
        while j + 1 < step:
            h0 = ht[c, j]
            h1 = ht[c, j + 1]
            p0 += k[step - j] * h0
            p1 += k[step - j - 1] * h1
            c0 += k[step + 1 - j] * h0
            c1 += k[step - j] * h1
            j += 2
        while j < step:
            h0 = ht[c, j]
            p0 += k[step - j] * h0
            c0 += k[step + 1 - j] * h0
            j += 1
        acc_p[c] = p0 + p1
        if step >= 1:
            c0 += k[1] * ht[c, step]
        acc_c[c] = c0 + c1


def volterra_heun(L0, L1, kvals, rho0, double dt, Py_ssize_t nsteps):
    cdef const cplx[:, ::1] a0 = np.ascontiguousarray(L0, dtype=complex)
    cdef const cplx[:, ::1] a1 = np.ascontiguousarray(L1, dtype=complex)
    cdef const double[::1] k = np.ascontiguousarray(kvals, dtype=float)
    cdef Py_ssize_t n = a0.shape[0]
    hist_arr = np.zeros((nsteps + 1, n), dtype=complex)
    hist_arr[0] = np.asarray(rho0, dtype=complex)
    cdef cplx[:, ::1] hist = hist_arr
    cdef double[:, ::1] ht = np.zeros((2 * n, nsteps + 1), dtype=float)
    cdef double[::1] acc = np.zeros(2 * n, dtype=float)
    cdef double[::1] acc_c = np.zeros(2 * n, dtype=float)
    cdef cplx[::1] conv = np.zeros(n, dtype=complex)
    cdef cplx[::1] pred = np.zeros(n, dtype=complex)
    cdef cplx[::1] f = np.zeros(n, dtype=complex)
    cdef cplx[::1] fp = np.zeros(n, dtype=complex)
    cdef cplx[::1] tmp = np.zeros(n, dtype=complex)
    cdef cplx[::1] x
    cdef Py_ssize_t step, i
    with nogil:
        for i in range(n):
            ht[2 * i, 0] = hist[0, i].real
            ht[2 * i + 1, 0] = hist[0, i].imag
        for step in range(nsteps):
            x = hist[step]
            _memory_sums(ht, k, step, acc, acc_c)
            if step > 0:
                for i in range(n):
                    conv[i] = dt * (acc[2 * i] + 1j * acc[2 * i + 1]
                                    + 0.5 * k[step] * hist[0, i] + 0.5 * k[0] * x[i])
            else:
                for i in range(n):
                    conv[i] = 0
            _matvec(a0, x, f)
            _matvec(a1, conv, tmp)
            for i in range(n):
                f[i] = f[i] + tmp[i]
                pred[i] = x[i] + dt * f[i]
            for i in range(n):
                conv[i] = dt * (acc_c[2 * i] + 1j * acc_c[2 * i + 1]
                                + 0.5 * k[step + 1] * hist[0, i] + 0.5 * k[0] * pred[i])
            _matvec(a0, pred, fp)
            _matvec(a1, conv, tmp)
            for i in range(n):
                hist[step + 1, i] = x[i] + 0.5 * dt * (f[i] + fp[i] + tmp[i])
                ht[2 * i, step + 1] = hist[step + 1, i].real
                ht[2 * i + 1, step + 1] = hist[step + 1, i].imag
    return hist_arr


def stochastic_heun(L0, Hc, paths, rho0, double dt):
    cdef const cplx[:, ::1] a0 = np.ascontiguousarray(L0, dtype=complex)
    cdef const cplx[:, ::1] h = np.ascontiguousarray(Hc, dtype=complex)
    cdef const double[:, ::1] b = np.ascontiguousarray(paths, dtype=float)
    cdef const cplx[::1] r0 = np.ascontiguousarray(rho0, dtype=complex)
    cdef Py_ssize_t m = b.shape[0], npts = b.shape[1], n = a0.shape[0]
    out_arr = np.zeros((m, npts, n), dtype=complex)
    cdef cplx[:, :, ::1] out = out_arr
    cdef cplx[::1] x = np.zeros(n, dtype=complex)
    cdef cplx[::1] k1 = np.zeros(n, dtype=complex)
    cdef cplx[::1] k2 = np.zeros(n, dtype=complex)
    cdef cplx[::1] pred = np.zeros(n, dtype=complex)
    cdef cplx[::1] tmp = np.zeros(n, dtype=complex)
    cdef Py_ssize_t traj, step, i
    cdef cplx mi = -1j
    with nogil:
        for traj in range(m):
            for i in range(n):
                x[i] = r0[i]
                out[traj, 0, i] = r0[i]
            for step in range(npts - 1):
                _matvec(a0, x, k1)
                _matvec(h, x, tmp)
                for i in range(n):
                    k1[i] = k1[i] + mi * b[traj, step] * tmp[i]
                    pred[i] = x[i] + dt * k1[i]
                _matvec(a0, pred, k2)
                _matvec(h, pred, tmp)
                for i in range(n):
                    k2[i] = k2[i] + mi * b[traj, step + 1] * tmp[i]
                    x[i] = x[i] + 0.5 * dt * (k1[i] + k2[i])
                    out[traj, step + 1, i] = x[i]
    return out_arr
