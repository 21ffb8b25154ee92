# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled fixed-step RK4 kernels for H(t) = S + sum_k [c_k(t) A_k + h.c.].

The static part S is CSR (it may carry a non-Hermitian diagonal for the
Lindblad no-jump generator).  Drive channels are stored as one-directional
entries ``(row, col, val, channel)``; the Hermitian conjugate is applied on
the fly.  Coefficients are tabulated at half-step times so the three RK4
evaluation times of step ``n`` read rows ``2n``, ``2n+1`` and ``2n+2``.

All loops release the GIL so ensembles can run on a thread pool.
"""

import numpy as np

ctypedef double complex cplx

cdef extern from "complex.h" nogil:
    double complex conj(double complex)


cdef inline void _scale_entries(const cplx[:, ::1] coeffs, Py_ssize_t q,
                                const Py_ssize_t[::1] ids, const cplx[::1] vals,
                                cplx[::1] cv) noexcept nogil:
    cdef Py_ssize_t e
    for e in range(ids.shape[0]):
        cv[e] = coeffs[q, ids[e]] * vals[e]


cdef void _hpsi(const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                const cplx[::1] data, const Py_ssize_t[::1] rows,
                const Py_ssize_t[::1] cols, const cplx[::1] cv,
                const cplx[::1] psi, cplx[::1] out) noexcept nogil:
    """out = -i H psi."""
    cdef Py_ssize_t r, p, e, n = psi.shape[0]
    cdef cplx acc
    for r in range(n):
        acc = 0
        for p in range(indptr[r], indptr[r + 1]):
            acc = acc + data[p] * psi[indices[p]]
        out[r] = acc
    for e in range(rows.shape[0]):
        out[rows[e]] = out[rows[e]] + cv[e] * psi[cols[e]]
        out[cols[e]] = out[cols[e]] + conj(cv[e]) * psi[rows[e]]
    for r in range(n):
        out[r] = -1j * out[r]


def rk4_schrodinger(const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                    const cplx[::1] data, const Py_ssize_t[::1] rows,
                    const Py_ssize_t[::1] cols, const cplx[::1] vals,
                    const Py_ssize_t[::1] ids, const cplx[:, ::1] coeffs,
                    cplx[::1] psi, double dt, Py_ssize_t first_step,
                    Py_ssize_t n_steps):
    """Advance ``psi`` in place by ``n_steps`` steps starting at ``first_step``."""
    cdef Py_ssize_t n = psi.shape[0], ne = rows.shape[0]
    cdef Py_ssize_t step, i, q
    if coeffs.shape[0] < 2 * (first_step + n_steps) + 1:
        raise ValueError("coefficient table too short for requested steps")
    cdef cplx[::1] k1 = np.empty(n, dtype=complex)
    cdef cplx[::1] k2 = np.empty(n, dtype=complex)
    cdef cplx[::1] k3 = np.empty(n, dtype=complex)
    cdef cplx[::1] k4 = np.empty(n, dtype=complex)
    cdef cplx[::1] tmp = np.empty(n, dtype=complex)
    cdef cplx[::1] cv = np.empty(max(ne, 1), dtype=complex)
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    with nogil:
        for step in range(first_step, first_step + n_steps):
            q = 2 * step
            _scale_entries(coeffs, q, ids, vals, cv)
            _hpsi(indptr, indices, data, rows, cols, cv, psi, k1)
            for i in range(n):
                tmp[i] = psi[i] + h2 * k1[i]
            _scale_entries(coeffs, q + 1, ids, vals, cv)
            _hpsi(indptr, indices, data, rows, cols, cv, tmp, k2)
            for i in range(n):
                tmp[i] = psi[i] + h2 * k2[i]
            _hpsi(indptr, indices, data, rows, cols, cv, tmp, k3)
            for i in range(n):
                tmp[i] = psi[i] + dt * k3[i]
            _scale_entries(coeffs, q + 2, ids, vals, cv)
            _hpsi(indptr, indices, data, rows, cols, cv, tmp, k4)
            for i in range(n):
                psi[i] = psi[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


cdef void _lindblad_rhs(const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                        const cplx[::1] data, const Py_ssize_t[::1] rows,
                        const Py_ssize_t[::1] cols, const cplx[::1] cv,
                        const Py_ssize_t[::1] blk_ptr, const Py_ssize_t[::1] blk_of,
                        const double[::1] j_rate, const Py_ssize_t[::1] j_ptr,
                        const Py_ssize_t[::1] j_src, const Py_ssize_t[::1] j_dst,
                        const cplx[:, ::1] rho, cplx[:, ::1] kbuf,
                        cplx[:, ::1] out) noexcept nogil:
    """out = -i K + (-i K)^dagger + sum_j L_j rho L_j^dagger, K = H_eff rho.

    Basis indices must be ordered so every block is a contiguous range
    ``blk_ptr[k] <= index < blk_ptr[k + 1]``; only in-block entries are touched.
    """
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t a, b, blk, p, c, e, r, j, u, v, su, du
    cdef cplx hv, w
    cdef double rate
    for a in range(n):
        blk = blk_of[a]
        for b in range(blk_ptr[blk], blk_ptr[blk + 1]):
            kbuf[a, b] = 0
        for p in range(indptr[a], indptr[a + 1]):
            c = indices[p]
            hv = data[p]
            for b in range(blk_ptr[blk], blk_ptr[blk + 1]):
                kbuf[a, b] = kbuf[a, b] + hv * rho[c, b]
    for e in range(rows.shape[0]):
        r = rows[e]
        c = cols[e]
        blk = blk_of[r]
        hv = cv[e]
        w = conj(hv)
        for b in range(blk_ptr[blk], blk_ptr[blk + 1]):
            kbuf[r, b] = kbuf[r, b] + hv * rho[c, b]
            kbuf[c, b] = kbuf[c, b] + w * rho[r, b]
    for a in range(n):
        blk = blk_of[a]
        for b in range(blk_ptr[blk], blk_ptr[blk + 1]):
            out[a, b] = -1j * kbuf[a, b] + 1j * conj(kbuf[b, a])
    for j in range(j_rate.shape[0]):
        rate = j_rate[j]
        for u in range(j_ptr[j], j_ptr[j + 1]):
            su = j_src[u]
            du = j_dst[u]
            for v in range(j_ptr[j], j_ptr[j + 1]):
                out[du, j_dst[v]] = out[du, j_dst[v]] + rate * rho[su, j_src[v]]


cdef void _blk_axpy(const Py_ssize_t[::1] blk_ptr, const Py_ssize_t[::1] blk_of, const cplx[:, ::1] x,
                    double h, const cplx[:, ::1] k, cplx[:, ::1] y) noexcept nogil:
    cdef Py_ssize_t a, b, blk
    for a in range(x.shape[0]):
        blk = blk_of[a]
        for b in range(blk_ptr[blk], blk_ptr[blk + 1]):
            y[a, b] = x[a, b] + h * k[a, b]


def rk4_lindblad(const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
                 const cplx[::1] data, const Py_ssize_t[::1] rows,
                 const Py_ssize_t[::1] cols, const cplx[::1] vals,
                 const Py_ssize_t[::1] ids, const cplx[:, ::1] coeffs,
                 const Py_ssize_t[::1] blk_ptr, const Py_ssize_t[::1] blk_of,
                 const double[::1] j_rate, const Py_ssize_t[::1] j_ptr,
                 const Py_ssize_t[::1] j_src, const Py_ssize_t[::1] j_dst,
                 cplx[:, ::1] rho, double dt, Py_ssize_t first_step,
                 Py_ssize_t n_steps):
    """Advance ``rho`` in place; ``data`` must already contain -i Gamma / 2."""
    cdef Py_ssize_t n = rho.shape[0], ne = rows.shape[0]
    cdef Py_ssize_t step, q, a, b, blk
    cdef cplx m
    if coeffs.shape[0] < 2 * (first_step + n_steps) + 1:
        raise ValueError("coefficient table too short for requested steps")
    cdef cplx[:, ::1] k1 = np.zeros((n, n), dtype=complex)
    cdef cplx[:, ::1] k2 = np.zeros((n, n), dtype=complex)
    cdef cplx[:, ::1] k3 = np.zeros((n, n), dtype=complex)
    cdef cplx[:, ::1] k4 = np.zeros((n, n), dtype=complex)
    cdef cplx[:, ::1] tmp = np.zeros((n, n), dtype=complex)
    cdef cplx[:, ::1] kbuf = np.zeros((n, n), dtype=complex)
    cdef cplx[::1] cv = np.empty(max(ne, 1), dtype=complex)
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    with nogil:
        for step in range(first_step, first_step + n_steps):
            q = 2 * step
            _scale_entries(coeffs, q, ids, vals, cv)
            _lindblad_rhs(indptr, indices, data, rows, cols, cv, blk_ptr,
                          blk_of, j_rate, j_ptr, j_src, j_dst, rho, kbuf, k1)
            _blk_axpy(blk_ptr, blk_of, rho, h2, k1, tmp)
            _scale_entries(coeffs, q + 1, ids, vals, cv)
            _lindblad_rhs(indptr, indices, data, rows, cols, cv, blk_ptr,
                          blk_of, j_rate, j_ptr, j_src, j_dst, tmp, kbuf, k2)
            _blk_axpy(blk_ptr, blk_of, rho, h2, k2, tmp)
            _lindblad_rhs(indptr, indices, data, rows, cols, cv, blk_ptr,
                          blk_of, j_rate, j_ptr, j_src, j_dst, tmp, kbuf, k3)
            _blk_axpy(blk_ptr, blk_of, rho, dt, k3, tmp)
            _scale_entries(coeffs, q + 2, ids, vals, cv)
            _lindblad_rhs(indptr, indices, data, rows, cols, cv, blk_ptr,
                          blk_of, j_rate, j_ptr, j_src, j_dst, tmp, kbuf, k4)
            for a in range(n):
                blk = blk_of[a]
                for b in range(blk_ptr[blk], blk_ptr[blk + 1]):
                    rho[a, b] = rho[a, b] + h6 * (k1[a, b] + 2.0 * k2[a, b]
                                                  + 2.0 * k3[a, b] + k4[a, b])
            # enforce Hermiticity
            for a in range(n):
                blk = blk_of[a]
                for b in range(blk_ptr[blk], blk_ptr[blk + 1]):
                    if b > a:
                        m = 0.5 * (rho[a, b] + conj(rho[b, a]))
                        rho[a, b] = m
                        rho[b, a] = conj(m)
                    elif b == a:
                        rho[a, a] = rho[a, a].real
