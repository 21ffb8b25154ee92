"""Pure-numpy fallback with the same signatures as the compiled kernels."""

from __future__ import annotations

import numpy as np
from scipy import sparse


def _drive_matrices(n, rows, cols, vals, ids, n_channels):
    """Stacked (2K*n, n) operator: K forward blocks, then K conjugate blocks."""
    fwd_rows = ids * n + rows
    bwd_rows = (ids + n_channels) * n + cols
    r = np.concatenate([fwd_rows, bwd_rows])
    c = np.concatenate([cols, rows])
    v = np.concatenate([vals, np.conj(vals)])
    return sparse.csr_matrix((v, (r, c)), shape=(2 * n_channels * n, n))


class _Generator:
    def __init__(self, indptr, indices, data, rows, cols, vals, ids, coeffs, n):
        self.n = n
        self.k = coeffs.shape[1]
        self.static = sparse.csr_matrix((data, indices, indptr), shape=(n, n))
        self.stack = _drive_matrices(n, rows, cols, vals, ids, self.k)
        self.coeffs = coeffs

    def weights(self, q):
        c = self.coeffs[q]
        return np.concatenate([c, np.conj(c)])

    def apply(self, q, x):
        """H(t_q) @ x for a vector or a dense matrix."""
        y = self.static @ x
        if self.k:
            w = self.weights(q)
            z = self.stack @ x
            z = z.reshape((2 * self.k, self.n) + x.shape[1:])
            y = y + np.tensordot(w, z, axes=(0, 0))
        return y


def rk4_schrodinger(indptr, indices, data, rows, cols, vals, ids, coeffs,
                    psi, dt, first_step, n_steps):
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] < 2 * (first_step + n_steps) + 1:
        raise ValueError("coefficient table too short for requested steps")
    gen = _Generator(indptr, indices, data, rows, cols, vals, ids, coeffs, psi.shape[0])
    x = np.array(psi)
    for step in range(first_step, first_step + n_steps):
        q = 2 * step
        k1 = -1j * gen.apply(q, x)
        k2 = -1j * gen.apply(q + 1, x + 0.5 * dt * k1)
        k3 = -1j * gen.apply(q + 1, x + 0.5 * dt * k2)
        k4 = -1j * gen.apply(q + 2, x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    psi[:] = x


def rk4_lindblad(indptr, indices, data, rows, cols, vals, ids, coeffs,
                 blk_ptr, blk_of, j_rate, j_ptr, j_src, j_dst,
                 rho, dt, first_step, n_steps):
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] < 2 * (first_step + n_steps) + 1:
        raise ValueError("coefficient table too short for requested steps")
    n = rho.shape[0]
    gen = _Generator(indptr, indices, data, rows, cols, vals, ids, coeffs, n)
    blk_of = np.asarray(blk_of)
    mask = blk_of[:, None] == blk_of[None, :]
    jumps = [(j_rate[j], np.asarray(j_src[j_ptr[j]:j_ptr[j + 1]]),
              np.asarray(j_dst[j_ptr[j]:j_ptr[j + 1]])) for j in range(len(j_rate))]

    def rhs(q, r):
        k = gen.apply(q, r)
        out = -1j * k
        out = out + out.conj().T
        for rate, src, dst in jumps:
            out[np.ix_(dst, dst)] += rate * r[np.ix_(src, src)]
        return np.where(mask, out, 0.0)

    x = np.array(rho)
    for step in range(first_step, first_step + n_steps):
        q = 2 * step
        k1 = rhs(q, x)
        k2 = rhs(q + 1, x + 0.5 * dt * k1)
        k3 = rhs(q + 1, x + 0.5 * dt * k2)
        k4 = rhs(q + 2, x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        x = 0.5 * (x + x.conj().T)
    rho[:] = x
