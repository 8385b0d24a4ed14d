# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels.

Same call signatures and results as ``entpump._kernels_py``. Gates and
depolarization act on the density matrix through strided index loops, so a
k-qubit operation costs O(4^n * 2^k) instead of two dense 2^n matmuls.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


cdef inline Py_ssize_t _target_mask(long[::1] targets, int n):
    cdef Py_ssize_t mask = 0
    cdef Py_ssize_t t
    for t in range(targets.shape[0]):
        mask |= (<Py_ssize_t>1) << (n - 1 - targets[t])
    return mask


cdef void _offsets(long[::1] targets, int n, Py_ssize_t[::1] off):
    # off[j] is the index offset whose target bits spell j (targets[0] most significant).
    cdef int k = targets.shape[0]
    cdef Py_ssize_t j, t, o
    for j in range(1 << k):
        o = 0
        for t in range(k):
            if (j >> (k - 1 - t)) & 1:
                o |= (<Py_ssize_t>1) << (n - 1 - targets[t])
        off[j] = o


def apply_gate(rho_in, u_in, targets_in, int n):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] rho = np.array(rho_in, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] r = rho
    cdef double complex[:, ::1] u = np.ascontiguousarray(u_in, dtype=np.complex128)
    cdef long[::1] targets = np.ascontiguousarray(targets_in, dtype=np.int64)
    cdef int k = targets.shape[0]
    cdef Py_ssize_t m = 1 << k
    cdef Py_ssize_t d = (<Py_ssize_t>1) << n
    cdef Py_ssize_t mask = _target_mask(targets, n)
    cdef Py_ssize_t[::1] off = np.empty(m, dtype=np.intp)
    cdef double complex[::1] v = np.empty(m, dtype=np.complex128)
    cdef Py_ssize_t b, c, i, j
    cdef double complex acc
    _offsets(targets, n, off)

    with nogil:
        # rho <- U rho
        for c in range(d):
            for b in range(d):
                if b & mask:
                    continue
                for j in range(m):
                    v[j] = r[b + off[j], c]
                for i in range(m):
                    acc = 0
                    for j in range(m):
                        acc = acc + u[i, j] * v[j]
                    r[b + off[i], c] = acc
        # rho <- rho U^dagger
        for c in range(d):
            for b in range(d):
                if b & mask:
                    continue
                for j in range(m):
                    v[j] = r[c, b + off[j]]
                for i in range(m):
                    acc = 0
                    for j in range(m):
                        acc = acc + u[i, j].conjugate() * v[j]
                    r[c, b + off[i]] = acc
    return rho


def depolarize(rho_in, targets_in, double lam, int n):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] rho = np.array(rho_in, dtype=np.complex128, order="C")
    if lam == 0.0:
        return rho
    cdef double complex[:, ::1] r = rho
    cdef long[::1] targets = np.ascontiguousarray(targets_in, dtype=np.int64)
    cdef int k = targets.shape[0]
    cdef Py_ssize_t m = 1 << k
    cdef Py_ssize_t d = (<Py_ssize_t>1) << n
    cdef Py_ssize_t mask = _target_mask(targets, n)
    cdef Py_ssize_t[::1] off = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t a, b, i, j
    cdef double complex s
    cdef double keep = 1.0 - lam
    cdef double share = lam / m
    _offsets(targets, n, off)

    with nogil:
        for a in range(d):
            if a & mask:
                continue
            for b in range(d):
                if b & mask:
                    continue
                s = 0
                for j in range(m):
                    s = s + r[a + off[j], b + off[j]]
                for i in range(m):
                    for j in range(m):
                        r[a + off[i], b + off[j]] = keep * r[a + off[i], b + off[j]]
                    r[a + off[i], b + off[i]] = r[a + off[i], b + off[i]] + share * s
    return rho


cdef void _rhs(double complex[:, ::1] rho,
               Py_ssize_t[:, ::1] kidx, double complex[:, ::1] kval,
               Py_ssize_t[:, :, ::1] cidx, double complex[:, :, ::1] cval, double[::1] g,
               double complex[:, ::1] t1, double complex[:, ::1] out) noexcept nogil:
    # out = K rho + rho K^dagger + sum_q g_q c_q rho c_q^dagger, with
    # K = -iH - (1/2) sum_q g_q c_q^dagger c_q. Matrices are stored row-wise
    # in padded sparse form (column index, value); padding has value 0.
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t nk = cidx.shape[0]
    cdef Py_ssize_t wk = kidx.shape[1]
    cdef Py_ssize_t wc = cidx.shape[2]
    cdef Py_ssize_t i, j, m, q
    cdef double complex acc
    for i in range(d):
        for j in range(d):
            acc = 0
            for m in range(wk):
                acc = acc + kval[i, m] * rho[kidx[i, m], j] + rho[i, kidx[j, m]] * kval[j, m].conjugate()
            out[i, j] = acc
    for q in range(nk):
        if g[q] == 0.0:
            continue
        for i in range(d):
            for j in range(d):
                acc = 0
                for m in range(wc):
                    acc = acc + cval[q, i, m] * rho[cidx[q, i, m], j]
                t1[i, j] = acc
        for i in range(d):
            for j in range(d):
                acc = 0
                for m in range(wc):
                    acc = acc + t1[i, cidx[q, j, m]] * cval[q, j, m].conjugate()
                out[i, j] = out[i, j] + g[q] * acc


def _ell(mats):
    """Padded row-sparse form of a stack of square matrices."""
    mats = np.asarray(mats)
    lead = tuple(mats.shape)[: mats.ndim - 1]
    nz = mats != 0
    width = max(1, int(nz.sum(axis=mats.ndim - 1).max()))
    idx = np.zeros(lead + (width,), dtype=np.intp)
    val = np.zeros(lead + (width,), dtype=np.complex128)
    for pos in np.ndindex(*lead):
        cols = np.flatnonzero(nz[pos])
        idx[pos][: cols.size] = cols
        val[pos][: cols.size] = mats[pos][cols]
    return idx, val


def lindblad_rk4(rho0, h_in, jumps_in, rates_in, double dt, Py_ssize_t nsteps):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] rho_arr = np.array(rho0, dtype=np.complex128, order="C")
    cdef Py_ssize_t d = rho_arr.shape[0]
    jumps_arr = np.asarray(jumps_in, dtype=np.complex128).reshape(-1, d, d)
    rates_arr = np.ascontiguousarray(rates_in, dtype=np.float64)
    cdc = np.einsum("q,qlj,qli->ij", rates_arr, jumps_arr, jumps_arr.conj())
    k_arr = -1j * np.asarray(h_in, dtype=np.complex128) - 0.5 * cdc
    kidx_arr, kval_arr = _ell(k_arr)
    cidx_arr, cval_arr = _ell(jumps_arr)
    cdef Py_ssize_t[:, ::1] kidx = kidx_arr
    cdef double complex[:, ::1] kval = kval_arr
    cdef Py_ssize_t[:, :, ::1] cidx = cidx_arr
    cdef double complex[:, :, ::1] cval = cval_arr
    cdef double[::1] g = rates_arr
    traj_arr = np.empty((nsteps + 1, d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] traj = traj_arr
    cdef double complex[:, ::1] rho = rho_arr
    cdef double complex[:, ::1] tmp = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k1 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k2 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k3 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] k4 = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] t1 = np.empty((d, d), dtype=np.complex128)
    cdef Py_ssize_t s, i, j
    cdef double complex a, b
    cdef double sixth = dt / 6.0
    cdef bint bad = False
    cdef Py_ssize_t bad_step = 0

    traj_arr[0] = rho_arr
    with nogil:
        for s in range(nsteps):
            _rhs(rho, kidx, kval, cidx, cval, g, t1, k1)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = rho[i, j] + 0.5 * dt * k1[i, j]
            _rhs(tmp, kidx, kval, cidx, cval, g, t1, k2)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = rho[i, j] + 0.5 * dt * k2[i, j]
            _rhs(tmp, kidx, kval, cidx, cval, g, t1, k3)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = rho[i, j] + dt * k3[i, j]
            _rhs(tmp, kidx, kval, cidx, cval, g, t1, k4)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = rho[i, j] + sixth * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            for i in range(d):
                for j in range(d):
                    a = tmp[i, j]
                    b = tmp[j, i].conjugate()
                    rho[i, j] = 0.5 * (a + b)
                    if not (isfinite(rho[i, j].real) and isfinite(rho[i, j].imag)):
                        bad = True
            if bad:
                bad_step = s + 1
                break
            for i in range(d):
                for j in range(d):
                    traj[s + 1, i, j] = rho[i, j]
    if bad:
        raise FloatingPointError(f"non-finite density matrix at step {bad_step}")
    return traj_arr
