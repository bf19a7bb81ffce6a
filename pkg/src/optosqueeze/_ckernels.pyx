# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: batched complex Gaussian elimination and quadratic forms."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

from ._errors import SingularSystemError

ctypedef double complex cplx

cnp.import_array()


cdef inline double cabs1(cplx z) nogil:
    # 1-norm of a complex number; cheap pivot magnitude
    return fabs(z.real) + fabs(z.imag)


cdef int _solve_inplace(cplx[:, ::1] a, cplx[:, ::1] b, double rtol) noexcept nogil:
    """Partial-pivot elimination of ``a x = b``; ``b`` is overwritten with ``x``.

    Returns the failing column index, or -1 on success.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[1]
    cdef Py_ssize_t i, j, k, p
    cdef double best, mag, scale = 0.0
    cdef cplx t, f
    for i in range(n):
        for j in range(n):
            mag = cabs1(a[i, j])
            if mag > scale:
                scale = mag
    if scale == 0.0:
        return 0
    for k in range(n):
        p = k
        best = cabs1(a[k, k])
        for i in range(k + 1, n):
            mag = cabs1(a[i, k])
            if mag > best:
                best = mag
                p = i
        if best <= rtol * scale:
            return k
        if p != k:
            for j in range(k, n):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
            for j in range(m):
                t = b[k, j]
                b[k, j] = b[p, j]
                b[p, j] = t
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            if f.real == 0.0 and f.imag == 0.0:
                continue
            for j in range(k + 1, n):
                a[i, j] = a[i, j] - f * a[k, j]
            for j in range(m):
                b[i, j] = b[i, j] - f * b[k, j]
    for k in range(n - 1, -1, -1):
        for j in range(m):
            t = b[k, j]
            for i in range(k + 1, n):
                t = t - a[k, i] * b[i, j]
            b[k, j] = t / a[k, k]
    return -1


def solve_batch(mats, rhs, double rtol=1e-14):
    """Solve ``mats[b] @ x[b] = rhs[b]`` for every batch index ``b``."""
    cdef cplx[:, :, ::1] a = np.array(mats, dtype=np.complex128, order="C", copy=True)
    cdef cplx[:, :, ::1] x = np.array(rhs, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t nb = a.shape[0], b
    cdef int bad = -1, bad_b = -1
    if x.shape[0] != nb or x.shape[1] != a.shape[1] or a.shape[1] != a.shape[2]:
        raise ValueError("shape mismatch in solve_batch")
    with nogil:
        for b in range(nb):
            bad = _solve_inplace(a[b], x[b], rtol)
            if bad >= 0:
                bad_b = b
                break
    if bad_b >= 0:
        raise SingularSystemError(f"singular system at batch index {bad_b} (column {bad})", index=bad_b)
    return np.asarray(x)


def lti_response(drift, in_map, omegas, double rtol=1e-14):
    """``(-i w I - drift)^{-1} in_map`` for every frequency ``w``."""
    cdef const double[:, ::1] A = np.ascontiguousarray(drift, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(in_map, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(omegas, dtype=np.float64).ravel()
    cdef Py_ssize_t n = A.shape[0], m = B.shape[1], nw = w.shape[0]
    cdef Py_ssize_t q, i, j
    cdef int bad = -1, bad_q = -1
    out = np.empty((nw, n, m), dtype=np.complex128)
    cdef cplx[:, :, ::1] x = out
    cdef cplx[:, ::1] work = np.empty((n, n), dtype=np.complex128)
    if A.shape[1] != n or B.shape[0] != n:
        raise ValueError("shape mismatch in lti_response")
    with nogil:
        for q in range(nw):
            for i in range(n):
                for j in range(n):
                    work[i, j] = -A[i, j]
                work[i, i] = work[i, i] - 1j * w[q]
                for j in range(m):
                    x[q, i, j] = B[i, j]
            bad = _solve_inplace(work, x[q], rtol)
            if bad >= 0:
                bad_q = q
                break
    if bad_q >= 0:
        raise SingularSystemError(
            f"singular response matrix at omega={w[bad_q]!r}", index=bad_q
        )
    return out


def spectral_density(ta, noise, tb):
    """``sum_jk ta[.., j] N[j, k] conj(tb[.., k])`` over a leading batch axis."""
    cdef const cplx[:, ::1] a = np.ascontiguousarray(ta, dtype=np.complex128)
    cdef const cplx[:, ::1] c = np.ascontiguousarray(tb, dtype=np.complex128)
    cdef const cplx[:, ::1] N = np.ascontiguousarray(noise, dtype=np.complex128)
    cdef Py_ssize_t nb = a.shape[0], m = a.shape[1], b, j, k
    cdef cplx acc, row
    out = np.empty(nb, dtype=np.complex128)
    cdef cplx[::1] o = out
    if c.shape[0] != nb or c.shape[1] != m or N.shape[0] != m or N.shape[1] != m:
        raise ValueError("shape mismatch in spectral_density")
    with nogil:
        for b in range(nb):
            acc = 0
            for k in range(m):
                row = 0
                for j in range(m):
                    row = row + a[b, j] * N[j, k]
                acc = acc + row * c[b, k].conjugate()
            o[b] = acc
    return out
