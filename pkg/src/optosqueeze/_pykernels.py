"""Numpy implementations of the compiled kernels.

Same algorithm (partial-pivot elimination, identical singularity test),
vectorized over the batch axis instead of compiled.
"""
import numpy as np

from ._errors import SingularSystemError


def _cabs1(z):
    return np.abs(z.real) + np.abs(z.imag)


def solve_batch(mats, rhs, rtol=1e-14):
    a = np.array(mats, dtype=np.complex128, copy=True)
    x = np.array(rhs, dtype=np.complex128, copy=True)
    if a.ndim != 3 or x.ndim != 3 or x.shape[:2] != a.shape[:2] or a.shape[1] != a.shape[2]:
        raise ValueError("shape mismatch in solve_batch")
    nb, n, _ = a.shape
    scale = _cabs1(a).reshape(nb, -1).max(axis=1) if nb else np.zeros(0)
    rows = np.arange(nb)
    for k in range(n):
        col = _cabs1(a[:, k:, k])
        p = k + np.argmax(col, axis=1)
        best = col[rows, p - k]
        bad = (best <= rtol * scale) & (scale > 0)
        if np.any(bad):
            b = int(np.flatnonzero(bad)[0])
            raise SingularSystemError(f"singular system at batch index {b} (column {k})", index=b)
        swap = p != k
        if np.any(swap):
            idx = rows[swap]
            pk = p[swap]
            ak = a[idx, k, :].copy()
            a[idx, k, :] = a[idx, pk, :]
            a[idx, pk, :] = ak
            xk = x[idx, k, :].copy()
            x[idx, k, :] = x[idx, pk, :]
            x[idx, pk, :] = xk
        piv = a[:, k, k]
        safe = np.where(scale > 0, piv, 1.0)
        f = a[:, k + 1 :, k] / safe[:, None]
        a[:, k + 1 :, k:] -= f[:, :, None] * a[:, None, k, k:]
        x[:, k + 1 :, :] -= f[:, :, None] * x[:, None, k, :]
    for k in range(n - 1, -1, -1):
        t = x[:, k, :] - np.einsum("bi,bij->bj", a[:, k, k + 1 :], x[:, k + 1 :, :])
        piv = np.where(scale > 0, a[:, k, k], 1.0)
        x[:, k, :] = t / piv[:, None]
    return x


def lti_response(drift, in_map, omegas, rtol=1e-14):
    A = np.asarray(drift, dtype=np.float64)
    B = np.asarray(in_map, dtype=np.float64)
    w = np.asarray(omegas, dtype=np.float64).ravel()
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise ValueError("shape mismatch in lti_response")
    mats = -A[None, :, :] - 1j * w[:, None, None] * np.eye(n)[None, :, :]
    rhs = np.broadcast_to(B, (w.size,) + B.shape)
    try:
        return solve_batch(mats, rhs, rtol)
    except SingularSystemError as err:
        raise SingularSystemError(
            f"singular response matrix at omega={w[err.index]!r}", index=err.index
        ) from None


def spectral_density(ta, noise, tb):
    a = np.asarray(ta, dtype=np.complex128)
    c = np.asarray(tb, dtype=np.complex128)
    N = np.asarray(noise, dtype=np.complex128)
    if a.shape != c.shape or N.shape != (a.shape[1], a.shape[1]):
        raise ValueError("shape mismatch in spectral_density")
    return np.einsum("bj,jk,bk->b", a, N, c.conj())
