"""Columnwise simplex-projection kernels: numba and pure-numpy twins.

Both backends implement the same sort-based exact projection and must agree
bitwise.  The shifted problem is always solved at mass s = 1 + k*eps: a point
y lies in {y >= -eps, sum(y) = 1} iff y + eps lies in {z >= 0, sum(z) = s}.
"""

import numpy as np

__all__ = [
    "project_columns_numpy",
    "get_numba_kernel",
]


def _equality_tau(w, s):
    """Thresholds for projecting columns of w onto {z >= 0, sum(z) = s}."""
    k = w.shape[0]
    u = np.sort(w, axis=0)[::-1]
    css = np.cumsum(u, axis=0) - s
    ranks = np.arange(1.0, k + 1.0)[:, None]
    # the support condition holds on a prefix of the sorted entries
    rho = np.count_nonzero(u - css / ranks > 0.0, axis=0) - 1
    return css[rho, np.arange(w.shape[1])] / (rho + 1.0)


def project_columns_numpy(m, eps, equality):
    k = m.shape[0]
    s = 1.0 + k * eps
    w = m + eps
    if equality:
        tau = _equality_tau(w, s)
        out = np.maximum(w - tau, 0.0)
    else:
        out = np.maximum(w, 0.0)
        over = out.sum(axis=0) > s
        if np.any(over):
            tau = _equality_tau(w[:, over], s)
            out[:, over] = np.maximum(w[:, over] - tau, 0.0)
    out -= eps
    return np.asfortranarray(out)


_NUMBA_KERNEL = None


def _build_numba_kernel():
    import numba

    @numba.njit(cache=True)
    def project_columns_numba(m, eps, equality, out):
        k, n = m.shape
        s = 1.0 + k * eps
        w = np.empty(k, dtype=np.float64)
        u = np.empty(k, dtype=np.float64)
        for j in range(n):
            for i in range(k):
                w[i] = m[i, j] + eps
            if not equality:
                total = 0.0
                for i in range(k):
                    v = w[i] if w[i] > 0.0 else 0.0
                    out[i, j] = v - eps
                    total += v
                if total <= s:
                    continue
            if k <= 64:
                # insertion sort (descending); allocation-free and faster
                # than a library sort at these column lengths
                for i in range(k):
                    x = w[i]
                    p = i
                    while p > 0 and u[p - 1] < x:
                        u[p] = u[p - 1]
                        p -= 1
                    u[p] = x
            else:
                u[:] = np.sort(w)[::-1]
            css = 0.0
            tau = 0.0
            for d in range(k):
                css += u[d]
                t = (css - s) / (d + 1.0)
                if u[d] - t > 0.0:
                    tau = t
                else:
                    break
            for i in range(k):
                v = w[i] - tau
                out[i, j] = (v if v > 0.0 else 0.0) - eps
        return out

    return project_columns_numba


def get_numba_kernel():
    """Compile (once) and return the numba twin; raises if numba is absent."""
    global _NUMBA_KERNEL
    if _NUMBA_KERNEL is None:
        _NUMBA_KERNEL = _build_numba_kernel()
    return _NUMBA_KERNEL
