"""Mod-p matrix kernels on int64 numpy arrays, with optional numba acceleration.

Set HOMOCAT_NO_NUMBA=1 to force the pure-numpy fallback.  All kernels require
(p-1)**2 * n < 2**63 so products never overflow int64; callers guarantee p < 2**31
and fall back to object arithmetic for pathological shapes.
"""

import os

import numpy as np

_USE_NUMBA = os.environ.get("HOMOCAT_NO_NUMBA", "") != "1"
if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - depends on environment
        _USE_NUMBA = False

if not _USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def fp_matmul_numpy(a, b, p):
    # chunk the inner dimension so row-sums of products stay below 2**63
    n = a.shape[1]
    if n == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    cap = max(1, (2**62) // max(1, (p - 1) ** 2))
    if n <= cap:
        return (a @ b) % p
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for s in range(0, n, cap):
        out = (out + a[:, s:s + cap] @ b[s:s + cap, :]) % p
    return out


@njit(cache=True)
def _fp_matmul_jit(a, b, p):  # pragma: no cover - exercised via dispatch
    m, n = a.shape
    k = b.shape[1]
    out = np.zeros((m, k), dtype=np.int64)
    for i in range(m):
        for j in range(n):
            aij = a[i, j]
            if aij != 0:
                for c in range(k):
                    out[i, c] = (out[i, c] + aij * b[j, c]) % p
    return out


def fp_rref_numpy(mat, p):
    """Row-reduce mat mod p in place (on a copy); returns (reduced, pivots)."""
    a = mat % p
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        # smallest nonzero representative, earliest row on ties
        sel = nz[np.argmin(col[nz])]
        piv = r + sel
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        colvals = a[:, c].copy()
        colvals[r] = 0
        a -= np.outer(colvals, a[r])
        a %= p
        pivots.append(c)
        r += 1
    return a, pivots


@njit(cache=True)
def _fp_rref_jit(a, p):  # pragma: no cover - exercised via dispatch
    rows, cols = a.shape
    pivots = np.empty(min(rows, cols), dtype=np.int64)
    npiv = 0
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = -1
        best = p
        for i in range(r, rows):
            v = a[i, c]
            if v != 0 and v < best:
                best = v
                piv = i
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                tmp = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = tmp
        # Fermat inverse
        inv = 1
        base = a[r, c] % p
        e = p - 2
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for j in range(cols):
            a[r, j] = (a[r, j] * inv) % p
        for i in range(rows):
            if i != r and a[i, c] != 0:
                f = a[i, c]
                for j in range(cols):
                    a[i, j] = (a[i, j] - f * a[r, j]) % p
        pivots[npiv] = c
        npiv += 1
        r += 1
    return a, pivots[:npiv]


def fp_matmul(a, b, p):
    if _USE_NUMBA and (p - 1) ** 2 * max(1, a.shape[1]) < 2**63:
        return _fp_matmul_jit(a, b, p)
    return fp_matmul_numpy(a, b, p)


def fp_rref(mat, p):
    if _USE_NUMBA and (p - 1) ** 2 < 2**62:
        a, piv = _fp_rref_jit(mat % p, p)
        return a, [int(x) for x in piv]
    a, piv = fp_rref_numpy(mat, p)
    return a, list(piv)


def using_numba():
    return _USE_NUMBA
