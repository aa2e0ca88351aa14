"""Hot O(n^2) kernels, each with a numba and a pure-numpy implementation.

The public dispatchers pick the implementation from :mod:`rdream._accel`.
Both implementations agree to floating-point round-off; the numpy versions
double as readable references.
"""

import numpy as np

from . import _accel
from ._accel import njit

QUARTIC_C = 15.0 / 16.0
# Above this size the numba pair sums skip pairs outside the kernel support
# by scanning a window sorted on the first projected coordinate.
WINDOW_MIN_N = 2000


def quartic(u):
    u = np.asarray(u, dtype=float)
    t = 1.0 - u * u
    return np.where(np.abs(u) <= 1.0, QUARTIC_C * t * t, 0.0)


# -- pair sums ---------------------------------------------------------------


def _pair_sums_numpy(z, h, u, v, block=256):
    n, q = z.shape
    zs = z / h
    norm = h ** (-q)
    s1 = 0.0
    s2 = 0.0
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = zs[start:stop, None, :] - zs[None, :, :]
        k = np.prod(quartic(diff), axis=2)
        rows = np.arange(start, stop)
        k[rows - start, rows] = 0.0
        s1 += norm * (u[start:stop] @ k @ u)
        s2 += norm * (v[start:stop] @ (k * k) @ v)
    return s1, s2


@njit
def _pair_kernel_nb(zs, i, j, q):
    w = 1.0
    for c in range(q):
        d = zs[i, c] - zs[j, c]
        if d >= 1.0 or d <= -1.0:
            return 0.0
        t = 1.0 - d * d
        w *= QUARTIC_C * t * t
    return w


@njit
def _pair_sums_dense_nb(zs, norm, u, v):
    n, q = zs.shape
    s1 = 0.0
    s2 = 0.0
    for i in range(n):
        r1 = 0.0
        r2 = 0.0
        for j in range(i + 1, n):
            w = _pair_kernel_nb(zs, i, j, q)
            if w != 0.0:
                r1 += w * u[j]
                r2 += w * w * v[j]
        s1 += u[i] * r1
        s2 += v[i] * r2
    return 2.0 * norm * s1, 2.0 * norm * s2


@njit
def _pair_sums_window_nb(zs, norm, u, v):
    n, q = zs.shape
    order = np.argsort(zs[:, 0], kind="mergesort")
    zo = zs[order]
    uo = u[order]
    vo = v[order]
    s1 = 0.0
    s2 = 0.0
    for i in range(n):
        r1 = 0.0
        r2 = 0.0
        j = i + 1
        while j < n and zo[j, 0] - zo[i, 0] < 1.0:
            w = _pair_kernel_nb(zo, i, j, q)
            if w != 0.0:
                r1 += w * uo[j]
                r2 += w * w * vo[j]
            j += 1
        s1 += uo[i] * r1
        s2 += vo[i] * r2
    return 2.0 * norm * s1, 2.0 * norm * s2


def pair_sums(z, h, u, v):
    """Kernel-weighted double sums over ordered pairs i != j.

    Returns ``(sum K_h(z_i - z_j) u_i u_j, sum h^-q K^2((z_i - z_j)/h) v_i v_j)``
    with ``K_h(.) = K(./h) / h^q`` the product quartic kernel.
    """
    z = np.ascontiguousarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    u = np.ascontiguousarray(u, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    if _accel.backend() == "numpy":
        return _pair_sums_numpy(z, h, u, v)
    zs = z / h
    norm = h ** (-z.shape[1])
    if z.shape[0] > WINDOW_MIN_N:
        return _pair_sums_window_nb(zs, norm, u, v)
    return _pair_sums_dense_nb(zs, norm, u, v)


def _weight_matrix_numpy(z, h):
    n, q = z.shape
    zs = z / h
    w = np.prod(quartic(zs[:, None, :] - zs[None, :, :]), axis=2) * h ** (-q)
    np.fill_diagonal(w, 0.0)
    return w


@njit
def _weight_matrix_nb(zs, norm):
    n, q = zs.shape
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            k = _pair_kernel_nb(zs, i, j, q) * norm
            w[i, j] = k
            w[j, i] = k
    return w


def weight_matrix(z, h):
    z = np.ascontiguousarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if _accel.backend() == "numpy":
        return _weight_matrix_numpy(z, h)
    return _weight_matrix_nb(z / h, h ** (-z.shape[1]))


# -- OPG local linear gradients ---------------------------------------------


def _local_fit_numpy(x, xs, y, j, h, ridge_rel, min_support):
    d = (xs - xs[j]) / h
    w = np.prod(quartic(d), axis=1)
    support = int(np.count_nonzero(w))
    if support < min_support:
        return None, support
    design = np.empty((x.shape[0], x.shape[1] + 1))
    design[:, 0] = 1.0
    design[:, 1:] = x - x[j]
    a = design.T @ (design * w[:, None])
    b = design.T @ (w * y)
    a[np.diag_indices_from(a)] += ridge_rel * np.trace(a)
    return np.linalg.solve(a, b)[1:], support


def _opg_numpy(x, xs, y, h0, ridge_rel, min_support, factor, max_inflations):
    n, p = x.shape
    grads = np.empty((n, p))
    inflated = 0
    for j in range(n):
        h = h0
        for attempt in range(max_inflations + 1):
            coef, support = _local_fit_numpy(x, xs, y, j, h, ridge_rel, min_support)
            if coef is not None:
                break
            h *= factor
        if coef is None:
            return grads, inflated, j, support
        if attempt:
            inflated += 1
        grads[j] = coef
    return grads, inflated, -1, 0


@njit
def _opg_nb(x, xs, y, h0, ridge_rel, min_support, factor, max_inflations):
    n, p = x.shape
    m = p + 1
    grads = np.empty((n, p))
    w = np.empty(n)
    inflated = 0
    for j in range(n):
        h = h0
        ok = False
        support = 0
        for attempt in range(max_inflations + 1):
            support = 0
            for i in range(n):
                wi = 1.0
                for c in range(p):
                    d = (xs[i, c] - xs[j, c]) / h
                    if d >= 1.0 or d <= -1.0:
                        wi = 0.0
                        break
                    t = 1.0 - d * d
                    wi *= QUARTIC_C * t * t
                w[i] = wi
                if wi != 0.0:
                    support += 1
            if support >= min_support:
                ok = True
                if attempt > 0:
                    inflated += 1
                break
            h *= factor
        if not ok:
            return grads, inflated, j, support
        a = np.zeros((m, m))
        b = np.zeros(m)
        row = np.empty(m)
        row[0] = 1.0
        for i in range(n):
            wi = w[i]
            if wi == 0.0:
                continue
            for c in range(p):
                row[c + 1] = x[i, c] - x[j, c]
            for r in range(m):
                wr = wi * row[r]
                b[r] += wr * y[i]
                for s in range(r, m):
                    a[r, s] += wr * row[s]
        tr = 0.0
        for r in range(m):
            tr += a[r, r]
            for s in range(r):
                a[r, s] = a[s, r]
        for r in range(m):
            a[r, r] += ridge_rel * tr
        coef = np.linalg.solve(a, b)
        for c in range(p):
            grads[j, c] = coef[c + 1]
    return grads, inflated, -1, 0


def opg_gradients(x, xs, y, h0, ridge_rel=1e-8, min_support=None, factor=1.5, max_inflations=4):
    """Local linear slope at every anchor point.

    Weights come from the product quartic on ``xs`` (standardized covariates)
    with bandwidth ``h0``; the regression uses raw ``x`` so the slopes are
    gradients with respect to ``x``. An anchor whose support has fewer than
    ``min_support`` points gets its bandwidth multiplied by ``factor`` up to
    ``max_inflations`` times.

    Returns ``(grads, n_inflated, failed_anchor, failed_support)``;
    ``failed_anchor`` is -1 on success.
    """
    x = np.ascontiguousarray(x, dtype=float)
    xs = np.ascontiguousarray(xs, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if min_support is None:
        min_support = x.shape[1] + 2
    impl = _opg_numpy if _accel.backend() == "numpy" else _opg_nb
    grads, inflated, failed, support = impl(
        x, xs, y, float(h0), float(ridge_rel), int(min_support), float(factor), int(max_inflations)
    )
    return grads, int(inflated), int(failed), int(support)
