"""Numpy reference implementation of the hot kernels.

Kept in exact numerical agreement with the compiled core; the chunk size
only bounds temporary memory, results are identical per row.
"""

import numpy as np

_CHUNK_SCALARS = 8_000_000  # bound on the node x frequency temporaries


def _weights(u, family, N, P):
    if family == 0:
        # truncated exponential jet: W = sum_{j<=N} (-u)^j / j!,
        # WD = W + W' telescopes to the last term
        W = np.ones_like(u)
        term = np.ones_like(u)
        for j in range(1, N + 1):
            term = term * (-u) / j
            W = W + term
        WD = term  # (-u)^N / N!
        return W, WD
    # damped cutoff: W = e^{-u} S((|u|-P)/P) with S a smooth step that is
    # identically 1 below P, so W + W' vanishes wherever |u| <= P
    v = (np.abs(u) - P) / P
    S = np.where(v <= 0.0, 1.0, 0.0)
    Sd = np.zeros_like(u)
    mid = (v > 0.0) & (v < 1.0)
    vm = v[mid]
    g = np.exp(-1.0 / vm)
    gt = np.exp(-1.0 / (1.0 - vm))
    S[mid] = gt / (g + gt)
    Sd[mid] = -g * gt * (1.0 / (1.0 - vm) ** 2 + 1.0 / vm ** 2) / (g + gt) ** 2
    damp = np.exp(-np.clip(u, -2.0 * P, 2.0 * P))
    return damp * S, damp * np.sign(u) * Sd / P


def aae_integrals(x, y, xi, fhat_scaled, family, N, P):
    """Windowed Fourier sums of the extension and its defect at each node.

    For node j: G_j = sum_m e^{i x_j xi_m} W(y_j xi_m) fhat_m and
    D_j = sum_m e^{i x_j xi_m} (i xi_m) WD(y_j xi_m) fhat_m, with the
    weighting family selected by `family` (0 jet, 1 cutoff).
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    xi = np.asarray(xi, dtype=float)
    fhat_scaled = np.asarray(fhat_scaled, dtype=complex)
    G = np.empty(x.shape, dtype=complex)
    D = np.empty(x.shape, dtype=complex)
    step = max(1, _CHUNK_SCALARS // max(1, len(xi)))
    for a in range(0, len(x), step):
        b = min(a + step, len(x))
        u = y[a:b, None] * xi[None, :]
        W, WD = _weights(u, family, N, P)
        phase = np.exp(1j * x[a:b, None] * xi[None, :])
        G[a:b] = (phase * W) @ fhat_scaled
        D[a:b] = (phase * WD) @ (1j * xi * fhat_scaled)
    return G, D


def tridiag_accumulate(diag, sub, zs, coefs):
    """sum_q coefs_q (z_q - T)^{-1} for Hermitian tridiagonal T.

    diag is the real diagonal, sub the complex subdiagonal (T[i+1, i]).
    One Thomas elimination per right-hand side, vectorized across nodes.
    """
    diag = np.asarray(diag, dtype=float)
    sub = np.asarray(sub, dtype=complex)
    zs = np.asarray(zs, dtype=complex)
    coefs = np.asarray(coefs, dtype=complex)
    n = len(diag)
    q = len(zs)
    out = np.zeros((n, n), dtype=complex)
    if q == 0:
        return out
    # rows of (z - T): lower -sub, diagonal z - d, upper -conj(sub)
    lo = -sub
    up = -sub.conj()
    for a in range(0, q, 256):
        b = min(a + 256, q)
        m = b - a
        dd = zs[a:b, None] - diag[None, :]  # (m, n)
        X = np.zeros((m, n, n), dtype=complex)
        X[:, np.arange(n), np.arange(n)] = 1.0
        # forward elimination
        piv = dd[:, 0].copy()
        X[:, 0, :] /= piv[:, None]
        for i in range(1, n):
            piv = dd[:, i] - (lo[i - 1] * up[i - 1]) / piv
            X[:, i, :] = (X[:, i, :] - lo[i - 1] * X[:, i - 1, :]) / piv[:, None]
            dd[:, i] = piv
        # back substitution
        for i in range(n - 2, -1, -1):
            X[:, i, :] -= (up[i] / dd[:, i])[:, None] * X[:, i + 1, :]
        out += np.sum(coefs[a:b, None, None] * X, axis=0)
    return out
