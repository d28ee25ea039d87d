"""Pure-numpy versions of the hot kernels."""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def twisted_convolution(W1, W2, dq, dp, hbar, sign):
    """``out[i, j] = sum_{k,l} W1[i-k+c, j-l+c] W2[k, l] exp(sign i (p_j q_k - q_i p_l)/hbar)``.

    Indices refer to a centred lattice ``q_i = (i - c) dq``, ``p_j = (j - c) dp``;
    the sum is unnormalised.
    """
    W1 = np.asarray(W1, dtype=complex)
    W2 = np.asarray(W2, dtype=complex)
    Mq, Mp = W1.shape
    cq, cp = Mq // 2, Mp // 2
    q = (np.arange(Mq) - cq) * dq
    p = (np.arange(Mp) - cp) * dp
    E1 = np.exp(1j * sign * np.outer(p, q) / hbar)  # [j, k]
    pad = np.zeros((3 * Mq, 3 * Mp), dtype=complex)
    pad[Mq : 2 * Mq, Mp : 2 * Mp] = W1
    out = np.empty((Mq, Mp), dtype=complex)
    k = np.arange(Mq)
    for i in range(Mq):
        slab = pad[i - k + cq + Mq, :]  # rows for z - z', shape (Mq, 3 Mp)
        sw = sliding_window_view(slab, Mp, axis=1)[:, cp + 1 : cp + 1 + Mp, ::-1]  # [k, j, l]
        B = W2 * np.exp(-1j * sign * q[i] * p / hbar)[None, :]
        out[i] = np.einsum("kjl,kl,jk->j", sw, B, E1, optimize=True)
    return out


def coherent_columns(x, q, p, alpha, norm, hbar):
    """Columns ``norm_k exp(-(i/2hbar)(x-q_k)^2/alpha_k + i p_k x/hbar - i p_k q_k/2hbar)``."""
    x = np.asarray(x, dtype=float)[:, None]
    q = np.asarray(q, dtype=float)[None, :]
    p = np.asarray(p, dtype=float)[None, :]
    ainv = 1.0 / np.asarray(alpha, dtype=complex)[None, :]
    ph = -0.5j * (x - q) ** 2 * ainv / hbar + 1j * p * x / hbar - 0.5j * p * q / hbar
    return np.asarray(norm, dtype=float)[None, :] * np.exp(ph)


def set_num_threads(n: int) -> None:
    """No-op: the numpy kernels are single-threaded."""
