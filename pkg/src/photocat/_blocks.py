"""Photon-number-block decomposition of two-mode beamsplitter unitaries.

exp[theta (a b+ - a+ b)] conserves total photon number, so it acts as a finite
orthogonal matrix on each subspace spanned by {|T-k, k>}.  Exponentiating those
blocks directly keeps the truncated operator exactly unitary and avoids ever
materializing a dense joint-space matrix.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import expm


@lru_cache(maxsize=256)
def beamsplitter_blocks(theta: float, dim_a: int, dim_b: int):
    """Blocks B_T with B_T[k', k] = <T-k', k'| exp[theta(ab+ - a+b)] |T-k, k>.

    Returns a tuple of (ms, ks, block) per total photon number T, where ms/ks
    are the mode occupations addressed by the block rows/columns.
    """
    out = []
    for total in range(dim_a + dim_b - 1):
        k_lo = max(0, total - dim_a + 1)
        k_hi = min(total, dim_b - 1)
        ks = np.arange(k_lo, k_hi + 1)
        ms = total - ks
        size = ks.size
        if size == 1:
            block = np.ones((1, 1))
        else:
            # a b+ maps (m, k) -> (m-1, k+1) with amplitude sqrt(m (k+1))
            gen = np.zeros((size, size))
            amp = theta * np.sqrt(ms[:-1] * (ks[:-1] + 1.0))
            idx = np.arange(size - 1)
            gen[idx + 1, idx] = amp
            gen[idx, idx + 1] = -amp
            block = expm(gen)
        out.append((ms, ks, block))
    return tuple(out)


def apply_beamsplitter(amplitudes: np.ndarray, theta: float) -> np.ndarray:
    """Apply the two-mode beamsplitter to a joint amplitude array (dim_a, dim_b)."""
    dim_a, dim_b = amplitudes.shape
    out = np.empty_like(amplitudes)
    for ms, ks, block in beamsplitter_blocks(float(theta), dim_a, dim_b):
        out[ms, ks] = block @ amplitudes[ms, ks]
    return out


def beamsplitter_dense(theta: float, dim_a: int, dim_b: int) -> np.ndarray:
    """Dense (dim_a*dim_b)^2 matrix of the beamsplitter, row-major joint index."""
    dim = dim_a * dim_b
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for ms, ks, block in beamsplitter_blocks(float(theta), dim_a, dim_b):
        flat = ms * dim_b + ks
        mat[np.ix_(flat, flat)] = block
    return mat


def _loss_angle(eta: float) -> float:
    # amplitude transmission sqrt(eta) so a single photon survives w.p. eta
    return float(np.arccos(np.sqrt(eta)))


@lru_cache(maxsize=256)
def loss_kraus(eta: float, dim: int):
    """Kraus operators K_j (j photons lost) of the eta-transmission loss channel.

    Sliced out of the loss beamsplitter against a vacuum ancilla, so the channel
    is exactly trace preserving on the truncated space.
    """
    blocks = beamsplitter_blocks(_loss_angle(eta), dim, dim)
    ops = []
    for lost in range(dim):
        op = np.zeros((dim, dim))
        for kept in range(dim - lost):
            total = kept + lost
            ms, ks, block = blocks[total]
            op[kept, total] = block[lost - ks[0], 0 - ks[0]]
        ops.append(op)
    return tuple(ops)


@lru_cache(maxsize=256)
def lossy_pnr_diagonal(n: int, eta: float, dim: int) -> np.ndarray:
    """Diagonal POVM weights e_j for detecting n clicks behind efficiency eta.

    e_j = |<n, j-n| U_loss |j, 0>|^2; the detection sees j true photons.
    """
    if eta == 1.0:
        diag = np.zeros(dim)
        if n < dim:
            diag[n] = 1.0
        return diag
    blocks = beamsplitter_blocks(_loss_angle(eta), dim, dim)
    diag = np.zeros(dim)
    for j in range(n, dim):
        ms, ks, block = blocks[j]
        diag[j] = block[(j - n) - ks[0], 0 - ks[0]] ** 2
    return diag
