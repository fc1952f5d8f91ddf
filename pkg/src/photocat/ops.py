"""Truncated matrix representations of displacement, squeezing, rotation and
beamsplitter operations, plus the standard single-mode state constructors."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from . import _blocks
from .fock import DEFAULT_CUTOFF, FockVector, TruncationWarning

__all__ = [
    "BeamsplitterParam",
    "MAX_SQUEEZING",
    "annihilation_matrix",
    "displacement_matrix",
    "coherent_vector",
    "squeeze_vector",
    "squeeze_matrix",
    "rotation_matrix",
    "beamsplitter_matrix",
    "displaced_fock_vector",
    "displacement_through_squeeze",
]

MAX_SQUEEZING = 2.0  # truncation fidelity degrades quickly beyond |xi| = 2


@dataclass(frozen=True)
class BeamsplitterParam:
    """Beamsplitter angle with reflection r = cos(theta), transmission t = sin(theta)."""

    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")

    @classmethod
    def from_r(cls, r: float) -> "BeamsplitterParam":
        return cls(float(np.arccos(r)))

    @classmethod
    def from_r2(cls, r2: float) -> "BeamsplitterParam":
        return cls(float(np.arccos(np.sqrt(r2))))

    @property
    def r(self) -> float:
        return float(np.cos(self.theta))

    @property
    def t(self) -> float:
        return float(np.sin(self.theta))

    @property
    def r2(self) -> float:
        return self.r**2


def annihilation_matrix(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def _tail_guard(mean_sq: float, cutoff: int, what: str, warn: bool) -> None:
    if warn and mean_sq > cutoff / 4:
        warnings.warn(
            f"{what} with |amplitude|^2 = {mean_sq:.2f} is large for cutoff "
            f"{cutoff}; expect truncation tails",
            TruncationWarning,
            stacklevel=3,
        )


def _vector_tail_guard(amps: np.ndarray, what: str, warn: bool,
                       levels: int = 5, tol: float = 1e-8) -> None:
    tail = float(np.sum(np.abs(amps[-levels:]) ** 2))
    if warn and tail >= tol:
        warnings.warn(
            f"{what} holds {tail:.2e} probability within {levels} levels of "
            f"the cutoff; raise the cutoff",
            TruncationWarning,
            stacklevel=3,
        )


def _laguerre_table_py(x: float, dim: int) -> np.ndarray:
    ks = np.arange(dim, dtype=float)
    table = np.empty((dim, dim))
    table[0] = 1.0
    if dim > 1:
        table[1] = 1.0 + ks - x
    for n in range(2, dim):
        table[n] = ((2.0 * n - 1.0 + ks - x) * table[n - 1]
                    - (n - 1.0 + ks) * table[n - 2]) / n
    return table


try:  # pragma: no cover - thin wrapper, correctness is tested via the fallback
    from numba import njit

    _laguerre_table_jit = njit(cache=True)(_laguerre_table_py)
except ImportError:  # pragma: no cover
    _laguerre_table_jit = None


def _laguerre_table(x: float, dim: int) -> np.ndarray:
    """L_n^(k)(x) for n, k in 0..dim-1 via the standard three-term recurrence."""
    if _laguerre_table_jit is not None:
        return _laguerre_table_jit(x, dim)
    return _laguerre_table_py(x, dim)


@lru_cache(maxsize=32)
def _displacement_frame(dim: int):
    idx = np.arange(dim)
    n_grid, m_grid = np.meshgrid(idx, idx, indexing="ij")
    lo = np.minimum(n_grid, m_grid)
    k = np.abs(n_grid - m_grid)
    ratio = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)))
    return lo, k, n_grid >= m_grid, ratio


def displacement_matrix(gamma: complex, cutoff: int = DEFAULT_CUTOFF, *,
                        warn_tail: bool = True) -> np.ndarray:
    """Matrix elements <n| D(gamma) |m> of exp(gamma a+ - gamma* a).

    Uses the associated-Laguerre closed form, valid for complex gamma:
    for n >= m, <n|D|m> = sqrt(m!/n!) gamma^(n-m) e^(-|gamma|^2/2) L_m^(n-m)(|gamma|^2),
    and the n < m elements follow from D(gamma)+ = D(-gamma).
    """
    gamma = complex(gamma)
    dim = cutoff + 1
    _tail_guard(abs(gamma) ** 2, cutoff, "displacement", warn_tail)
    lo, k, upper, ratio = _displacement_frame(dim)
    x = abs(gamma) ** 2
    lag = _laguerre_table(x, dim)[lo, k]
    powers = np.empty((2, dim), dtype=np.complex128)
    powers[0] = np.cumprod(np.concatenate(([1.0], np.full(dim - 1, gamma))))
    powers[1] = np.cumprod(np.concatenate(([1.0], np.full(dim - 1, -np.conj(gamma)))))
    base = np.where(upper, powers[0][k], powers[1][k])
    return (np.exp(-x / 2) * ratio) * lag * base


def coherent_vector(alpha: complex, cutoff: int = DEFAULT_CUTOFF, *,
                    warn_tail: bool = True) -> FockVector:
    """Coherent state amplitudes e^(-|alpha|^2/2) alpha^m / sqrt(m!)."""
    alpha = complex(alpha)
    m = np.arange(cutoff + 1)
    if alpha == 0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
        return FockVector(amps)
    log_mag = -abs(alpha) ** 2 / 2 + m * np.log(abs(alpha)) - 0.5 * gammaln(m + 1)
    amps = np.exp(log_mag) * np.exp(1j * m * np.angle(alpha))
    _vector_tail_guard(amps, "coherent state", warn_tail)
    return FockVector(amps)


def squeeze_vector(xi: complex, cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    """Squeezed vacuum S(xi)|0> for S(xi) = exp[(xi a+^2 - xi* a^2)/2].

    Only even levels are occupied:
    c_{2l} = (e^{i phi} tanh|xi|)^l (2l-1)!! / sqrt((2l)! cosh|xi|), with (-1)!! = 1.
    """
    xi = complex(xi)
    r = abs(xi)
    if r > MAX_SQUEEZING:
        raise ValueError(f"|xi| = {r:.3f} exceeds the supported maximum {MAX_SQUEEZING}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    if r == 0:
        amps[0] = 1.0
        return FockVector(amps)
    phase = xi / r
    ls = np.arange((cutoff // 2) + 1)
    # (2l-1)!!/sqrt((2l)!) = exp(0.5 gammaln(2l+1) - l ln 2 - gammaln(l+1))
    log_coef = 0.5 * gammaln(2 * ls + 1) - ls * np.log(2.0) - gammaln(ls + 1)
    coeffs = (phase * np.tanh(r)) ** ls * np.exp(log_coef) / np.sqrt(np.cosh(r))
    amps[2 * ls] = coeffs
    _vector_tail_guard(amps, "squeezed vacuum", warn=True)
    return FockVector(amps, normalize=True)


def squeeze_matrix(xi: complex, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """exp[(xi a+^2 - xi* a^2)/2] on the truncated space (exactly unitary)."""
    xi = complex(xi)
    if abs(xi) > MAX_SQUEEZING:
        raise ValueError(f"|xi| = {abs(xi):.3f} exceeds the supported maximum "
                         f"{MAX_SQUEEZING}")
    a = annihilation_matrix(cutoff)
    adag = a.conj().T
    gen = 0.5 * (xi * (adag @ adag) - np.conj(xi) * (a @ a))
    return expm(gen)


def rotation_matrix(theta: float, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Phase-space rotation exp(i theta n), diagonal in the number basis."""
    return np.diag(np.exp(1j * theta * np.arange(cutoff + 1)))


def beamsplitter_matrix(theta: float, cutoffs) -> np.ndarray:
    """Two-mode beamsplitter exp[theta(a b+ - a+ b)] over the joint basis.

    Photon-number conserving by construction: block diagonal over total n,
    each block exactly orthogonal.
    """
    if isinstance(cutoffs, int):
        cutoffs = (cutoffs, cutoffs)
    dim_a, dim_b = (c + 1 for c in cutoffs)
    return _blocks.beamsplitter_dense(float(theta), dim_a, dim_b)


def displaced_fock_vector(beta: complex, n: int = 1,
                          cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    """D(beta)|n>, the displaced number state."""
    return FockVector(displacement_matrix(beta, cutoff)[:, n])


def displacement_through_squeeze(beta: complex, xi: complex) -> complex:
    """zeta such that D(beta) S(xi) = S(xi) D(zeta).

    For xi = r e^{i phi}: zeta = beta cosh r - beta* e^{i phi} sinh r,
    which for real xi reduces to zeta = e^{-xi} beta on real beta.
    """
    xi = complex(xi)
    r = abs(xi)
    phase = xi / r if r else 1.0
    return complex(beta) * np.cosh(r) - np.conj(beta) * phase * np.sinh(r)
