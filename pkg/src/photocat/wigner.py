"""Wigner functions on phase-space grids and negativity metrics.

Same quadrature convention as the rest of the package: q = (a + a+)/sqrt(2),
normalization such that the Wigner function integrates to one; the vacuum
peaks at 1/pi and a single photon dips to -1/pi at the origin.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import DensityOperator, FockVector

__all__ = [
    "PhaseGrid",
    "WignerGridError",
    "wigner_grid",
    "wigner_point",
    "negativity",
    "hermite_basis",
    "write_grid_csv",
    "read_grid_csv",
]

DEFAULT_RANGE = (-7.0, 7.0)
DEFAULT_POINTS = 281
NORMALIZATION_TOL = 0.01
CONVENTION_TAG = "q=(a+adag)/sqrt2, integral of W over dq dp = 1"


class WignerGridError(RuntimeError):
    """The grid fails to contain the state (normalization check failed)."""


@dataclass(frozen=True)
class PhaseGrid:
    q: np.ndarray
    p: np.ndarray
    values: np.ndarray  # real, shape (len(q), len(p))

    @property
    def dq(self) -> float:
        return float(self.q[1] - self.q[0]) if self.q.size > 1 else 0.0

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0]) if self.p.size > 1 else 0.0

    def volume(self) -> float:
        return float(self.values.sum() * self.dq * self.dp)

    def metadata(self) -> dict:
        return {
            "q_range": [float(self.q[0]), float(self.q[-1])],
            "p_range": [float(self.p[0]), float(self.p[-1])],
            "shape": list(self.values.shape),
            "convention": CONVENTION_TAG,
        }


def _density_matrix(state) -> np.ndarray:
    if isinstance(state, FockVector):
        if state.n_modes != 1:
            raise ValueError("wigner_grid expects a single-mode state")
        return np.outer(state.amplitudes, state.amplitudes.conj())
    if isinstance(state, DensityOperator):
        if state.n_modes != 1:
            raise ValueError("wigner_grid expects a single-mode state")
        return state.matrix
    raise TypeError(f"unsupported state type {type(state)!r}")


def _wigner_values(rho: np.ndarray, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Fock-basis Wigner sum over matrix diagonals with a Laguerre recurrence."""
    dim = rho.shape[0]
    qq, pp = np.meshgrid(q, p, indexing="ij")
    arg = 2.0 * (qq**2 + pp**2)
    zbar = np.sqrt(2.0) * (qq - 1j * pp)
    total = np.zeros_like(arg, dtype=np.complex128)
    zbar_pow = np.ones_like(zbar)
    signs = (-1.0) ** np.arange(dim)
    for k in range(dim):
        diag = np.diag(rho, -k)  # rho[n + k, n]
        if np.any(diag):
            coef = diag * signs[: dim - k] * np.exp(
                0.5 * (gammaln(np.arange(dim - k) + 1)
                       - gammaln(np.arange(dim - k) + k + 1)))
            acc = np.zeros_like(arg, dtype=np.complex128)
            lag_nm2 = lag_nm1 = None
            for n_idx in range(dim - k):
                if n_idx == 0:
                    lag = np.ones_like(arg)
                elif n_idx == 1:
                    lag = 1.0 + k - arg
                else:
                    lag = ((2.0 * n_idx - 1.0 + k - arg) * lag_nm1
                           - (n_idx - 1.0 + k) * lag_nm2) / n_idx
                if coef[n_idx] != 0:
                    acc += coef[n_idx] * lag
                lag_nm2, lag_nm1 = lag_nm1, lag
            term = acc * zbar_pow
            total += term if k == 0 else 2.0 * term
        zbar_pow = zbar_pow * zbar
    return total.real * np.exp(-(qq**2 + pp**2)) / np.pi


def wigner_grid(state, q_range=DEFAULT_RANGE, p_range=DEFAULT_RANGE,
                points: int = DEFAULT_POINTS, *, validate: bool = True) -> PhaseGrid:
    """Evaluate the Wigner function on a uniform grid.

    Raises WignerGridError when the Riemann sum misses unity by more than 1%,
    which indicates the grid does not contain the state.
    """
    rho = _density_matrix(state)
    q = np.linspace(q_range[0], q_range[1], points)
    p = np.linspace(p_range[0], p_range[1], points)
    values = _wigner_values(rho, q, p)
    grid = PhaseGrid(q, p, values)
    if validate:
        vol = grid.volume()
        if abs(vol - 1.0) > NORMALIZATION_TOL:
            raise WignerGridError(
                f"Wigner volume {vol:.4f} deviates from 1 by more than "
                f"{NORMALIZATION_TOL}; enlarge the grid")
    return grid


def wigner_point(state, q: float, p: float) -> float:
    """Wigner function at a single phase-space point."""
    rho = _density_matrix(state)
    return float(_wigner_values(rho, np.array([q]), np.array([p]))[0, 0])


def negativity(state, q_range=DEFAULT_RANGE, p_range=DEFAULT_RANGE,
               points: int = DEFAULT_POINTS):
    """(minimum Wigner value, integrated negative volume) over the grid."""
    grid = wigner_grid(state, q_range, p_range, points)
    negative = np.minimum(grid.values, 0.0)
    return float(grid.values.min()), float(-negative.sum() * grid.dq * grid.dp)


def hermite_basis(values, dim: int) -> np.ndarray:
    """Position wavefunctions phi_n(x) of |0>..|dim-1|, shape (dim, len(x)).

    Uses the stable normalized recurrence phi_n = sqrt(2/n) x phi_{n-1}
    - sqrt((n-1)/n) phi_{n-2}; <x|n> = phi_n(x) under the module convention.
    """
    x = np.atleast_1d(np.asarray(values, dtype=float))
    out = np.zeros((dim, x.size))
    out[0] = np.pi**-0.25 * np.exp(-(x**2) / 2.0)
    if dim > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, dim):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] \
            - np.sqrt((n - 1.0) / n) * out[n - 2]
    return out


def write_grid_csv(path: str, grid: PhaseGrid) -> None:
    """Row-major CSV export with header q,p,W."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "p", "W"])
        for i, qv in enumerate(grid.q):
            for j, pv in enumerate(grid.p):
                writer.writerow([repr(float(qv)), repr(float(pv)),
                                 repr(float(grid.values[i, j]))])


def read_grid_csv(path: str) -> PhaseGrid:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["q", "p", "W"]:
            raise ValueError(f"unexpected grid CSV header {header}")
        rows = [(float(a), float(b), float(c)) for a, b, c in reader]
    q = np.array(sorted({r[0] for r in rows}))
    p = np.array(sorted({r[1] for r in rows}))
    values = np.array([r[2] for r in rows]).reshape(q.size, p.size)
    return PhaseGrid(q, p, values)
