"""Target-state constructors: cat states, M-fold superpositions of squeezed
vacuum, square/hex grid code states, and the analytic catalysis-vs-SSV
fidelity.

Quadrature convention, fixed package-wide: q = (a + a+)/sqrt(2),
p = (a - a+)/(i sqrt(2)), so exp(-i p s) shifts q by s and D(gamma) moves the
phase-space mean to (sqrt(2) Re gamma, sqrt(2) Im gamma).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import gammaln

from .catalysis import closed_form_amplitudes
from .fock import (
    DEFAULT_CUTOFF,
    PROB_FLOOR,
    DensityOperator,
    FockVector,
    ImpossibleOutcomeError,
    TruncationError,
    fidelity,
)
from .ops import coherent_vector, displacement_matrix, squeeze_vector

__all__ = [
    "TargetSpec",
    "scs_vector",
    "ssv_vector",
    "squeezing_db",
    "equivalent_cat",
    "gkp_square",
    "gkp_hex",
    "ssv_fidelity_analytic",
]

_WINDOW_FID_TOL = 1e-8


def _parity_sign(parity) -> int:
    if parity in ("+", 1, +1):
        return 1
    if parity in ("-", -1):
        return -1
    raise ValueError(f"parity must be '+' or '-', got {parity!r}")


def scs_vector(zeta: complex, parity, cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    """Cat state N(|zeta> + parity |-zeta>); odd cats hold only odd levels."""
    sign = _parity_sign(parity)
    zeta = complex(zeta)
    if sign < 0 and abs(zeta) ** 2 < PROB_FLOOR:
        raise ValueError("odd cat with zeta = 0 is the zero vector")
    amps = coherent_vector(zeta, cutoff).amplitudes \
        + sign * coherent_vector(-zeta, cutoff).amplitudes
    return FockVector(amps, normalize=True)


def ssv_vector(m_fold: int, beta: complex, xi: complex,
               cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    """M-fold symmetric superposition of displaced squeezed vacua.

    sum_n D(beta e^{2 pi i n/M}) S(xi e^{4 pi i n/M}) |0>, normalized.  Each
    squeezer anti-squeezes perpendicular to its displacement axis; the result
    is invariant under a 2 pi / M phase-space rotation.
    """
    if m_fold < 2:
        raise ValueError("m_fold must be >= 2")
    amps = np.zeros(cutoff + 1, dtype=np.complex128)
    for n in range(m_fold):
        disp = np.exp(2j * np.pi * n / m_fold)
        sq = squeeze_vector(complex(xi) * disp**2, cutoff).amplitudes
        amps += displacement_matrix(complex(beta) * disp, cutoff,
                                    warn_tail=False) @ sq
    nrm = np.linalg.norm(amps)
    if nrm < 1e-10:
        raise ValueError("superposition components cancel (degenerate state)")
    return FockVector(amps / nrm)


def squeezing_db(xi: float) -> float:
    """Squeezing parameter in decibels: 10 log10(e^{2|xi|})."""
    return float(10.0 * np.log10(np.exp(2.0 * abs(xi))))


def equivalent_cat(beta: float, xi: float) -> float:
    """Cat amplitude zeta = e^{-xi} beta of the squeezed cat equal to a
    two-fold SSV with displacement beta and squeezing xi (real xi)."""
    return float(np.exp(-float(xi)) * float(beta))


# ---------------------------------------------------------------------------
# grid code states


def _grid_state(generators, mu: int, d: int, width: float, cutoff: int) -> FockVector:
    # size the window so the first excluded shell's damping weight
    # exp(-|g|^2 (1 - e^{-2 width^2})/2) sits below ~1e-15
    damp_sq = 1.0 - np.exp(-2.0 * width**2)
    step = min(abs(generators[0]) * d, abs(generators[1]))
    window = int(np.ceil(np.sqrt(68.0 / damp_sq) / step))
    built = _grid_sum(generators, mu, d, width, cutoff, window + 1)
    check = _grid_sum(generators, mu, d, width, cutoff, window)
    if 1.0 - fidelity(built, check) > _WINDOW_FID_TOL:
        raise TruncationError(
            f"grid-state window not converged at width={width}, cutoff={cutoff}")
    return built


def _grid_sum(generators, mu: int, d: int, width: float, cutoff: int,
              window: int) -> FockVector:
    gen1, gen2 = generators
    damp = np.exp(-width**2)
    amps = np.zeros(cutoff + 1, dtype=np.complex128)
    for n1 in range(-window, window + 1):
        g1 = gen1 * (d * n1 + mu)
        for n2 in range(-window, window + 1):
            g2 = gen2 * n2
            phase = np.exp(1j * np.imag(g1 * np.conj(g2)))
            g = g1 + g2
            # e^{-width^2 n} |g> = weight |g damp| with the exact weight below
            weight = np.exp(-abs(g) ** 2 * (1.0 - damp**2) / 2.0)
            if weight < 1e-14:
                continue
            amps += (phase * weight) * coherent_vector(
                g * damp, cutoff, warn_tail=False).amplitudes
    nrm = np.linalg.norm(amps)
    if nrm**2 < PROB_FLOOR:
        raise TruncationError("grid-state sum vanished; widen cutoff or window")
    return FockVector(amps / nrm)


def _square_generators(d: int):
    unit = np.sqrt(2.0 * np.pi / d)
    # e^{-i p s} -> D(s/sqrt(2)); e^{i q u} -> D(i u / sqrt(2))
    return unit / np.sqrt(2.0), 1j * unit / np.sqrt(2.0)


def _hex_generators(d: int):
    unit = np.sqrt(4.0 * np.pi / (d * np.sqrt(3.0)))
    # e^{-(i/2)(q + sqrt(3) p) s} -> D(-s (sqrt(3) + i) / (2 sqrt(2)))
    return -unit * (np.sqrt(3.0) + 1j) / (2.0 * np.sqrt(2.0)), \
        1j * unit / np.sqrt(2.0)


def _gkp(generators, d: int, mu, width: float, cutoff: int):
    if d < 1:
        raise ValueError("code dimension d must be >= 1")
    if not 0.1 < width < 1.5:
        raise ValueError(f"peak width must lie in (0.1, 1.5), got {width}")
    if mu == "mix":
        dim = cutoff + 1
        mat = np.zeros((dim, dim), dtype=np.complex128)
        for mu_i in range(d):
            vec = _grid_state(generators, mu_i, d, width, cutoff)
            mat += np.outer(vec.amplitudes, vec.amplitudes.conj()) / d
        return DensityOperator(mat, validate=False)
    if mu == "sum":
        amps = np.zeros(cutoff + 1, dtype=np.complex128)
        for mu_i in range(d):
            amps += _grid_state(generators, mu_i, d, width, cutoff).amplitudes
        return FockVector(amps, normalize=True)
    mu = int(mu)
    if not 0 <= mu < d:
        raise ValueError(f"mu must lie in 0..{d - 1}, 'mix' or 'sum', got {mu}")
    return _grid_state(generators, mu, d, width, cutoff)


def gkp_square(d: int, mu, width: float, cutoff: int = DEFAULT_CUTOFF):
    """Finite-energy square-lattice grid code state.

    mu selects the code state (0..d-1), "mix" for the equal statistical
    mixture over the code space or "sum" for the equal coherent superposition;
    width is the Gaussian peak parameter applied as e^{-width^2 n} before
    normalization.  d = 1 gives the qubit-less single-lattice grid state.
    """
    return _gkp(_square_generators(d), d, mu, width, cutoff)


def gkp_hex(d: int, mu, width: float, cutoff: int = DEFAULT_CUTOFF):
    """Finite-energy hexagonal-lattice grid code state (see gkp_square)."""
    return _gkp(_hex_generators(d), d, mu, width, cutoff)


# ---------------------------------------------------------------------------
# analytic catalysis-vs-SSV fidelity


def ssv_fidelity_analytic(alpha: float, steps, beta: float, xi: float,
                          delta: float = 0.0, parity="+",
                          cutoff: int = DEFAULT_CUTOFF) -> float:
    """Fidelity of an ideal catalysis cascade on |alpha> with the two-fold SSV
    target after displacing the output back by delta.

    Evaluated as a double sum over squeezed-vacuum levels and cascade output
    levels through displaced-Fock overlap coefficients; all parameters real.
    """
    for value, name in ((alpha, "alpha"), (beta, "beta"), (xi, "xi"),
                        (delta, "delta")):
        if abs(complex(value).imag) > 0:
            raise ValueError(f"{name} must be real for the analytic fidelity")
    alpha, beta, xi, delta = (float(np.real(v)) for v in (alpha, beta, xi, delta))
    sign = _parity_sign(parity)
    psi = coherent_vector(alpha, cutoff, warn_tail=False).amplitudes
    amps_full = closed_form_amplitudes(psi, steps)
    norm_sq = float(np.vdot(amps_full, amps_full).real)
    if norm_sq < PROB_FLOOR:
        raise ImpossibleOutcomeError("cascade output has vanishing probability")
    amps = amps_full[: cutoff + 1]

    ls = np.arange(cutoff // 2 + 1)
    log_coef = 0.5 * gammaln(2 * ls + 1) - ls * np.log(2.0) - gammaln(ls + 1)
    sq_coeffs = np.tanh(xi) ** ls * np.exp(log_coef)

    rows_minus = displacement_matrix(-beta - delta, cutoff, warn_tail=False)[::2]
    rows_plus = displacement_matrix(beta - delta, cutoff, warn_tail=False)[::2]
    bracket = rows_minus @ amps + sign * (rows_plus @ amps)
    terms = sq_coeffs * bracket
    series = complex(terms.sum())
    norm_target_sq = 2.0 + sign * 2.0 * np.exp(-2.0 * beta**2 * np.exp(-2.0 * xi))
    scale = norm_target_sq * np.cosh(xi) * norm_sq

    # dropped-level estimate: squeezed-vacuum coefficients shrink by less than
    # q = |tanh xi| per level and the overlap rows decay once past the state
    # support, so extrapolate geometrically from the last observed brackets
    q = abs(np.tanh(xi))
    if q > 0 and ls.size >= 3:
        edge = float(np.max(np.abs(bracket[-3:])))
        tail = edge * abs(sq_coeffs[-1]) * q / (1.0 - q)
        if (2.0 * abs(series) + tail) * tail / scale > 1e-9:
            raise TruncationError(
                "squeezed-vacuum series not converged at this cutoff")

    value = abs(series) ** 2 / scale
    return float(min(value, 1.0))


# ---------------------------------------------------------------------------
# serializable target description


@dataclass(frozen=True)
class TargetSpec:
    """Tagged target-state description, serializable into run manifests.

    kind: "displaced_fock" | "scs" | "ssv" | "gkp".  `restore` is an optional
    displacement applied to the built state (the catalysis output is compared
    against D(restore) |target>).
    """

    kind: str
    beta: float = 0.0
    n: int = 1
    zeta: float = 0.0
    parity: str = "+"
    m_fold: int = 2
    xi: float = 0.0
    lattice: str = "square"
    dim_code: int = 2
    mu: int | str = 0
    width: float = 0.5
    restore: float = 0.0

    def __post_init__(self):
        if self.kind not in ("displaced_fock", "scs", "ssv", "gkp"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.kind == "ssv" and self.m_fold < 2:
            raise ValueError("ssv targets need m_fold >= 2")
        if self.kind == "gkp":
            if self.lattice not in ("square", "hex"):
                raise ValueError(f"unknown lattice {self.lattice!r}")
            if self.dim_code < 2:
                raise ValueError("gkp targets need dim_code >= 2")
            if self.width <= 0:
                raise ValueError("gkp targets need width > 0")
        if self.kind == "scs":
            _parity_sign(self.parity)

    def build(self, cutoff: int = DEFAULT_CUTOFF):
        if self.kind == "displaced_fock":
            from .ops import displaced_fock_vector

            state = displaced_fock_vector(self.beta, self.n, cutoff)
        elif self.kind == "scs":
            state = scs_vector(self.zeta, self.parity, cutoff)
        elif self.kind == "ssv":
            state = ssv_vector(self.m_fold, self.beta, self.xi, cutoff)
        else:
            builder = gkp_square if self.lattice == "square" else gkp_hex
            state = builder(self.dim_code, self.mu, self.width, cutoff)
        if self.restore:
            disp = displacement_matrix(self.restore, cutoff, warn_tail=False)
            if isinstance(state, FockVector):
                state = FockVector(disp @ state.amplitudes)
            else:
                state = DensityOperator(disp @ state.matrix @ disp.conj().T,
                                        validate=False)
        return state

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: dict) -> "TargetSpec":
        return cls(**record)
