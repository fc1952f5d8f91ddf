"""PNR-based breeding: two copies interfere on a balanced beamsplitter and a
detection on one output enlarges the state left in the other.

A relative phase R(theta) on mode a before the beamsplitter selects the
protocol family: 0 enlarges M-fold symmetric states, pi/2 produces
square-grid comb states from two-fold inputs, pi/3 hexagonal combs from
three-fold inputs.  A homodyne projection path is provided for comparison.

The balanced beamsplitter is oriented so that matched displacements on the
two inputs combine into the kept mode a, i.e. U D_a(beta) D_b(beta) U+ =
D_a(sqrt(2) beta): that orientation is what makes a zero-photon detection on
mode b enlarge the state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _blocks
from .fock import (
    PROB_FLOOR,
    DensityOperator,
    FockVector,
    ImpossibleOutcomeError,
)
from .targets import ssv_vector
from .wigner import hermite_basis

__all__ = [
    "BALANCED_THETA",
    "BreedConfig",
    "breed",
    "breed_hex",
    "breed_outcome_distribution",
    "breed_sweep",
    "homodyne_project",
    "write_sweep_csv",
]

BALANCED_THETA = -np.pi / 4  # sign picked so matched displacements add in mode a


@dataclass(frozen=True)
class BreedConfig:
    """Breeding stage: phase on mode a, then the balanced beamsplitter, then
    either a PNR detection (n_detect) or a homodyne projection on mode b."""

    phase: float = 0.0
    n_detect: int | None = 0
    homodyne: tuple[str, float] | None = None

    def __post_init__(self):
        if (self.n_detect is None) == (self.homodyne is None):
            raise ValueError("configure exactly one of n_detect or homodyne")
        if self.homodyne is not None and self.homodyne[0] not in ("q", "p"):
            raise ValueError("homodyne quadrature must be 'q' or 'p'")
        if self.n_detect is not None and self.n_detect < 0:
            raise ValueError("n_detect must be >= 0")


def _phase_vector(amps: np.ndarray, phase: float) -> np.ndarray:
    return amps * np.exp(1j * phase * np.arange(amps.size))


def _homodyne_row(kind: str, value: float, dim: int) -> np.ndarray:
    """Coefficients <x|k> (or <p|k>) of the quadrature bra in the Fock basis."""
    phis = hermite_basis(np.array([value]), dim)[:, 0]
    if kind == "q":
        return phis.astype(np.complex128)
    return phis * (1j) ** np.arange(dim)


def breed(a, b, cfg: BreedConfig, *, prob_floor: float = PROB_FLOOR):
    """Interfere two single-mode states and condition on the mode-b outcome.

    Returns (normalized state of mode a, probability); for homodyne
    projections the second element is a probability density.
    """
    for state in (a, b):
        if state.n_modes != 1:
            raise ValueError("breeding inputs must be single-mode")
    if a.mode_dims != b.mode_dims:
        raise ValueError("breeding inputs need matching cutoffs")
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        branches = [(1.0, a.amplitudes, b.amplitudes)]
    else:
        branches = [
            (wa * wb, va, vb)
            for wa, va in _branches(a)
            for wb, vb in _branches(b)
        ]
    dim = a.mode_dims[0]
    pure = len(branches) == 1
    if cfg.n_detect is not None and cfg.n_detect >= dim:
        raise ValueError("n_detect exceeds the input cutoff")
    row = None
    if cfg.homodyne is not None:
        row = _homodyne_row(cfg.homodyne[0], cfg.homodyne[1], dim)
    acc_vec = None
    acc_mat = None if pure else np.zeros((dim, dim), dtype=np.complex128)
    for weight, va, vb in branches:
        joint = np.outer(_phase_vector(va, cfg.phase), vb)
        evolved = _blocks.apply_beamsplitter(joint, BALANCED_THETA)
        if cfg.n_detect is not None:
            vec = evolved[:, cfg.n_detect]
        else:
            vec = evolved @ row
        if pure:
            acc_vec = vec
        else:
            acc_mat += weight * np.outer(vec, vec.conj())
    if pure:
        prob = float(np.vdot(acc_vec, acc_vec).real)
        if prob < prob_floor:
            raise ImpossibleOutcomeError(
                f"breeding outcome has probability {prob:.3e}")
        return FockVector(acc_vec / np.sqrt(prob)), prob
    prob = float(np.trace(acc_mat).real)
    if prob < prob_floor:
        raise ImpossibleOutcomeError(f"breeding outcome has probability {prob:.3e}")
    return DensityOperator(acc_mat / prob, validate=False), prob


def _branches(state):
    if isinstance(state, FockVector):
        return [(1.0, state.amplitudes)]
    eigs, vecs = np.linalg.eigh(state.matrix)
    return [(float(w), vecs[:, i]) for i, w in enumerate(eigs) if w > 1e-14]


def breed_hex(a, b, n_detect: int, *, prob_floor: float = PROB_FLOOR):
    """Breed three-fold symmetric inputs with the pi/3 relative phase."""
    cfg = BreedConfig(phase=np.pi / 3, n_detect=n_detect)
    return breed(a, b, cfg, prob_floor=prob_floor)


def breed_outcome_distribution(a, b, phase: float = 0.0) -> np.ndarray:
    """PNR outcome probabilities on mode b after the breeding beamsplitter."""
    if not (isinstance(a, FockVector) and isinstance(b, FockVector)):
        raise TypeError("outcome distribution expects pure inputs")
    joint = np.outer(_phase_vector(a.amplitudes, phase), b.amplitudes)
    evolved = _blocks.apply_beamsplitter(joint, BALANCED_THETA)
    return (np.abs(evolved) ** 2).sum(axis=0)


def homodyne_project(joint, mode: int, quadrature: str, value: float, *,
                     prob_floor: float = PROB_FLOOR):
    """Project one mode of a joint state onto a quadrature eigenstate.

    Returns (normalized remaining state, probability density at `value`).
    """
    if quadrature not in ("q", "p"):
        raise ValueError("quadrature must be 'q' or 'p'")
    if not 0 <= mode < joint.n_modes or joint.n_modes < 2:
        raise ValueError("homodyne projection needs a joint state and valid mode")
    dim = joint.mode_dims[mode]
    row = _homodyne_row(quadrature, value, dim)
    kept = tuple(d for i, d in enumerate(joint.mode_dims) if i != mode)
    if isinstance(joint, FockVector):
        vec = np.tensordot(row, joint.amplitudes, axes=([0], [mode]))
        density = float(np.vdot(vec, vec).real)
        if density < prob_floor:
            raise ImpossibleOutcomeError(
                f"vanishing homodyne density at {quadrature}={value}")
        return FockVector(vec / np.sqrt(density), kept), density
    k = joint.n_modes
    tens = joint.matrix.reshape(joint.mode_dims + joint.mode_dims)
    tens = np.tensordot(row, tens, axes=([0], [mode]))
    tens = np.tensordot(row.conj(), tens, axes=([0], [mode + k - 1]))
    kept_dim = int(np.prod(kept))
    mat = tens.reshape(kept_dim, kept_dim)
    density = float(np.trace(mat).real)
    if density < prob_floor:
        raise ImpossibleOutcomeError(
            f"vanishing homodyne density at {quadrature}={value}")
    return DensityOperator(mat / density, kept, validate=False), density


def breed_sweep(m_fold: int, betas, xis, cutoff: int, *, phase: float = 0.0,
                n_detect: int = 0):
    """Breed two identical M-fold states per (beta, xi) grid point and score
    the output against the sqrt(2)-enlarged target.

    Returns (fidelities, probabilities) arrays of shape (len(betas), len(xis)).
    """
    betas = np.asarray(betas, dtype=float)
    xis = np.asarray(xis, dtype=float)
    fids = np.zeros((betas.size, xis.size))
    probs = np.zeros_like(fids)
    cfg = BreedConfig(phase=phase, n_detect=n_detect)
    for i, beta in enumerate(betas):
        for j, xi in enumerate(xis):
            seed = ssv_vector(m_fold, beta, xi, cutoff)
            target = ssv_vector(m_fold, np.sqrt(2.0) * beta, xi, cutoff)
            out, prob = breed(seed, seed, cfg)
            fids[i, j] = abs(out.overlap(target)) ** 2
            probs[i, j] = prob
    return fids, probs


def write_sweep_csv(path: str, betas, xis, fidelities, probabilities) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "xi", "fidelity", "probability"])
        for i, beta in enumerate(betas):
            for j, xi in enumerate(xis):
                writer.writerow([repr(float(beta)), repr(float(xi)),
                                 repr(float(fidelities[i, j])),
                                 repr(float(probabilities[i, j]))])
