"""Single-step and cascaded photon catalysis.

One step interferes the input with a single-photon ancilla on a variable
beamsplitter and post-selects an n-photon PNR detection on the interfered
input port; the ancilla port carries the engineered output.  Ideal pure-state
steps run as amplitude arrays; detector inefficiency or an impure ancilla
switches the whole pipeline to density operators (never to sampling).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _blocks
from .fock import (
    DEFAULT_CUTOFF,
    PROB_FLOOR,
    DensityOperator,
    FockVector,
    ImpossibleOutcomeError,
)
from .ops import coherent_vector, displaced_fock_vector

__all__ = [
    "CatalysisStep",
    "CascadeResult",
    "fock_filter_step",
    "catalyze_step",
    "cascade",
    "cascaded_closed_form",
    "closed_form_amplitudes",
    "cascade_success_prob",
    "displaced_photon_fidelity",
    "paris_displacement_mixture",
    "lossy_optimal_params",
    "steps_from_descriptor",
    "experiment_from_dict",
]

JOINT_MARGIN = 5  # extra joint-space levels beyond input cutoff + n_detect


@dataclass(frozen=True)
class CatalysisStep:
    """One interference + detection stage.

    theta parametrizes the beamsplitter (r = cos theta, t = sin theta),
    n_detect is the post-selected PNR outcome, eta the detector efficiency and
    gamma_purity the single-photon weight of the ancilla
    (rho = gamma |1><1| + (1 - gamma) |0><0|).
    """

    theta: float
    n_detect: int
    eta: float = 1.0
    gamma_purity: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.theta < np.pi / 2:
            raise ValueError(f"theta must lie strictly inside (0, pi/2), got {self.theta}")
        if self.n_detect < 0:
            raise ValueError("n_detect must be >= 0")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0.0 <= self.gamma_purity <= 1.0:
            raise ValueError(f"gamma_purity must lie in [0, 1], got {self.gamma_purity}")

    @classmethod
    def from_r2(cls, r2: float, n_detect: int, eta: float = 1.0,
                gamma_purity: float = 1.0) -> "CatalysisStep":
        return cls(float(np.arccos(np.sqrt(r2))), n_detect, eta, gamma_purity)

    @classmethod
    def from_r(cls, r: float, n_detect: int, eta: float = 1.0,
               gamma_purity: float = 1.0) -> "CatalysisStep":
        return cls(float(np.arccos(r)), n_detect, eta, gamma_purity)

    @property
    def r(self) -> float:
        return float(np.cos(self.theta))

    @property
    def t(self) -> float:
        return float(np.sin(self.theta))

    @property
    def r2(self) -> float:
        return self.r**2

    @property
    def ideal(self) -> bool:
        return self.eta == 1.0 and self.gamma_purity == 1.0


@dataclass(frozen=True)
class CascadeResult:
    state: FockVector | DensityOperator
    probability: float
    step_probabilities: tuple[float, ...]


def fock_filter_step(q: int) -> CatalysisStep:
    """Step that removes the q-photon amplitude: n = 1 detection at r^2 = 1/(q+1)."""
    if q < 1:
        raise ValueError("fock filter needs q >= 1")
    return CatalysisStep.from_r2(1.0 / (q + 1), 1)


def catalyze_step(state, step: CatalysisStep, *, margin: int = JOINT_MARGIN,
                  prob_floor: float = PROB_FLOOR):
    """Run one catalysis step; returns (normalized output state, probability).

    The joint space uses per-mode dimension input + n_detect + margin and the
    output is re-truncated to the input cutoff afterwards.
    """
    if state.n_modes != 1:
        raise ValueError("catalysis input must be single-mode")
    dim = state.mode_dims[0]
    dim_joint = dim + step.n_detect + margin
    if isinstance(state, FockVector) and step.ideal:
        out, prob = _pure_step(state.amplitudes, step, dim_joint)
        _check_outcome(prob, step, prob_floor)
        return FockVector(out[:dim], normalize=True), prob

    if isinstance(state, FockVector):
        weights, vectors = np.array([1.0]), state.amplitudes[:, None]
    else:
        eigs, vecs = np.linalg.eigh(state.matrix)
        keep = eigs > 1e-14
        weights, vectors = eigs[keep], vecs[:, keep]
    branches = [(step.gamma_purity, 1), (1.0 - step.gamma_purity, 0)]
    povm = _blocks.lossy_pnr_diagonal(step.n_detect, float(step.eta), dim_joint)
    rho_out = np.zeros((dim_joint, dim_joint), dtype=np.complex128)
    for anc_weight, anc_n in branches:
        if anc_weight == 0.0:
            continue
        for w, vec in zip(weights, vectors.T):
            joint = np.zeros((dim_joint, dim_joint), dtype=np.complex128)
            joint[:dim, anc_n] = vec
            evolved = _blocks.apply_beamsplitter(joint, step.theta)
            weighted = evolved * np.sqrt(povm)[:, None]
            rho_out += (anc_weight * w) * (weighted.T @ weighted.conj())
    prob = float(np.trace(rho_out).real)
    _check_outcome(prob, step, prob_floor)
    reduced = rho_out[:dim, :dim]
    return DensityOperator(reduced / np.trace(reduced).real, validate=False), prob


def _pure_step(amps: np.ndarray, step: CatalysisStep, dim_joint: int):
    joint = np.zeros((dim_joint, dim_joint), dtype=np.complex128)
    joint[: amps.size, 1] = amps
    evolved = _blocks.apply_beamsplitter(joint, step.theta)
    projected = evolved[step.n_detect, :]
    prob = float(np.vdot(projected, projected).real)
    return projected, prob


def _check_outcome(prob: float, step: CatalysisStep, prob_floor: float) -> None:
    if prob < prob_floor:
        raise ImpossibleOutcomeError(
            f"detection n={step.n_detect} has probability {prob:.3e}")


def cascade(state, steps, *, margin: int = JOINT_MARGIN) -> CascadeResult:
    """Sequential catalysis; total probability is the product of the per-step
    conditional probabilities."""
    if not steps:
        raise ValueError("cascade needs at least one step")
    probs = []
    current = state
    for i, step in enumerate(steps):
        try:
            current, p = catalyze_step(current, step, margin=margin)
        except ImpossibleOutcomeError as exc:
            raise ImpossibleOutcomeError(f"step {i}: {exc}") from exc
        probs.append(p)
    return CascadeResult(current, float(np.prod(probs)), tuple(probs))


def closed_form_amplitudes(psi, steps, out_dim: int | None = None) -> np.ndarray:
    """Unnormalized output amplitudes of an ideal cascade, evaluated directly
    from the product formula (no joint spaces).

    psi is the input amplitude list; detections are indexed in application
    order (step 1 first).  Squared norm of the result is the success
    probability of the detection tuple.
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    for step in steps:
        if not step.ideal:
            raise ValueError("closed form only covers ideal steps")
    n_steps = len(steps)
    if n_steps == 0:
        if out_dim is None or out_dim == psi.size:
            return psi.copy()
        out = np.zeros(out_dim, dtype=np.complex128)
        out[: min(out_dim, psi.size)] = psi[:out_dim]
        return out
    ns = np.array([s.n_detect for s in steps])
    rs = np.array([s.r for s in steps])
    ts = np.array([s.t for s in steps])
    total_n = int(ns.sum())
    if out_dim is None:
        out_dim = psi.size + n_steps
    # photons already removed downstream of step i when it acts on level m
    shift_after = np.concatenate([np.cumsum((ns - 1)[::-1])[::-1][1:], [0]])
    m = np.arange(out_dim)
    src = m - n_steps + total_n
    valid = (src >= 0) & (src < psi.size)
    amps = np.zeros(out_dim, dtype=np.complex128)
    if not np.any(valid):
        return amps
    mv = m[valid]
    ratio = np.exp(0.5 * (gammaln(src[valid] + 1) - gammaln(mv + 1)))
    prefactor = np.prod(rs ** (ns - 1) / np.sqrt(_factorial(ns)))
    term = psi[src[valid]] * ratio * prefactor
    for i in range(n_steps):
        shifted = mv + shift_after[i]
        term = term * ts[i] ** (shifted - 1.0) * (
            ns[i] * ts[i] ** 2 - rs[i] ** 2 * shifted)
    amps[valid] = term
    return amps


def _factorial(n: np.ndarray) -> np.ndarray:
    return np.exp(gammaln(np.asarray(n) + 1))


def cascaded_closed_form(psi, steps, out_dim: int | None = None) -> FockVector:
    """Normalized closed-form cascade output (ideal steps only)."""
    amps = closed_form_amplitudes(psi, steps, out_dim)
    nrm = np.linalg.norm(amps)
    if nrm**2 < PROB_FLOOR:
        raise ImpossibleOutcomeError(
            f"detection tuple {[s.n_detect for s in steps]} has probability "
            f"{nrm**2:.3e}")
    return FockVector(amps / nrm)


def cascade_success_prob(alpha, steps, cutoff: int = DEFAULT_CUTOFF) -> float:
    """Probability of a detection tuple on a coherent input, from the closed form."""
    psi = coherent_vector(alpha, cutoff).amplitudes
    amps = closed_form_amplitudes(psi, steps)
    return float(np.vdot(amps, amps).real)


def displaced_photon_fidelity(alpha: float, theta: float, n: int,
                              beta: float) -> float:
    """Closed-form fidelity of a single catalysis step on |alpha> with the
    displaced single photon D(beta)|1> (alpha, beta real)."""
    alpha, beta = float(alpha), float(beta)
    r, t = np.cos(theta), np.sin(theta)
    envelope = np.exp(-abs(beta - t * alpha) ** 2)
    numerator = abs(n * t * (beta - t * alpha)
                    + r**2 * alpha * (1 + t * alpha * beta - beta**2)) ** 2
    denominator = r**4 * alpha**2 + t**2 * (n - r**2 * alpha**2) ** 2
    if denominator < PROB_FLOOR:
        raise ImpossibleOutcomeError("catalysis output has vanishing norm")
    return float(envelope * numerator / denominator)


def paris_displacement_mixture(alpha: complex, theta: float,
                               cutoff: int = DEFAULT_CUTOFF) -> DensityOperator:
    """Displacement by partial trace instead of detection: the output is the
    mixture t^2 |t alpha><t alpha| + r^2 D(t alpha)|1><1|D+(t alpha), whose
    fidelity with the ideal displaced photon is exactly r^2."""
    r, t = np.cos(theta), np.sin(theta)
    weak = coherent_vector(t * alpha, cutoff).amplitudes
    displaced = displaced_fock_vector(t * alpha, 1, cutoff).amplitudes
    mat = t**2 * np.outer(weak, weak.conj()) + r**2 * np.outer(displaced, displaced.conj())
    return DensityOperator(mat, validate=False)


def lossy_optimal_params(n: int, eta: float, r: float) -> tuple[float, float]:
    """Input amplitude and target displacement maximizing the displaced-photon
    fidelity at detector efficiency eta: alpha = sqrt(n/(eta r^2)),
    beta = sqrt(alpha^2 - n/eta)."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    alpha = np.sqrt(n / (eta * r**2))
    beta = np.sqrt(alpha**2 - n / eta)
    return float(alpha), float(beta)


# ---------------------------------------------------------------------------
# experiment descriptor (JSON)


def steps_from_descriptor(entries, path: str = "steps") -> list[CatalysisStep]:
    if not isinstance(entries, list) or not entries:
        raise ValueError(f"{path}: must be a non-empty list of step objects")
    steps = []
    for i, entry in enumerate(entries):
        where = f"{path}[{i}]"
        if not isinstance(entry, dict):
            raise ValueError(f"{where}: must be an object")
        if ("theta" in entry) == ("r2" in entry):
            raise ValueError(f"{where}: give exactly one of 'theta' or 'r2'")
        if "n" not in entry:
            raise ValueError(f"{where}: missing detection count 'n'")
        kwargs = dict(n_detect=int(entry["n"]),
                      eta=float(entry.get("eta", 1.0)),
                      gamma_purity=float(entry.get("gamma", 1.0)))
        try:
            if "theta" in entry:
                steps.append(CatalysisStep(theta=float(entry["theta"]), **kwargs))
            else:
                steps.append(CatalysisStep.from_r2(float(entry["r2"]), **kwargs))
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from exc
    return steps


def experiment_from_dict(desc: dict):
    """Parse {input, steps, cutoff} into (input state, steps, cutoff)."""
    if not isinstance(desc, dict):
        raise ValueError("descriptor must be an object")
    cutoff = int(desc.get("cutoff", DEFAULT_CUTOFF))
    if cutoff < 1:
        raise ValueError("cutoff: must be >= 1")
    source = desc.get("input")
    if not isinstance(source, dict) or len(source) != 1:
        raise ValueError("input: give exactly one of {'coherent': ...} or {'vector': ...}")
    if "coherent" in source:
        value = source["coherent"]
        alpha = complex(value[0], value[1]) if isinstance(value, list) else complex(value)
        state = coherent_vector(alpha, cutoff)
    elif "vector" in source:
        amps = np.array([complex(re, im) for re, im in source["vector"]])
        state = FockVector(amps, normalize=True)
    else:
        raise ValueError("input: unknown input kind")
    steps = steps_from_descriptor(desc.get("steps"))
    return state, steps, cutoff
