"""Truncated Fock-space state algebra: vectors, density operators, measurement.

States live over the number basis |0>, ..., |N_max> of one or more optical
modes.  Pure states are complex amplitude arrays with one axis per mode; mixed
states are dense Hermitian matrices over the row-major joint basis.  All
operations are pure functions and states are immutable after construction.
"""

from __future__ import annotations

import json
import os
import tempfile
import warnings

import numpy as np

from . import _blocks

__all__ = [
    "DEFAULT_CUTOFF",
    "TAIL_TOL",
    "PROB_FLOOR",
    "TruncationWarning",
    "TruncationError",
    "ImpossibleOutcomeError",
    "ResourceError",
    "FockVector",
    "DensityOperator",
    "vacuum",
    "fock_vector",
    "tensor",
    "partial_trace",
    "project_pnr",
    "pnr_distribution",
    "apply_loss",
    "apply_operator",
    "fidelity",
    "state_to_dict",
    "state_from_dict",
    "save_state",
    "load_state",
]

DEFAULT_CUTOFF = 60
TAIL_TOL = 1e-8
PROB_FLOOR = 1e-14
HERMITICITY_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-8
TENSOR_BYTE_BUDGET = 2**31  # refuse dense joint objects beyond ~2 GiB
_TAIL_LEVELS = 5


class TruncationWarning(UserWarning):
    """State support is too close to the Fock cutoff for reliable results."""


class TruncationError(RuntimeError):
    """A computation cannot be trusted at the configured cutoff."""


class ImpossibleOutcomeError(RuntimeError):
    """Conditioning on an outcome whose probability is below the floor."""


class ResourceError(RuntimeError):
    """A joint state would exceed the dense-storage budget."""


def _check_budget(nbytes: int) -> None:
    if nbytes > TENSOR_BYTE_BUDGET:
        raise ResourceError(
            f"joint state needs {nbytes / 2**30:.2f} GiB, over the "
            f"{TENSOR_BYTE_BUDGET / 2**30:.2f} GiB budget"
        )


class FockVector:
    """Pure state over one or more truncated Fock modes.

    `amplitudes` has one axis per mode; axis length d means the mode is
    truncated at N_max = d - 1.
    """

    __slots__ = ("amplitudes", "mode_dims")

    def __init__(self, amplitudes, mode_dims=None, *, normalize=False,
                 check_tail=False, tail_tol=TAIL_TOL):
        arr = np.array(amplitudes, dtype=np.complex128)
        if mode_dims is not None:
            arr = arr.reshape(tuple(int(d) for d in mode_dims))
        if arr.ndim == 0:
            raise ValueError("amplitudes must have at least one mode axis")
        if any(d < 2 for d in arr.shape):
            raise ValueError("every mode needs cutoff >= 1 (dimension >= 2)")
        if normalize:
            nrm = np.linalg.norm(arr)
            if nrm**2 < PROB_FLOOR:
                raise ValueError("cannot normalize a (near-)zero state vector")
            arr = arr / nrm
        arr.setflags(write=False)
        self.amplitudes = arr
        self.mode_dims = arr.shape
        if check_tail:
            _warn_tail(self, tail_tol)

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def cutoff(self) -> int:
        if self.n_modes != 1:
            raise ValueError("cutoff is only defined for single-mode states")
        return self.mode_dims[0] - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockVector":
        return FockVector(self.amplitudes, normalize=True)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mode_marginal(self, mode: int) -> np.ndarray:
        probs = self.probabilities()
        axes = tuple(i for i in range(self.n_modes) if i != mode)
        return probs.sum(axis=axes) if axes else probs

    def mean_photon(self) -> float:
        total = 0.0
        for mode, d in enumerate(self.mode_dims):
            total += float(np.arange(d) @ self.mode_marginal(mode))
        return total

    def overlap(self, other: "FockVector") -> complex:
        if self.mode_dims != other.mode_dims:
            raise ValueError("mode dimensions differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityOperator":
        flat = self.amplitudes.reshape(-1)
        _check_budget(flat.size**2 * 16)
        return DensityOperator(np.outer(flat, flat.conj()), self.mode_dims,
                               validate=False)

    def truncated(self, dim: int) -> "FockVector":
        if self.n_modes != 1:
            raise ValueError("truncated() expects a single-mode state")
        if dim >= self.mode_dims[0]:
            return self
        return FockVector(self.amplitudes[:dim])

    def __repr__(self):
        return f"FockVector(mode_dims={self.mode_dims}, norm={self.norm:.6f})"


class DensityOperator:
    """Mixed state as a dense Hermitian matrix over the truncated joint basis."""

    __slots__ = ("matrix", "mode_dims")

    def __init__(self, matrix, mode_dims=None, *, normalize=False, validate=True):
        mat = np.array(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        if mode_dims is None:
            mode_dims = (mat.shape[0],)
        mode_dims = tuple(int(d) for d in mode_dims)
        if int(np.prod(mode_dims)) != mat.shape[0]:
            raise ValueError("mode_dims inconsistent with matrix dimension")
        if any(d < 2 for d in mode_dims):
            raise ValueError("every mode needs cutoff >= 1 (dimension >= 2)")
        if validate:
            asym = np.abs(mat - mat.conj().T).max()
            if asym > HERMITICITY_TOL:
                raise ValueError(f"matrix not Hermitian (max asymmetry {asym:.2e})")
        mat = 0.5 * (mat + mat.conj().T)
        if normalize:
            tr = float(np.trace(mat).real)
            if tr < PROB_FLOOR:
                raise ValueError("cannot normalize a (near-)zero density matrix")
            mat = mat / tr
        mat.setflags(write=False)
        self.matrix = mat
        self.mode_dims = mode_dims

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "DensityOperator":
        return DensityOperator(self.matrix, self.mode_dims, normalize=True,
                               validate=False)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def validate_positive(self, floor: float = EIGENVALUE_FLOOR) -> None:
        lo = float(self.eigenvalues()[0])
        if lo < floor:
            raise ValueError(f"density matrix has eigenvalue {lo:.3e} < {floor:.0e}")

    def purity(self) -> float:
        return float(np.vdot(self.matrix, self.matrix).real)

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).reshape(self.mode_dims)

    def mode_marginal(self, mode: int) -> np.ndarray:
        probs = self.diagonal()
        axes = tuple(i for i in range(self.n_modes) if i != mode)
        return probs.sum(axis=axes) if axes else probs

    def mean_photon(self) -> float:
        total = 0.0
        for mode, d in enumerate(self.mode_dims):
            total += float(np.arange(d) @ self.mode_marginal(mode))
        return total

    def __repr__(self):
        return f"DensityOperator(mode_dims={self.mode_dims}, trace={self.trace:.6f})"


State = FockVector | DensityOperator


def _warn_tail(state: State, tail_tol: float) -> None:
    for mode in range(state.n_modes):
        marginal = state.mode_marginal(mode)
        tail = float(marginal[max(0, marginal.size - _TAIL_LEVELS):].sum())
        if tail >= tail_tol:
            warnings.warn(
                f"mode {mode} holds {tail:.2e} probability within "
                f"{_TAIL_LEVELS} levels of the cutoff; raise the cutoff",
                TruncationWarning,
                stacklevel=3,
            )


def vacuum(cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    return fock_vector(0, cutoff)


def fock_vector(n: int, cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    """Number state |n> truncated at `cutoff`."""
    if not 0 <= n <= cutoff:
        raise ValueError(f"need 0 <= n <= cutoff, got n={n}, cutoff={cutoff}")
    amps = np.zeros(cutoff + 1, dtype=np.complex128)
    amps[n] = 1.0
    return FockVector(amps)


def _as_density(state: State) -> DensityOperator:
    return state if isinstance(state, DensityOperator) else state.to_density()


def tensor(a: State, b: State) -> State:
    """Joint state of two registers; vectors stay vectors, mixedness promotes."""
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        dims = a.mode_dims + b.mode_dims
        _check_budget(int(np.prod(dims)) * 16)
        joint = np.multiply.outer(a.amplitudes, b.amplitudes)
        return FockVector(joint, dims)
    ra, rb = _as_density(a), _as_density(b)
    _check_budget((ra.dim * rb.dim) ** 2 * 16)
    return DensityOperator(np.kron(ra.matrix, rb.matrix),
                           ra.mode_dims + rb.mode_dims, validate=False)


def _check_mode(state: State, mode: int) -> None:
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes}-mode state")


def partial_trace(state: State, mode: int) -> DensityOperator:
    """Trace out `mode`, returning the reduced state of the remaining modes."""
    _check_mode(state, mode)
    if state.n_modes < 2:
        raise ValueError("partial trace needs at least two modes")
    dims = state.mode_dims
    kept = tuple(d for i, d in enumerate(dims) if i != mode)
    kept_dim = int(np.prod(kept))
    if isinstance(state, FockVector):
        reduced = np.tensordot(state.amplitudes, state.amplitudes.conj(),
                               axes=([mode], [mode]))
        return DensityOperator(reduced.reshape(kept_dim, kept_dim), kept,
                               validate=False)
    k = state.n_modes
    tens = state.matrix.reshape(dims + dims)
    reduced = np.trace(tens, axis1=mode, axis2=mode + k)
    return DensityOperator(reduced.reshape(kept_dim, kept_dim), kept,
                           validate=False)


def project_pnr(state: State, mode: int, n: int, *,
                prob_floor: float = PROB_FLOOR):
    """Project `mode` onto |n><n| and drop it.

    Returns (reduced normalized state, outcome probability).  Outcomes with
    probability below `prob_floor` raise ImpossibleOutcomeError instead of
    returning a garbage normalized state.
    """
    _check_mode(state, mode)
    if state.n_modes < 2:
        raise ValueError("project_pnr needs at least two modes")
    if not 0 <= n < state.mode_dims[mode]:
        raise ValueError(f"outcome n={n} exceeds the cutoff of mode {mode}")
    kept = tuple(d for i, d in enumerate(state.mode_dims) if i != mode)
    if isinstance(state, FockVector):
        sub = np.take(state.amplitudes, n, axis=mode)
        prob = float(np.vdot(sub, sub).real)
        if prob < prob_floor:
            raise ImpossibleOutcomeError(
                f"outcome n={n} on mode {mode} has probability {prob:.3e}")
        return FockVector(sub / np.sqrt(prob), kept), prob
    k = state.n_modes
    tens = state.matrix.reshape(state.mode_dims + state.mode_dims)
    sub = np.take(np.take(tens, n, axis=mode + k), n, axis=mode)
    kept_dim = int(np.prod(kept))
    sub = sub.reshape(kept_dim, kept_dim)
    prob = float(np.trace(sub).real)
    if prob < prob_floor:
        raise ImpossibleOutcomeError(
            f"outcome n={n} on mode {mode} has probability {prob:.3e}")
    return DensityOperator(sub / prob, kept, validate=False), prob


def pnr_distribution(state: State, mode: int) -> np.ndarray:
    """Photon-number outcome probabilities for a PNR detector on `mode`."""
    _check_mode(state, mode)
    return np.asarray(state.mode_marginal(mode), dtype=float)


def _act_on_axes(tens: np.ndarray, kernel: np.ndarray, axes) -> np.ndarray:
    """kernel is square over the row-major joint basis of `axes`, in that order."""
    axes = list(axes)
    front = list(range(len(axes)))
    moved = np.moveaxis(tens, axes, front)
    lead = moved.shape[: len(axes)]
    rest = moved.shape[len(axes):]
    flat = moved.reshape(int(np.prod(lead)), -1)
    out = (kernel @ flat).reshape(lead + rest)
    return np.moveaxis(out, front, axes)


def apply_operator(state: State, op: np.ndarray, modes) -> State:
    """Apply a (possibly non-unitary) matrix acting on the given mode(s).

    `op` is a square matrix over the row-major joint basis of `modes`.
    Density operators get op . rho . op+.  No normalization is performed.
    """
    if isinstance(modes, int):
        modes = (modes,)
    modes = tuple(modes)
    for m in modes:
        _check_mode(state, m)
    sub_dims = tuple(state.mode_dims[m] for m in modes)
    sub_dim = int(np.prod(sub_dims))
    if op.shape != (sub_dim, sub_dim):
        raise ValueError(f"operator shape {op.shape} does not match modes {modes}")
    if isinstance(state, FockVector):
        out = _act_on_axes(state.amplitudes, op, modes)
        return FockVector(out, state.mode_dims)
    k = state.n_modes
    tens = state.matrix.reshape(state.mode_dims + state.mode_dims)
    tens = _act_on_axes(tens, op, modes)
    tens = _act_on_axes(tens, op.conj(), tuple(m + k for m in modes))
    return DensityOperator(tens.reshape(state.dim, state.dim),
                           state.mode_dims, validate=False)


def apply_loss(state: State, mode: int, eta: float) -> DensityOperator:
    """Pure-loss channel on one mode: beamsplitter of amplitude transmission
    sqrt(eta) against a vacuum ancilla, ancilla traced out."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    _check_mode(state, mode)
    d = state.mode_dims[mode]
    kraus = _blocks.loss_kraus(float(eta), d)
    if isinstance(state, FockVector):
        flat_dim = state.dim
        out = np.zeros((flat_dim, flat_dim), dtype=np.complex128)
        for op in kraus:
            branch = apply_operator(state, op.astype(np.complex128), mode)
            flat = branch.amplitudes.reshape(-1)
            out += np.outer(flat, flat.conj())
        return DensityOperator(out, state.mode_dims, validate=False)
    out = np.zeros_like(state.matrix)
    for op in kraus:
        branch = apply_operator(state, op.astype(np.complex128), mode)
        out = out + branch.matrix
    return DensityOperator(out, state.mode_dims, validate=False)


def fidelity(a: State, b: State) -> float:
    """Uhlmann fidelity |Tr sqrt(sqrt(rho) sigma sqrt(rho))|^2.

    Reduces to the squared overlap for pure inputs.
    """
    if a.mode_dims != b.mode_dims:
        raise ValueError("states have different mode dimensions")
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        val = abs(a.overlap(b)) ** 2
        return float(min(val, 1.0))
    if isinstance(a, FockVector):
        a, b = b, a
    if isinstance(b, FockVector):
        flat = b.amplitudes.reshape(-1)
        val = float(np.real(flat.conj() @ a.matrix @ flat))
        return float(min(max(val, 0.0), 1.0))
    val_a = _sqrtm_psd(a.matrix)
    inner = val_a @ b.matrix @ val_a
    eigs = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    _reject_negative(eigs)
    root = np.sqrt(np.clip(eigs, 0.0, None)).sum()
    return float(min(root**2, 1.0))


def _reject_negative(eigs: np.ndarray, floor: float = -1e-6) -> None:
    lo = float(eigs[0])
    if lo < floor:
        raise ValueError(f"non-positive state in fidelity (eigenvalue {lo:.3e})")


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    eigs, vecs = np.linalg.eigh(mat)
    _reject_negative(eigs)
    root = np.sqrt(np.clip(eigs, 0.0, None))
    return (vecs * root) @ vecs.conj().T


# ---------------------------------------------------------------------------
# serialization: versioned JSON records

_FORMAT = "fock-state/v1"


def _pairs(values: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in values.reshape(-1)]


def state_to_dict(state: State) -> dict:
    record = {
        "format": _FORMAT,
        "mode_dims": list(state.mode_dims),
        "cutoff": state.mode_dims[0] - 1,
    }
    if isinstance(state, FockVector):
        record["kind"] = "vector"
        record["data"] = _pairs(state.amplitudes)
    else:
        record["kind"] = "matrix"
        record["data"] = _pairs(state.matrix)
    return record


def state_from_dict(record: dict) -> State:
    if record.get("format") != _FORMAT:
        raise ValueError(f"unsupported state format {record.get('format')!r}")
    dims = tuple(int(d) for d in record["mode_dims"])
    data = np.array([complex(re, im) for re, im in record["data"]])
    if record["kind"] == "vector":
        return FockVector(data, dims)
    if record["kind"] == "matrix":
        dim = int(np.prod(dims))
        return DensityOperator(data.reshape(dim, dim), dims)
    raise ValueError(f"unknown state kind {record['kind']!r}")


def save_state(path: str, state: State) -> None:
    _atomic_write_text(path, json.dumps(state_to_dict(state)))


def load_state(path: str) -> State:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_dict(json.load(fh))


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
