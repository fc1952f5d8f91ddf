"""Shared protocol parameters and expensive session-scoped states."""

import numpy as np
import pytest

import photocat as pc
from photocat import catalysis as cat

# Optimized cascade rows quoted by the source protocol (reflectivities r_i,
# detections n_i in application order).  The r values are rounded to two
# decimals there, which caps some reproducible fidelities slightly below the
# quoted optima; see tests/test_acceptance.py.
TABLE_ROWS = {
    2: dict(alpha=1.20, rs=(0.60, 0.85), ns=(1, 2),
            beta=0.90, xi=-0.22, parity="+",
            fidelity=0.999, probability=1.5e-2),
    3: dict(alpha=3.54, rs=(0.64, 0.49, 0.52), ns=(5, 2, 1),
            beta=1.35, xi=-0.48, parity="-",
            fidelity=0.984, probability=1.8e-3),
    4: dict(alpha=4.66, rs=(0.58, 0.55, 0.70, 0.42), ns=(6, 4, 2, 1),
            beta=1.59, xi=-0.52, parity="+",
            fidelity=0.977, probability=4.2e-5),
}

# Three-fold-symmetric state from detections {6, 4, 2}: protocol parameters
# found with the package optimizer (scripts/find_threefold.py); highest
# success probability among the F > 0.999 solutions found.
THREEFOLD = dict(alpha=3.8087, thetas=(0.7058, 0.9314, 0.9906),
                 ns=(6, 4, 2), delta=1.6580, beta=1.255, xi=-0.24)


def row_steps(row, eta=1.0, gamma_purity=1.0):
    return [cat.CatalysisStep.from_r(r, n, eta=eta, gamma_purity=gamma_purity)
            for r, n in zip(row["rs"], row["ns"])]


def displaced_back(state, delta, cutoff):
    disp = pc.displacement_matrix(-delta, cutoff, warn_tail=False)
    return pc.FockVector(disp @ state.amplitudes, normalize=True)


def fit_target(row, cutoff=60):
    """Fit only the target (beta, xi, delta) for a table row."""
    from photocat.optimize import reoptimize_target

    steps = row_steps(row)
    guess = [row["beta"], row["xi"], 0.4 * row["alpha"]]
    return reoptimize_target(row["alpha"], steps, row["ns"],
                             parity=row["parity"], cutoff=cutoff, x0=guess)


@pytest.fixture(scope="session")
def table_fit_60():
    """Per-row cascade output, target fit and displaced-back state at cutoff 60."""
    out = {}
    for n, row in TABLE_ROWS.items():
        steps = row_steps(row)
        result = cat.cascade(pc.coherent_vector(row["alpha"], 60), steps)
        fit = fit_target(row, cutoff=60)
        beta, xi, delta = (float(v) for v in fit.params)
        out[n] = dict(row=row, steps=steps, result=result, fidelity=float(fit.value),
                      beta=beta, xi=xi, delta=delta,
                      centered=displaced_back(result.state, delta, 60))
    return out


@pytest.fixture(scope="session")
def threefold_state_60():
    steps = [cat.CatalysisStep(theta=t, n_detect=n)
             for t, n in zip(THREEFOLD["thetas"], THREEFOLD["ns"])]
    result = cat.cascade(pc.coherent_vector(THREEFOLD["alpha"], 60), steps)
    return dict(result=result,
                centered=displaced_back(result.state, THREEFOLD["delta"], 60))
