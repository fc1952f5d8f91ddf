"""Target constructors: cats, M-fold SSV states, grid codes, analytic fidelity."""

import numpy as np
import pytest
from scipy.special import gammaln

import photocat as pc
from photocat import catalysis as cat
from photocat.fock import TruncationError
from photocat.targets import TargetSpec


def test_odd_cat_closed_form():
    zeta, cut = 1.3, 40
    state = pc.scs_vector(zeta, "-", cut)
    ls = np.arange((cut - 1) // 2 + 1)
    levels = 2 * ls + 1
    expected = np.zeros(cut + 1)
    expected[levels] = (zeta**levels * np.exp(-0.5 * gammaln(levels + 1))
                        / np.sqrt(np.sinh(zeta**2)))
    assert np.abs(state.amplitudes - expected).max() < 1e-10


def test_cat_parity_structure():
    odd = pc.scs_vector(0.9, "-", 30)
    even = pc.scs_vector(0.9, "+", 30)
    assert np.abs(odd.amplitudes[::2]).max() == 0.0
    assert np.abs(even.amplitudes[1::2]).max() == 0.0


def test_cat_orthogonality_large_amplitude():
    plus = pc.scs_vector(3.0, "+", 60)
    minus = pc.scs_vector(3.0, "-", 60)
    assert pc.fidelity(plus, minus) < 1e-12


def test_odd_cat_zero_amplitude_rejected():
    with pytest.raises(ValueError):
        pc.scs_vector(0.0, "-", 20)


def test_ssv_two_fold_reduces_to_cat():
    state = pc.ssv_vector(2, 0.8, 0.0, 40)
    even = pc.scs_vector(0.8, "+", 40)
    assert pc.fidelity(state, even) > 1 - 1e-12


@pytest.mark.parametrize("m_fold", [2, 3, 4])
def test_ssv_rotation_invariance(m_fold):
    state = pc.ssv_vector(m_fold, 1.1, -0.3, 50)
    rot = pc.rotation_matrix(2 * np.pi / m_fold, 50)
    rotated = pc.FockVector(rot @ state.amplitudes)
    assert pc.fidelity(state, rotated) > 1 - 1e-9


def test_ssv_threefold_reference_state():
    state = pc.ssv_vector(3, 1.255, -0.24, 60)
    rot = pc.rotation_matrix(2 * np.pi / 3, 60)
    assert pc.fidelity(state, pc.FockVector(rot @ state.amplitudes)) > 1 - 1e-9


def test_ssv_equivalent_squeezed_cat():
    beta, xi, cut = 0.9, -0.22, 50
    ssv = pc.ssv_vector(2, beta, xi, cut)
    zeta = pc.equivalent_cat(beta, xi)
    squeezed_cat = pc.FockVector(
        pc.squeeze_matrix(xi, cut) @ pc.scs_vector(zeta, "+", cut).amplitudes,
        normalize=True)
    assert pc.fidelity(ssv, squeezed_cat) > 1 - 1e-9


def test_braiding_on_vacuum():
    beta, xi, cut = 0.7, -0.4, 45
    lhs = pc.displacement_matrix(beta, cut) @ pc.squeeze_vector(xi, cut).amplitudes
    zeta = pc.equivalent_cat(beta, xi)
    rhs = pc.squeeze_matrix(xi, cut) @ (
        pc.displacement_matrix(zeta, cut) @ pc.vacuum(cut).amplitudes)
    assert np.abs(lhs - rhs).max() < 1e-8


def test_squeezing_db_values():
    assert abs(pc.squeezing_db(-0.22) - 1.91) < 5e-3
    assert abs(pc.squeezing_db(-0.48) - 4.17) < 5e-3
    assert pc.squeezing_db(0.0) == 0.0
    assert pc.equivalent_cat(1.0, 0.0) == 1.0


def test_ssv_validation():
    with pytest.raises(ValueError):
        pc.ssv_vector(1, 0.5, -0.2, 20)


# ---------------------------------------------------------------------------
# grid code states


def hermite_q_density(state, qs):
    from photocat.wigner import hermite_basis

    psi = hermite_basis(qs, state.mode_dims[0]).T @ state.amplitudes
    return np.abs(psi) ** 2


def q_peaks(state, lo=-8, hi=8, points=801, floor=0.02):
    qs = np.linspace(lo, hi, points)
    dens = hermite_q_density(state, qs)
    out = []
    for i in range(1, points - 1):
        if dens[i] > dens[i - 1] and dens[i] > dens[i + 1] \
                and dens[i] > floor * dens.max():
            out.append(qs[i])
    return np.array(out)


def test_gkp_square_large_width_is_gaussian_like():
    state = pc.gkp_square(2, 0, 1.2, 50)
    assert pc.fidelity(state, pc.squeeze_vector(0.0, 50)) > 0.9


def test_gkp_square_symmetric_amplitudes():
    state = pc.gkp_square(2, 0, 0.5, 60)
    amps = state.amplitudes
    phase = amps[np.argmax(np.abs(amps))]
    phase = phase / abs(phase)
    aligned = amps / phase
    assert np.abs(aligned.imag).max() < 1e-8  # q -> -q symmetry


def test_gkp_square_comb_spacing():
    """Wavefunction peaks of the mu=0, d=2 state sit 2 sqrt(pi) apart."""
    state = pc.gkp_square(2, 0, 0.35, 60)
    peaks = q_peaks(state)
    gaps = np.diff(peaks)
    assert np.abs(gaps - 2 * np.sqrt(np.pi)).max() < 0.1


def test_gkp_square_mu1_interleaves():
    state = pc.gkp_square(2, 1, 0.35, 60)
    peaks = q_peaks(state)
    # odd multiples of sqrt(pi)
    nearest = np.round(peaks / np.sqrt(np.pi))
    assert np.all(np.abs(nearest % 2) == 1)


def test_gkp_stabilizer_fidelity_trend():
    """Displacing by sqrt(2 pi) along q approaches a symmetry as width shrinks."""
    values = []
    for width in (0.6, 0.45, 0.3):
        state = pc.gkp_square(2, 0, width, 60)
        disp = pc.displacement_matrix(np.sqrt(2 * np.pi) / np.sqrt(2), 60,
                                      warn_tail=False)
        shifted = pc.FockVector(disp @ state.amplitudes, normalize=True)
        values.append(abs(state.overlap(shifted)) ** 2)
    assert values[0] < values[1] < values[2]


def test_gkp_width_bounds():
    with pytest.raises(ValueError):
        pc.gkp_square(2, 0, 1.5, 40)
    with pytest.raises(ValueError):
        pc.gkp_square(2, 0, 0.05, 40)


def test_gkp_window_convergence_guard():
    with pytest.raises(TruncationError):
        pc.gkp_square(2, 0, 0.12, 20)  # tiny width cannot fit in a small cutoff


def test_gkp_hex_rotation_symmetry():
    mix = pc.gkp_hex(2, "mix", 0.2, 60)
    rot = pc.rotation_matrix(np.pi / 3, 60)
    rotated = pc.DensityOperator(rot @ mix.matrix @ rot.conj().T, validate=False)
    assert pc.fidelity(mix, rotated) > 0.99


def test_gkp_hex_width_energy_trend():
    lean = pc.gkp_hex(2, "mix", 0.46, 60)
    rich = pc.gkp_hex(2, "mix", 0.2, 60)
    assert rich.mean_photon() > lean.mean_photon()


def test_gkp_mixture_trace():
    mix = pc.gkp_square(2, "mix", 0.5, 40)
    assert abs(mix.trace - 1.0) < 1e-10
    mix.validate_positive()


def test_gkp_sum_is_normalized_vector():
    state = pc.gkp_hex(2, "sum", 0.46, 50)
    assert isinstance(state, pc.FockVector)
    assert abs(state.norm - 1.0) < 1e-12


def test_gkp_qunaught():
    state = pc.gkp_square(1, 0, 0.4, 60)
    disp = pc.displacement_matrix(np.sqrt(2 * np.pi) / np.sqrt(2), 60,
                                  warn_tail=False)
    shifted = pc.FockVector(disp @ state.amplitudes, normalize=True)
    assert abs(state.overlap(shifted)) ** 2 > 0.8  # own lattice period


# ---------------------------------------------------------------------------
# analytic cascade-vs-SSV fidelity


def numeric_ssv_fidelity(alpha, steps, beta, xi, delta, parity, cutoff):
    res = cat.cascade(pc.coherent_vector(alpha, cutoff), steps)
    disp = pc.displacement_matrix(-delta, cutoff, warn_tail=False)
    centered = pc.FockVector(disp @ res.state.amplitudes, normalize=True)
    if parity == "+":
        target = pc.ssv_vector(2, beta, xi, cutoff)
    else:
        amps = (pc.displacement_matrix(beta, cutoff, warn_tail=False)
                - pc.displacement_matrix(-beta, cutoff, warn_tail=False)) \
            @ pc.squeeze_vector(xi, cutoff).amplitudes
        target = pc.FockVector(amps, normalize=True)
    return pc.fidelity(centered, target)


def test_analytic_fidelity_matches_numeric_randomized():
    rng = np.random.default_rng(9)
    checked = 0
    while checked < 20:
        n_steps = int(rng.integers(1, 3))
        alpha = rng.uniform(0.6, 2.0)
        steps = [cat.CatalysisStep(theta=rng.uniform(0.2, np.pi / 2 - 0.2),
                                   n_detect=int(rng.integers(1, 4)))
                 for _ in range(n_steps)]
        if cat.cascade_success_prob(alpha, steps, 40) < 1e-8:
            continue
        beta = rng.uniform(0.2, 1.2)
        xi = rng.uniform(-0.5, 0.1)
        delta = rng.uniform(-0.5, 1.5)
        parity = "+" if rng.integers(2) else "-"
        analytic = pc.ssv_fidelity_analytic(alpha, steps, beta, xi, delta,
                                            parity=parity, cutoff=40)
        numeric = numeric_ssv_fidelity(alpha, steps, beta, xi, delta, parity, 40)
        assert abs(analytic - numeric) < 1e-7
        checked += 1


def test_analytic_fidelity_empty_cascade():
    """No steps: reduces to the overlap of the displaced target with |alpha>."""
    beta, xi, delta = 0.7, -0.3, 0.4
    alpha = 0.0
    analytic = pc.ssv_fidelity_analytic(alpha, [], beta, xi, delta, cutoff=40)
    target = pc.ssv_vector(2, beta, xi, 40)
    disp = pc.displacement_matrix(-delta, 40)
    direct = abs(np.vdot(target.amplitudes, disp @ pc.vacuum(40).amplitudes)) ** 2
    assert abs(analytic - direct) < 1e-10


def test_analytic_fidelity_collapsed_target():
    """beta = xi = 0 target degenerates to the vacuum fidelity."""
    steps = [cat.CatalysisStep.from_r2(0.5, 1)]
    analytic = pc.ssv_fidelity_analytic(1.0, steps, 0.0, 0.0, 0.0, cutoff=40)
    res = cat.cascade(pc.coherent_vector(1.0, 40), steps)
    assert abs(analytic - pc.fidelity(res.state, pc.vacuum(40))) < 1e-9


def test_analytic_fidelity_table_row():
    from conftest import TABLE_ROWS, row_steps

    row = TABLE_ROWS[2]
    value = pc.ssv_fidelity_analytic(row["alpha"], row_steps(row),
                                     0.8966, -0.2208, 0.5051, parity="+",
                                     cutoff=60)
    assert value > 0.9989


def test_analytic_fidelity_rejects_complex():
    with pytest.raises(ValueError):
        pc.ssv_fidelity_analytic(1.0, [], 0.5 + 0.1j, -0.2, 0.0, cutoff=30)


# ---------------------------------------------------------------------------
# target specs


def test_target_spec_roundtrip():
    spec = TargetSpec("ssv", beta=0.9, xi=-0.22, restore=0.5)
    again = TargetSpec.from_dict(spec.to_dict())
    assert again == spec
    state = spec.build(40)
    assert isinstance(state, pc.FockVector)


def test_target_spec_restore_displacement():
    spec = TargetSpec("displaced_fock", beta=0.7, n=1, restore=0.3)
    built = spec.build(40)
    direct = pc.FockVector(
        pc.displacement_matrix(0.3, 40)
        @ pc.displaced_fock_vector(0.7, 1, 40).amplitudes)
    assert pc.fidelity(built, direct) > 1 - 1e-12


def test_target_spec_validation():
    with pytest.raises(ValueError):
        TargetSpec("unknown")
    with pytest.raises(ValueError):
        TargetSpec("ssv", m_fold=1)
    with pytest.raises(ValueError):
        TargetSpec("gkp", lattice="triangular")
    with pytest.raises(ValueError):
        TargetSpec("gkp", dim_code=1)


def test_target_spec_gkp_build():
    spec = TargetSpec("gkp", lattice="hex", dim_code=2, mu="mix", width=0.46)
    state = spec.build(50)
    assert isinstance(state, pc.DensityOperator)
