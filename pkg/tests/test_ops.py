"""Operator constructions checked against matrix-exponential oracles."""

import numpy as np
import pytest
from scipy.linalg import expm

import photocat as pc
from photocat.ops import (
    BeamsplitterParam,
    annihilation_matrix,
    displacement_through_squeeze,
)
from photocat.fock import TruncationWarning


def expm_displacement(gamma, cutoff):
    a = annihilation_matrix(cutoff)
    return expm(gamma * a.conj().T - np.conj(gamma) * a)


def test_displacement_vacuum_element():
    for gamma in (0.3, 1.2 - 0.5j):
        mat = pc.displacement_matrix(gamma, 25)
        assert abs(mat[0, 0] - np.exp(-abs(gamma) ** 2 / 2)) < 1e-12


def test_displacement_zero_is_identity():
    assert np.abs(pc.displacement_matrix(0.0, 12) - np.eye(13)).max() < 1e-14


def test_displacement_one_one_element():
    beta = 0.8
    mat = pc.displacement_matrix(beta, 20)
    assert abs(mat[1, 1] - (1 - beta**2) * np.exp(-beta**2 / 2)) < 1e-12


@pytest.mark.parametrize("gamma", [0.5, 1.0 + 0.7j, -2.5j, 3.0, -1.4 + 2.0j])
def test_displacement_matches_expm(gamma):
    mat = pc.displacement_matrix(gamma, 60, warn_tail=False)
    oracle = expm_displacement(gamma, 60)
    assert np.abs(mat[:21, :21] - oracle[:21, :21]).max() < 1e-8


def test_displacement_composition():
    g1, g2 = 0.7 + 0.3j, -0.4 + 0.9j
    cut = 40
    lhs = pc.displacement_matrix(g1, cut) @ pc.displacement_matrix(g2, cut)
    phase = np.exp(1j * np.imag(g1 * np.conj(g2)))
    rhs = phase * pc.displacement_matrix(g1 + g2, cut)
    assert np.abs(lhs[:25, :25] - rhs[:25, :25]).max() < 1e-8


def test_displacement_unitary_up_to_tail():
    mat = pc.displacement_matrix(1.5, 40)
    gram = mat.conj().T @ mat
    keep = 30
    assert np.abs(gram[:keep, :keep] - np.eye(keep)).max() < 1e-8


def test_displacement_tail_warning():
    with pytest.warns(TruncationWarning):
        pc.displacement_matrix(4.0, 20)


def test_coherent_basics():
    assert np.allclose(pc.coherent_vector(0, 10).amplitudes,
                       pc.vacuum(10).amplitudes)
    alpha = 1.7
    state = pc.coherent_vector(alpha, 50)
    assert abs(state.mean_photon() - alpha**2) < 1e-8


def test_coherent_overlap_closed_form():
    a, b = 0.9 + 0.4j, -0.3 + 1.1j
    overlap = pc.coherent_vector(a, 50).overlap(pc.coherent_vector(b, 50))
    expected = np.exp(-(abs(a) ** 2 + abs(b) ** 2) / 2 + np.conj(a) * b)
    assert abs(overlap - expected) < 1e-10


def test_squeeze_vector_basics():
    assert np.allclose(pc.squeeze_vector(0, 8).amplitudes, pc.vacuum(8).amplitudes)
    state = pc.squeeze_vector(0.6, 40)
    assert np.abs(state.amplitudes[1::2]).max() == 0.0  # odd levels empty


def test_squeeze_vector_matches_expm():
    for xi in (0.5, -0.8, 0.4 + 0.3j):
        cut = 50
        a = annihilation_matrix(cut)
        gen = 0.5 * (xi * (a.conj().T @ a.conj().T) - np.conj(xi) * (a @ a))
        oracle = expm(gen)[:, 0]
        mine = pc.squeeze_vector(xi, cut).amplitudes
        assert np.abs(mine[:30] - oracle[:30]).max() < 1e-8


def test_squeeze_vector_level_two_amplitude():
    r = 0.45
    state = pc.squeeze_vector(r, 30)
    expected = np.tanh(r) / (np.sqrt(2.0) * np.sqrt(np.cosh(r)))
    assert abs(state.amplitudes[2] - expected) < 1e-10


def test_squeeze_matrix_inverse_pair():
    xi = 0.7 - 0.2j
    cut = 30
    prod = pc.squeeze_matrix(xi, cut) @ pc.squeeze_matrix(-xi, cut)
    assert np.abs(prod - np.eye(cut + 1)).max() < 1e-8


def test_squeeze_bound_enforced():
    with pytest.raises(ValueError):
        pc.squeeze_vector(2.5, 30)
    with pytest.raises(ValueError):
        pc.squeeze_matrix(-2.1, 30)


def test_rotation_basics():
    assert np.abs(pc.rotation_matrix(0.0, 10) - np.eye(11)).max() == 0.0
    assert np.abs(pc.rotation_matrix(2 * np.pi, 10) - np.eye(11)).max() < 1e-12


def test_beamsplitter_identity_at_zero():
    assert np.abs(pc.beamsplitter_matrix(0.0, (4, 4)) - np.eye(25)).max() < 1e-14


def test_beamsplitter_hom():
    joint = pc.tensor(pc.fock_vector(1, 3), pc.fock_vector(1, 3))
    out = pc.apply_operator(joint, pc.beamsplitter_matrix(np.pi / 4, (3, 3)), (0, 1))
    target = np.zeros((4, 4), dtype=complex)
    target[2, 0], target[0, 2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    # the interference pattern is fixed; the global sign is convention
    fid = abs(np.vdot(target, out.amplitudes)) ** 2
    assert abs(fid - 1.0) < 1e-12
    assert abs(out.amplitudes[1, 1]) < 1e-12


def test_beamsplitter_blocks_unitary():
    theta = 0.83
    mat = pc.beamsplitter_matrix(theta, (9, 9))
    assert np.abs(mat.conj().T @ mat - np.eye(100)).max() < 1e-12


def test_beamsplitter_conserves_photon_number():
    mat = pc.beamsplitter_matrix(0.5, (5, 5))
    for i in range(36):
        for j in range(36):
            if abs(mat[i, j]) > 0 and (i // 6 + i % 6) != (j // 6 + j % 6):
                raise AssertionError("coupling across total photon number")


def test_beamsplitter_matches_expm():
    theta = 0.61
    da, db = 7, 7
    a = np.kron(annihilation_matrix(da - 1), np.eye(db))
    b = np.kron(np.eye(da), annihilation_matrix(db - 1))
    gen = theta * (a @ b.conj().T - a.conj().T @ b)
    oracle = expm(gen)
    mine = pc.beamsplitter_matrix(theta, (da - 1, db - 1))
    # interior block: away from the truncation corner both agree
    keep = [i * db + j for i in range(4) for j in range(4)]
    assert np.abs(mine[np.ix_(keep, keep)] - oracle[np.ix_(keep, keep)]).max() < 1e-10


def test_braiding_identity():
    beta, xi = 0.9, -0.5
    cut = 45
    zeta = displacement_through_squeeze(beta, xi)
    assert abs(zeta - beta * np.exp(-xi)) < 1e-12  # real-parameter limit
    lhs = pc.displacement_matrix(beta, cut) @ pc.squeeze_matrix(xi, cut)
    rhs = pc.squeeze_matrix(xi, cut) @ pc.displacement_matrix(zeta, cut)
    assert np.abs(lhs[:25, :25] - rhs[:25, :25]).max() < 1e-8


def test_braiding_identity_complex():
    beta, xi = 0.6 + 0.2j, 0.4 * np.exp(1j * 0.7)
    cut = 45
    zeta = displacement_through_squeeze(beta, xi)
    lhs = pc.displacement_matrix(beta, cut) @ pc.squeeze_matrix(xi, cut)
    rhs = pc.squeeze_matrix(xi, cut) @ pc.displacement_matrix(zeta, cut)
    assert np.abs(lhs[:25, :25] - rhs[:25, :25]).max() < 1e-8


def test_beamsplitter_param():
    param = BeamsplitterParam.from_r2(0.5)
    assert abs(param.r**2 + param.t**2 - 1.0) < 1e-15
    assert abs(param.r2 - 0.5) < 1e-12
    with pytest.raises(ValueError):
        BeamsplitterParam(-0.1)
