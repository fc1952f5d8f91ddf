"""Wigner landmarks, normalization, marginals, covariance, CSV export."""

import numpy as np
import pytest

import photocat as pc
from photocat import wigner
from photocat.wigner import WignerGridError, hermite_basis


def test_vacuum_peak():
    assert abs(pc.wigner_point(pc.vacuum(20), 0.0, 0.0) - 1 / np.pi) < 1e-12


def test_single_photon_dip():
    assert abs(pc.wigner_point(pc.fock_vector(1, 20), 0.0, 0.0) + 1 / np.pi) < 1e-12


def test_normalization():
    for state in (pc.vacuum(30), pc.coherent_vector(1.5, 40),
                  pc.squeeze_vector(-0.5, 40)):
        grid = pc.wigner_grid(state, points=201)
        assert abs(grid.volume() - 1.0) < 0.01


def test_coherent_peak_location():
    alpha = 1.5
    grid = pc.wigner_grid(pc.coherent_vector(alpha, 40), points=281)
    i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert abs(grid.q[i] - np.sqrt(2) * alpha) < 0.06
    assert abs(grid.p[j]) < 0.06


def test_complex_coherent_orientation():
    alpha = 1.2j
    grid = pc.wigner_grid(pc.coherent_vector(alpha, 40), points=281)
    i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert abs(grid.p[j] - np.sqrt(2) * 1.2) < 0.06
    assert abs(grid.q[i]) < 0.06


def test_displaced_photon_negativity_invariant():
    for beta in (0.0, 0.5, 1.4):
        state = pc.displaced_fock_vector(beta, 1, 40)
        value = pc.wigner_point(state, np.sqrt(2) * beta, 0.0)
        assert abs(value + 1 / np.pi) < 1e-9


def test_negativity_vacuum():
    min_w, volume = pc.negativity(pc.vacuum(20), points=141)
    assert min_w > -1e-10
    assert volume < 1e-10


def test_negativity_grows_toward_catalysis_optimum():
    from photocat import catalysis as cat

    n, r2 = 1, 0.5
    theta = np.arccos(np.sqrt(r2))
    values = []
    for frac in (0.5, 1.0):
        alpha = np.sqrt(frac * n / r2)
        state, _ = cat.catalyze_step(pc.coherent_vector(alpha, 40),
                                     cat.CatalysisStep(theta=theta, n_detect=n))
        values.append(pc.negativity(state, points=181)[0])
    assert values[1] < values[0] < 0.0


def test_marginal_matches_wavefunction():
    for state in (pc.vacuum(40), pc.fock_vector(1, 40),
                  pc.squeeze_vector(0.4, 40)):
        grid = pc.wigner_grid(state, points=241)
        marginal = grid.values.sum(axis=1) * grid.dp
        profile = np.abs(hermite_basis(grid.q, 41).T @ state.amplitudes) ** 2
        rms = np.sqrt(np.mean((marginal - profile) ** 2))
        assert rms < 1e-3


def test_displacement_covariance():
    gamma = 0.9 + 0.4j
    state = pc.vacuum(40)
    displaced = pc.FockVector(pc.displacement_matrix(gamma, 40) @ state.amplitudes)
    shift_q, shift_p = np.sqrt(2) * gamma.real, np.sqrt(2) * gamma.imag
    for q, p in [(0.0, 0.0), (0.7, -0.3), (-1.1, 0.5)]:
        direct = pc.wigner_point(displaced, q + shift_q, p + shift_p)
        base = pc.wigner_point(state, q, p)
        assert abs(direct - base) < 1e-6


def test_density_operator_input():
    mixed = pc.apply_loss(pc.fock_vector(1, 25), 0, 0.7)
    value = pc.wigner_point(mixed, 0.0, 0.0)
    expected = 0.7 * (-1 / np.pi) + 0.3 * (1 / np.pi)
    assert abs(value - expected) < 1e-10


def test_grid_too_small_reported():
    with pytest.raises(WignerGridError):
        pc.wigner_grid(pc.coherent_vector(3.0, 60), q_range=(-2, 2),
                       p_range=(-2, 2), points=81)


def test_hermite_basis_orthonormal():
    xs = np.linspace(-12, 12, 3001)
    basis = hermite_basis(xs, 8)
    gram = basis @ basis.T * (xs[1] - xs[0])
    assert np.abs(gram - np.eye(8)).max() < 1e-6


def test_csv_roundtrip(tmp_path):
    grid = pc.wigner_grid(pc.vacuum(15), q_range=(-3, 3), p_range=(-3, 3),
                          points=41, validate=False)
    path = tmp_path / "grid.csv"
    wigner.write_grid_csv(str(path), grid)
    loaded = wigner.read_grid_csv(str(path))
    assert np.array_equal(loaded.values, grid.values)
    assert loaded.metadata()["shape"] == [41, 41]
