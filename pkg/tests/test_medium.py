import numpy as np
import pytest

from specklesim.medium import (
    MatrixKind,
    TransmissionMatrix,
    gaussian_transmission_matrix,
    haar_unitary,
    load_matrix,
    save_matrix,
    transmit,
)
from specklesim.rng import rng_for


def test_gaussian_determinism_single_entry():
    a = gaussian_transmission_matrix(1, 1, seed=7)
    b = gaussian_transmission_matrix(1, 1, seed=7)
    assert a.entries.shape == (1, 1)
    assert a.entries.tobytes() == b.entries.tobytes()


def test_gaussian_determinism_large():
    a = gaussian_transmission_matrix(200, 300, seed=11)
    b = gaussian_transmission_matrix(200, 300, seed=11)
    assert a.entries.tobytes() == b.entries.tobytes()
    c = gaussian_transmission_matrix(200, 300, seed=12)
    assert a.entries.tobytes() != c.entries.tobytes()


def test_gaussian_entry_power():
    # law of large numbers over 1e6 entries: mean |entry|^2 = 1/n_in
    m = gaussian_transmission_matrix(1000, 1000, seed=1)
    mean_power = np.mean(np.abs(m.entries) ** 2)
    assert abs(mean_power * 1000 - 1.0) < 0.05


def test_gaussian_row_norm_concentration():
    # rows have expected squared norm 1; chi-square concentration
    m = gaussian_transmission_matrix(4000, 960, seed=3)
    row_norms = np.linalg.norm(m.entries, axis=1)
    assert abs(np.mean(row_norms) - 1.0) < 0.05
    assert np.std(row_norms) / np.mean(row_norms) < 0.10


def test_gaussian_invalid_dims():
    with pytest.raises(ValueError):
        gaussian_transmission_matrix(0, 5, seed=1)
    with pytest.raises(ValueError):
        gaussian_transmission_matrix(5, 0, seed=1)
    with pytest.raises(ValueError):
        gaussian_transmission_matrix(5, 5, seed=-1)
    with pytest.raises(ValueError):
        gaussian_transmission_matrix(2**40, 5, seed=1)


def test_haar_dimension_one():
    u = haar_unitary(1, seed=123)
    assert abs(abs(u.entries[0, 0]) - 1.0) < 1e-12


def test_haar_unitarity():
    u = haar_unitary(16, seed=5)
    defect = np.max(np.abs(u.entries.conj().T @ u.entries - np.eye(16)))
    assert defect < 1e-10


def test_haar_determinism():
    a = haar_unitary(8, seed=9)
    b = haar_unitary(8, seed=9)
    assert a.entries.tobytes() == b.entries.tobytes()


def test_haar_entry_moment():
    # uniform-measure first moment: E|U_ij|^2 = 1/n, Monte Carlo over seeds.
    # Diagonal entries avoid the trivially exact row/column sums.
    n = 64
    samples = [np.mean(np.abs(np.diagonal(haar_unitary(n, seed=s).entries)) ** 2) for s in range(150)]
    assert abs(np.mean(samples) * n - 1.0) < 0.05


def test_haar_rejects_zero():
    with pytest.raises(ValueError):
        haar_unitary(0, seed=9)


def test_transmit_identity():
    m = TransmissionMatrix(np.eye(2, dtype=complex), MatrixKind.UNITARY, seed=0)
    out = transmit(m, np.array([1.0, 0.0]))
    assert np.allclose(out, [1.0, 0.0], atol=1e-15)


def test_transmit_ideal_splitter_block():
    t = 1.0 / np.sqrt(2.0)
    block = t * np.array([[1.0, 1.0], [1.0, np.exp(1j * np.pi)]])
    m = TransmissionMatrix(block, MatrixKind.UNITARY, seed=0)
    out = transmit(m, np.array([1.0, 0.0]))
    assert np.allclose(out, [t, t], atol=1e-12)


def test_transmit_dimension_mismatch():
    m = gaussian_transmission_matrix(4, 3, seed=2)
    with pytest.raises(ValueError):
        transmit(m, np.ones(4))


def test_transmit_rejects_nonfinite_input():
    m = gaussian_transmission_matrix(4, 3, seed=2)
    with pytest.raises(ValueError):
        transmit(m, np.array([1.0, np.nan, 0.0]))


def test_transmit_linearity():
    m = gaussian_transmission_matrix(50, 40, seed=21)
    rng = rng_for(77)
    x = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    y = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    a, b = 0.7 - 0.2j, -1.3 + 0.5j
    lhs = transmit(m, a * x + b * y)
    rhs = a * transmit(m, x) + b * transmit(m, y)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_unitary_conserves_intensity():
    u = haar_unitary(32, seed=4)
    rng = rng_for(14)
    x = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    y = transmit(u, x)
    power_in = np.sum(np.abs(x) ** 2)
    power_out = np.sum(np.abs(y) ** 2)
    assert abs(power_out - power_in) / power_in < 1e-9


def test_speckle_intensity_distribution():
    # Fully developed speckle: output intensities are exponential.
    # Across independent media with a fixed unit-power input, output fields
    # are exactly i.i.d. circular Gaussian, so the null holds exactly and
    # the empirical CDF must stay under the 1% KS critical value.
    n = 100
    intensities = []
    for seed in range(100):
        medium = gaussian_transmission_matrix(n, n, seed=50_000 + seed)
        rng = rng_for(60_000 + seed)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        intensities.append(np.abs(transmit(medium, x)) ** 2)
    samples = np.sort(np.concatenate(intensities))
    mean_intensity = 1.0 / n  # unit-norm input, entry variance 1/n
    cdf = 1.0 - np.exp(-samples / mean_intensity)
    ecdf_high = np.arange(1, samples.size + 1) / samples.size
    ecdf_low = np.arange(0, samples.size) / samples.size
    ks = max(np.max(np.abs(cdf - ecdf_high)), np.max(np.abs(cdf - ecdf_low)))
    critical_1pct = 1.628 / np.sqrt(samples.size)  # asymptotic 1% point
    assert ks < critical_1pct


def test_unitary_validation_rejects_nonunitary():
    with pytest.raises(ValueError):
        TransmissionMatrix(np.ones((2, 2), dtype=complex), MatrixKind.UNITARY, seed=0)
    with pytest.raises(ValueError):
        TransmissionMatrix(np.eye(3)[:2], MatrixKind.UNITARY, seed=0)


def test_matrix_validation_rejects_nonfinite():
    bad = np.ones((2, 2), dtype=complex)
    bad[0, 0] = np.inf
    with pytest.raises(ValueError):
        TransmissionMatrix(bad, MatrixKind.GAUSSIAN, seed=0)


def test_container_round_trip_gaussian(tmp_path):
    m = gaussian_transmission_matrix(7, 5, seed=31)
    path = tmp_path / "g.tmat"
    save_matrix(m, path)
    back = load_matrix(path)
    assert back.entries.tobytes() == m.entries.tobytes()
    assert back.kind is MatrixKind.GAUSSIAN
    assert back.seed == 31
    assert (back.n_out, back.n_in) == (7, 5)


def test_container_round_trip_unitary(tmp_path):
    m = haar_unitary(6, seed=8)
    path = tmp_path / "u.tmat"
    save_matrix(m, path)
    back = load_matrix(path)
    assert back.entries.tobytes() == m.entries.tobytes()
    assert back.kind is MatrixKind.UNITARY


def test_container_rejects_corruption(tmp_path):
    m = gaussian_transmission_matrix(3, 3, seed=1)
    path = tmp_path / "c.tmat"
    save_matrix(m, path)
    blob = bytearray(path.read_bytes())
    blob[0] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(ValueError):
        load_matrix(path)
    path.write_bytes(bytes(blob)[:40])
    with pytest.raises(ValueError):
        load_matrix(path)


def test_regeneration_matches_container(tmp_path):
    m = gaussian_transmission_matrix(20, 10, seed=99)
    path = tmp_path / "m.tmat"
    save_matrix(m, path)
    back = load_matrix(path)
    regenerated = gaussian_transmission_matrix(back.n_out, back.n_in, back.seed)
    assert regenerated.entries.tobytes() == back.entries.tobytes()
