"""Spin expectations, covariance matrices, and fluctuation measures."""

import math

import numpy as np
import pytest

from qspindyn.densmat import DensityMatrix
from qspindyn.dynamics import DynamicsKind, IntegratorConfig, integrate
from qspindyn.hamiltonian import HamiltonianSpec, build_hamiltonian
from qspindyn.observables import (
    COMPONENT_LABELS,
    CovarianceMatrix,
    covariance,
    fluctuation_summary,
    spin_expectation,
    trajectory_observables,
)
from qspindyn.spin_algebra import (
    ExplicitState,
    SpinQuantumNumber,
    SpinTypeState,
    build_initial_state,
    make_spin_operators,
)


@pytest.fixture(scope="module")
def ops3():
    return make_spin_operators(SpinQuantumNumber(2))


def _random_state(rng, d=3):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return DensityMatrix(m / m.trace().real)


def test_component_labels_order():
    assert COMPONENT_LABELS == (
        "Sx", "Sy", "Sz", "Cxx", "Cxy", "Cxz", "Cyy", "Cyz", "Czz",
    )


def test_coherent_state_observables(ops3):
    """The maximal-weight state points along z with transverse variances
    1/2 each: Tr C = 1, singular C, zero ellipsoid volume."""
    pure = np.zeros((3, 3), dtype=complex)
    pure[0, 0] = 1.0
    rho = DensityMatrix(pure)
    exp = spin_expectation(rho, ops3)
    assert np.abs(exp.values - np.array([0.0, 0.0, 1.0])).max() <= 1e-14
    cov = covariance(rho, ops3)
    assert np.abs(cov.matrix - np.diag([0.5, 0.5, 0.0])).max() <= 1e-14
    fs = fluctuation_summary(rho, ops3)
    assert abs(fs.trace - 1.0) <= 1e-14
    assert fs.volume == 0.0


def test_maximally_mixed_observables(ops3):
    rho = DensityMatrix(np.eye(3, dtype=complex) / 3.0)
    exp = spin_expectation(rho, ops3)
    assert np.abs(exp.values).max() <= 1e-14
    fs = fluctuation_summary(rho, ops3)
    assert abs(fs.trace - 2.0) <= 1e-14
    assert abs(fs.det - 8.0 / 27.0) <= 1e-14
    assert abs(fs.volume - (4.0 * math.pi / 3.0) * math.sqrt(8.0 / 27.0)) <= 1e-14


def test_anticoherent_state_attains_trace_two(ops3):
    """a|+1> + b|0> - a|-1> with real a, b has zero spin expectation, so
    Tr C reaches the ceiling 2."""
    a = 1.0 / np.sqrt(3.0)
    vec = np.array([a, a, -a], dtype=complex)
    rho = DensityMatrix(np.outer(vec, vec.conj()))
    exp = spin_expectation(rho, ops3)
    assert np.abs(exp.values).max() <= 1e-14
    fs = fluctuation_summary(rho, ops3)
    assert abs(fs.trace - 2.0) <= 1e-12


def test_trace_identity_random_states(ops3):
    """Tr C = 2 - |<S>|^2 for every spin-1 state."""
    rng = np.random.default_rng(61)
    for _ in range(500):
        rho = _random_state(rng)
        exp = spin_expectation(rho, ops3)
        fs = fluctuation_summary(rho, ops3)
        assert abs(fs.trace - (2.0 - exp.norm**2)) <= 1e-10
        assert 1.0 - 1e-10 <= fs.trace <= 2.0 + 1e-10


def test_spin_norm_bounded_by_s():
    rng = np.random.default_rng(67)
    for two_s in (1, 2, 3, 5):
        spin = SpinQuantumNumber(two_s)
        ops = make_spin_operators(spin)
        for _ in range(50):
            rho = _random_state(rng, spin.dim)
            assert spin_expectation(rho, ops).norm <= spin.s + 1e-10


def test_covariance_psd_and_symmetric(ops3):
    rng = np.random.default_rng(71)
    for _ in range(200):
        cov = covariance(_random_state(rng), ops3)
        evs = np.linalg.eigvalsh(cov.matrix)
        assert evs.min() >= -1e-10
        assert np.abs(cov.matrix - cov.matrix.T).max() <= 1e-12


def test_covariance_matrix_validation():
    with pytest.raises(ValueError):
        CovarianceMatrix(np.diag([1.0, 1.0, -0.5]))
    with pytest.raises(ValueError):
        CovarianceMatrix(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))


def test_det_clamped_to_zero(ops3):
    """A pure coherent state has singular covariance; round-off must not
    produce a NaN volume."""
    pure = np.zeros((3, 3), dtype=complex)
    pure[2, 2] = 1.0
    fs = fluctuation_summary(DensityMatrix(pure), ops3)
    assert fs.volume == 0.0 and not math.isnan(fs.volume)


def _short_trajectory(ops):
    spin = SpinQuantumNumber(2)
    rho0 = build_initial_state(SpinTypeState(m0=0.9), spin)
    h = build_hamiltonian(
        HamiltonianSpec(b_field=(2**-0.5, 0.0, 2**-0.5), k_perp=0.3, k_par=-0.1), ops
    )
    cfg = IntegratorConfig(kappa=0.5, step=1e-3)
    traj = integrate(DynamicsKind.QLL, rho0, h, cfg, 2.0, 2001)
    return traj, h


def test_trajectory_table_matches_single_state_api(ops3):
    traj, h = _short_trajectory(ops3)
    table = trajectory_observables(traj, ops3, h)
    assert set(table) == set(("t",) + COMPONENT_LABELS + ("purity", "energy", "Ve", "trC"))\
        | {"d" + c for c in COMPONENT_LABELS}
    for i in (0, 500, 2000):
        rho = DensityMatrix(traj.states[i])
        exp = spin_expectation(rho, ops3)
        cov = covariance(rho, ops3)
        fs = fluctuation_summary(rho, ops3)
        assert abs(table["Sx"][i] - exp.values[0]) <= 1e-12
        assert abs(table["Cxy"][i] - cov.matrix[0, 1]) <= 1e-12
        assert abs(table["Czz"][i] - cov.matrix[2, 2]) <= 1e-12
        assert abs(table["Ve"][i] - fs.volume) <= 1e-12
        assert abs(table["trC"][i] - fs.trace) <= 1e-12
        assert abs(table["purity"][i] - rho.purity()) <= 1e-12
        assert abs(table["energy"][i] - np.trace(rho.mat @ h.mat).real) <= 1e-12


def test_derivative_columns_match_finite_differences(ops3):
    """The stored exact derivatives must agree with central differences of
    the value columns to the grid's truncation order."""
    traj, h = _short_trajectory(ops3)
    table = trajectory_observables(traj, ops3, h)
    dt = traj.dt
    for label in COMPONENT_LABELS:
        vals = table[label]
        ders = table["d" + label]
        fd = (vals[2:] - vals[:-2]) / (2.0 * dt)
        assert np.abs(fd - ders[1:-1]).max() <= 5e-6


def test_dimension_mismatch_rejected(ops3):
    spin2 = SpinQuantumNumber(1)
    ops2 = make_spin_operators(spin2)
    rho0 = build_initial_state(ExplicitState(matrix=np.diag([0.6, 0.4]).astype(complex)), spin2)
    h2 = build_hamiltonian(HamiltonianSpec(b_field=(0.0, 0.0, 1.0)), ops2)
    traj = integrate(DynamicsKind.QLL, rho0, h2, IntegratorConfig(kappa=0.1), 1.0, 11)
    with pytest.raises(ValueError):
        trajectory_observables(traj, ops3, h2)
