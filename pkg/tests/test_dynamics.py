"""Equations of motion and integrators: identities, convergence, guards."""

import numpy as np
import pytest

from qspindyn.densmat import DensityMatrix
from qspindyn.dynamics import (
    DynamicsKind,
    IntegrationError,
    IntegratorConfig,
    IntegratorMethod,
    integrate,
    rhs,
)
from qspindyn.hamiltonian import HamiltonianSpec, build_hamiltonian
from qspindyn.spin_algebra import (
    SpinQuantumNumber,
    SpinTypeState,
    build_initial_state,
    make_spin_operators,
)

RT2 = np.sqrt(2.0)


def _setup(two_s=2, m0=1.0, axis=(0.0, 0.0, 1.0), b=None, k_perp=0.0, k_par=0.0):
    spin = SpinQuantumNumber(two_s)
    ops = make_spin_operators(spin)
    rho0 = build_initial_state(SpinTypeState(m0=m0, axis=axis), spin)
    if b is None:
        b = (1.0 / RT2, 0.0, 1.0 / RT2)
    h = build_hamiltonian(HamiltonianSpec(b_field=b, k_perp=k_perp, k_par=k_par), ops)
    return spin, ops, rho0, h


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(step=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(kappa=-0.5)
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=-1e-10)
    with pytest.raises(ValueError):
        IntegratorConfig(method="rk4_fixed")


def test_integrate_argument_validation():
    _, _, rho0, h = _setup()
    cfg = IntegratorConfig(kappa=0.5)
    with pytest.raises(ValueError):
        integrate(DynamicsKind.QLL, rho0, h, cfg, -1.0, 100)
    with pytest.raises(ValueError):
        integrate(DynamicsKind.QLL, rho0, h, cfg, 1.0, 1)
    _, ops2, _, _ = _setup(two_s=1)
    h2 = build_hamiltonian(HamiltonianSpec(b_field=(0.0, 0.0, 1.0)), ops2)
    with pytest.raises(ValueError):
        integrate(DynamicsKind.QLL, rho0, h2, cfg, 1.0, 100)


def test_rhs_hermitian_traceless():
    rng = np.random.default_rng(41)
    _, _, _, h = _setup(k_perp=0.3, k_par=-0.1)
    for _ in range(20):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m = a @ a.conj().T
        rho = DensityMatrix(m / m.trace().real)
        for kind in DynamicsKind:
            dot = rhs(kind, rho, h, 0.5)
            assert np.abs(dot - dot.conj().T).max() <= 1e-12
            assert abs(dot.trace()) <= 1e-12


def test_spin_half_rhs_proportionality():
    """For spin 1/2 the implicit equation collapses onto the explicit one
    divided by 1 + kappa^2 m0^2, with m0^2 = 2 Tr(rho^2) - 1."""
    rng = np.random.default_rng(43)
    spin = SpinQuantumNumber(1)
    ops = make_spin_operators(spin)
    for _ in range(50):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        r = float(rng.uniform(0.0, 1.0))
        rho = DensityMatrix(0.5 * np.eye(2) + r * ops.along(n))
        b = rng.normal(size=3)
        h = build_hamiltonian(HamiltonianSpec(b_field=tuple(b)), ops)
        kappa = float(rng.uniform(0.05, 2.0))
        m0_sq = 2.0 * rho.purity() - 1.0
        lhs = rhs(DynamicsKind.QLLG, rho, h, kappa)
        ref = rhs(DynamicsKind.QLL, rho, h, kappa) / (1.0 + kappa**2 * m0_sq)
        assert np.abs(lhs - ref).max() <= 1e-12


def test_kappa_zero_conserves_energy_and_purity():
    _, ops, rho0, h = _setup(k_perp=0.3)
    cfg = IntegratorConfig(kappa=0.0, step=1e-3)
    traj = integrate(DynamicsKind.QLL, rho0, h, cfg, 5.0, 501)
    energies = np.einsum("tab,ba->t", traj.states, h.mat).real
    purities = np.einsum("tab,tba->t", traj.states, traj.states).real
    assert np.abs(energies - energies[0]).max() <= 1e-10
    assert np.abs(purities - purities[0]).max() <= 1e-10


@pytest.mark.parametrize("kind", list(DynamicsKind))
def test_purity_and_trace_conserved_with_damping(kind):
    _, _, rho0, h = _setup(m0=0.9, k_perp=0.3, k_par=-0.1)
    cfg = IntegratorConfig(kappa=0.5, step=1e-3)
    traj = integrate(kind, rho0, h, cfg, 10.0, 1001)
    traces = np.einsum("tii->t", traj.states).real
    purities = np.einsum("tab,tba->t", traj.states, traj.states).real
    assert np.abs(traces - 1.0).max() <= 1e-12
    assert np.abs(purities - purities[0]).max() <= 1e-10


@pytest.mark.parametrize("kind", list(DynamicsKind))
def test_recorded_derivatives_match_rhs(kind):
    _, _, rho0, h = _setup(k_perp=0.3)
    cfg = IntegratorConfig(kappa=0.5, step=1e-3)
    traj = integrate(kind, rho0, h, cfg, 2.0, 41)
    for i in (0, 7, 40):
        state = DensityMatrix(traj.states[i])
        want = rhs(kind, state, h, 0.5)
        assert np.abs(traj.derivatives[i] - want).max() <= 1e-13


def test_times_equidistant_and_properties():
    _, _, rho0, h = _setup()
    cfg = IntegratorConfig(kappa=0.5)
    traj = integrate(DynamicsKind.QLL, rho0, h, cfg, 4.0, 101)
    assert traj.n_grid == 101
    assert traj.dim == 3
    diffs = np.diff(traj.times)
    assert np.abs(diffs - traj.dt).max() <= 1e-12 * traj.dt
    assert abs(traj.times[-1] - 4.0) <= 1e-12


@pytest.mark.parametrize("kind", list(DynamicsKind))
def test_rk4_fourth_order_convergence(kind):
    """Halving the step shrinks the endpoint error by about 2^4."""
    _, _, rho0, h = _setup(m0=0.9, k_perp=0.3, k_par=-0.1)

    def endpoint(step):
        cfg = IntegratorConfig(kappa=0.5, step=step)
        return integrate(kind, rho0, h, cfg, 2.0, 2).states[-1]

    ref = endpoint(0.00125)
    err_h = np.abs(endpoint(0.04) - ref).max()
    err_h2 = np.abs(endpoint(0.02) - ref).max()
    ratio = err_h / err_h2
    assert 12.0 <= ratio <= 20.0, f"convergence ratio {ratio}"


def test_rk45_matches_rk4():
    _, _, rho0, h = _setup(m0=0.9, k_perp=0.3, k_par=-0.1)
    cfg4 = IntegratorConfig(kappa=0.5, step=5e-4)
    cfg5 = IntegratorConfig(
        method=IntegratorMethod.RK45_ADAPTIVE, kappa=0.5, rtol=1e-11, atol=1e-13
    )
    t4 = integrate(DynamicsKind.QLLG, rho0, h, cfg4, 5.0, 251)
    t5 = integrate(DynamicsKind.QLLG, rho0, h, cfg5, 5.0, 251)
    assert np.abs(t4.states - t5.states).max() <= 1e-7


def test_blowup_raises_integration_error():
    """A step far beyond the stability limit must fail loudly, not return
    a poisoned trajectory."""
    _, _, rho0, h = _setup(b=(0.0, 0.0, 6.0), k_perp=2.0)
    cfg = IntegratorConfig(kappa=6.0, step=1.0)
    with pytest.raises(IntegrationError):
        integrate(DynamicsKind.QLL, rho0, h, cfg, 20.0, 21)
