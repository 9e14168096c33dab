"""Backend selection, numba/numpy parity, and thread-count independence."""

import os
import subprocess
import sys

import numpy as np
import pytest

from qspindyn import _kernels as K
from qspindyn.hamiltonian import HamiltonianSpec, build_hamiltonian
from qspindyn.spin_algebra import (
    SpinQuantumNumber,
    SpinTypeState,
    build_initial_state,
    make_spin_operators,
)

HAVE_NUMBA = K._nb is not None


def _spawn(code, env_extra):
    env = os.environ.copy()
    env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )


def test_backend_is_valid():
    assert K.BACKEND in ("numba", "numpy")


def test_backend_env_numpy():
    proc = _spawn(
        "from qspindyn import _kernels; print(_kernels.BACKEND)",
        {"QSPINDYN_BACKEND": "numpy"},
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "numpy"


def test_backend_env_invalid_fails_loudly():
    proc = _spawn(
        "import qspindyn", {"QSPINDYN_BACKEND": "cuda"}
    )
    assert proc.returncode != 0
    assert "QSPINDYN_BACKEND" in proc.stderr


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not importable")
def test_backend_env_numba():
    proc = _spawn(
        "from qspindyn import _kernels; print(_kernels.BACKEND)",
        {"QSPINDYN_BACKEND": "numba"},
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "numba"


def test_thread_cap_env(monkeypatch):
    monkeypatch.setenv("QSPINDYN_THREADS", "3")
    assert K.thread_cap() == 3
    monkeypatch.setenv("QSPINDYN_THREADS", "zero")
    with pytest.raises(ValueError):
        K.thread_cap()
    monkeypatch.setenv("QSPINDYN_THREADS", "0")
    with pytest.raises(ValueError):
        K.thread_cap()
    monkeypatch.delenv("QSPINDYN_THREADS")
    assert K.thread_cap() >= 1


def _problem():
    spin = SpinQuantumNumber(2)
    ops = make_spin_operators(spin)
    rho0 = build_initial_state(SpinTypeState(m0=0.9), spin)
    h = build_hamiltonian(
        HamiltonianSpec(b_field=(2**-0.5, 0.0, 2**-0.5), k_perp=0.3, k_par=-0.1), ops
    )
    return rho0.mat, h.mat


def _series(n=401, m=561):
    rng = np.random.default_rng(83)
    freqs = rng.uniform(0.5, 2.0, size=9)
    t_ref = 0.025 * np.arange(n)
    t_cand = 0.025 * np.arange(m)
    vals_ref = np.sin(freqs[:, None] * t_ref[None, :])
    vals_cand = np.sin(freqs[:, None] * t_cand[None, :] / 1.07)
    ders_cand = (freqs[:, None] / 1.07) * np.cos(freqs[:, None] * t_cand[None, :] / 1.07)
    return vals_ref, vals_cand, ders_cand


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not importable")
def test_rk4_parity_between_backends():
    rho0, h = _problem()
    for kind in (K.KIND_QLL, K.KIND_QLLG):
        s_np, d_np = K._rk4_traj_numpy(kind, rho0, h, 0.5, 0.01, 201, 10)
        s_nb, d_nb = K._rk4_traj_nb(kind, rho0, h, 0.5, 0.01, 201, 10)
        assert np.abs(s_np - s_nb).max() <= 1e-13
        assert np.abs(d_np - d_nb).max() <= 1e-13


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not importable")
def test_misfit_scan_parity_between_backends():
    vals_ref, vals_cand, ders_cand = _series()
    zetas = np.linspace(0.9, 1.2, 301)
    out_np = K._misfit_scan_numpy(vals_ref, vals_cand, ders_cand, 0.025, 0.025, zetas)
    K._apply_thread_cap()
    out_nb = K._misfit_scan_nb(vals_ref, vals_cand, ders_cand, 0.025, 0.025, zetas)
    assert np.abs(out_np - out_nb).max() <= 1e-13


def test_misfit_scan_thread_count_invariance():
    """Each zeta writes its own slot sequentially over time, so the result
    must be bitwise identical for any worker count."""
    vals_ref, vals_cand, ders_cand = _series()
    zetas = np.linspace(0.9, 1.2, 97)
    one = K._misfit_scan_numpy(
        vals_ref, vals_cand, ders_cand, 0.025, 0.025, zetas, threads=1
    )
    four = K._misfit_scan_numpy(
        vals_ref, vals_cand, ders_cand, 0.025, 0.025, zetas, threads=4
    )
    assert np.array_equal(one, four)


def test_misfit_single_matches_scan_column():
    vals_ref, vals_cand, ders_cand = _series()
    zetas = np.linspace(0.95, 1.15, 7)
    grid = K.misfit_scan(vals_ref, vals_cand, ders_cand, 0.025, 0.025, zetas)
    for zi, zeta in enumerate(zetas):
        for c in range(9):
            got = K.misfit_single(
                vals_ref[c], vals_cand[c], ders_cand[c], 0.025, 0.025, float(zeta)
            )
            assert abs(got - grid[zi, c]) <= 1e-15


def test_dispatch_rk4_matches_reference_impl():
    rho0, h = _problem()
    s, d = K.rk4_trajectory(K.KIND_QLLG, rho0, h, 0.5, 0.01, 101, 10)
    s_ref, d_ref = K._rk4_traj_numpy(K.KIND_QLLG, rho0, h, 0.5, 0.01, 101, 10)
    assert np.abs(s - s_ref).max() <= 1e-13
    assert np.abs(d - d_ref).max() <= 1e-13
