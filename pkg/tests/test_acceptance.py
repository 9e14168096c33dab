"""Acceptance gate: one test per top-level claim the package must reproduce.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` and in
failure output) and then asserts, so the suite's verdict and the printed
summary always agree.
"""

import math
import time

import numpy as np
import pytest

from qspindyn.densmat import DensityMatrix
from qspindyn.dynamics import DynamicsKind, IntegratorConfig, integrate
from qspindyn.hamiltonian import HamiltonianSpec, build_hamiltonian, triple_commutator_check
from qspindyn.misfit import (
    ObservableSeries,
    equivalence_verdict,
    interpolate,
    misfit_curves,
    misfit_magnitude_compare,
)
from qspindyn.observables import (
    fluctuation_summary,
    spin_expectation,
    trajectory_observables,
)
from qspindyn.spin_algebra import (
    SpinQuantumNumber,
    SpinTypeState,
    build_initial_state,
    make_gell_mann,
    make_spin_operators,
    spin_from_gellmann_check,
)

RT2 = math.sqrt(2.0)
RT3 = math.sqrt(3.0)


def _report(name: str, ok: bool, detail: str):
    print(f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


# --------------------------------------------------------------------------
# 1. operator algebra
# --------------------------------------------------------------------------


def test_acceptance_operator_algebra():
    t0 = time.monotonic()
    ops = make_spin_operators(SpinQuantumNumber(2))
    gm = make_gell_mann()

    sx_ref = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / RT2
    sy_ref = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / RT2
    sz_ref = np.diag([1.0, 0.0, -1.0]).astype(complex)
    lam_ref = [
        np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex),
        np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex),
        np.array([[1, 0, 0], [0, -1, 0], [0, 0, 0]], dtype=complex),
        np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex),
        np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex),
        np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex),
        np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex),
        np.diag([1.0, 1.0, -2.0]).astype(complex) / RT3,
    ]

    sx, sy, sz = ops.as_tuple()
    worst = max(
        np.abs(sx - sx_ref).max(),
        np.abs(sy - sy_ref).max(),
        np.abs(sz - sz_ref).max(),
        max(np.abs(gm[i] - lam_ref[i]).max() for i in range(8)),
    )
    decomp_ok = spin_from_gellmann_check(ops, gm, tol=1e-12)
    elapsed = time.monotonic() - t0
    _report(
        "operator algebra",
        worst <= 1e-14 and decomp_ok and elapsed < 1.0,
        f"entrywise {worst:.2e}, decompositions {decomp_ok}, {elapsed:.3f}s",
    )


# --------------------------------------------------------------------------
# 2. conservation suite
# --------------------------------------------------------------------------


def _conservation_report(traj, h, kappa):
    states = traj.states
    traces = np.einsum("tii->t", states).real
    purity = np.einsum("tab,tba->t", states, states).real
    energy = np.einsum("tab,ba->t", states, h).real

    trace_err = np.abs(traces - 1.0).max()
    purity_err = np.abs(purity - purity[0]).max()
    energy_increase = np.diff(energy).max()

    dt = traj.dt
    fd = (energy[2:] - energy[:-2]) / (2.0 * dt)
    if traj.kind is DynamicsKind.QLL:
        comm = states @ h - h @ states
        anal = -kappa * np.einsum("tab,tab->t", comm.conj(), comm).real
    else:
        anal = -kappa * np.einsum(
            "tab,tba->t", traj.derivatives, traj.derivatives
        ).real
    mid = anal[1:-1]
    mask = np.abs(mid) >= 1e-2 * np.abs(anal).max()
    rel = (np.abs(fd[mask] - mid[mask]) / np.abs(mid[mask])).max()
    return trace_err, purity_err, energy_increase, rel


def test_acceptance_conservation_suite(presets):
    worst = {"trace": 0.0, "purity": 0.0, "rise": -np.inf, "rel": 0.0}
    for name in (
        "rescalable",
        "case_i",
        "case_ii",
        "case_iii_qutrit_aniso",
        "spin_half_regression",
    ):
        res = presets(name)
        spin = SpinQuantumNumber(res.config.two_s)
        ops = make_spin_operators(spin)
        h = build_hamiltonian(
            HamiltonianSpec(
                b_field=res.config.b_field,
                k_perp=res.config.k_perp,
                k_par=res.config.k_par,
            ),
            ops,
        ).mat
        for traj in (res.trajectory_qll, res.trajectory_qllg):
            te, pe, rise, rel = _conservation_report(traj, h, res.config.kappa)
            worst["trace"] = max(worst["trace"], te)
            worst["purity"] = max(worst["purity"], pe)
            worst["rise"] = max(worst["rise"], rise)
            worst["rel"] = max(worst["rel"], rel)
    ok = (
        worst["trace"] <= 1e-9
        and worst["purity"] <= 1e-8
        and worst["rise"] <= 1e-10
        and worst["rel"] <= 1e-4
    )
    _report(
        "conservation suite",
        ok,
        f"trace {worst['trace']:.2e}, purity {worst['purity']:.2e}, "
        f"max energy rise {worst['rise']:.2e}, dE/dt rel {worst['rel']:.2e}",
    )


# --------------------------------------------------------------------------
# 3. one common rescaling exists for the spin-type Zeeman scenario
# --------------------------------------------------------------------------


def test_acceptance_rescalable(presets):
    res = presets("rescalable")
    elapsed = presets.timings["rescalable"]
    zs = np.array([c.zeta_min for c in res.curves])
    vs = np.array([c.value_min for c in res.curves])
    target = 1.0 + (1.0 / 9.0) * 0.25
    spread = zs.max() - zs.min()
    offset = np.abs(zs - target).max()
    ok = (
        spread <= 5e-4
        and offset <= 1e-3
        and vs.max() <= 1e-6
        and res.verdict.equivalent
        and elapsed < 300.0
    )
    _report(
        "rescalable equivalence",
        ok,
        f"spread {spread:.2e}, offset from {target:.5f} is {offset:.2e}, "
        f"max residual {vs.max():.2e}, {elapsed:.0f}s",
    )


# --------------------------------------------------------------------------
# 4. no common rescaling for anisotropy or qutrit mixtures
# --------------------------------------------------------------------------


def test_acceptance_inequivalence(presets):
    details = []
    ok = True
    for name in ("case_i", "case_ii"):
        v = presets(name).verdict
        details.append(f"{name}: spread {v.zeta_spread:.2e}, equivalent {v.equivalent}")
        ok = ok and (not v.equivalent) and v.zeta_spread > 5e-4
    _report("inequivalence", ok, "; ".join(details))


# --------------------------------------------------------------------------
# 5. misfit magnitude ordering between the two qutrit scenarios
# --------------------------------------------------------------------------


def test_acceptance_magnitude_ordering(presets):
    ratio = misfit_magnitude_compare(
        presets("case_ii").curves, presets("case_iii_qutrit_aniso").curves
    )
    _report(
        "magnitude ordering",
        3.0 <= ratio <= 30.0,
        f"worst-minimum ratio case_iii/case_ii = {ratio:.3f}, required [3, 30]",
    )


# --------------------------------------------------------------------------
# 6. spin-1/2 regression: rescaling equivalence is exact
# --------------------------------------------------------------------------


def test_acceptance_spin_half_regression():
    rng = np.random.default_rng(20250815)
    spin = SpinQuantumNumber(1)
    ops = make_spin_operators(spin)
    t_max, n_grid = 20.0, 2001
    dt = t_max / (n_grid - 1)
    n_ext = math.ceil((n_grid - 1) * 1.3) + 1
    worst_dev = 0.0
    worst_zeta_err = 0.0
    for _ in range(20):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        r = float(rng.uniform(0.05, 0.95))
        rho0 = DensityMatrix(0.5 * np.eye(2) + r * ops.along(n))
        bdir = rng.normal(size=3)
        bdir *= float(rng.uniform(0.5, 1.0)) / np.linalg.norm(bdir)
        h = build_hamiltonian(HamiltonianSpec(b_field=tuple(bdir)), ops)
        for kappa in (0.1, 0.5):
            cfg = IntegratorConfig(kappa=kappa, step=1e-3)
            traj_ll = integrate(DynamicsKind.QLL, rho0, h, cfg, t_max, n_grid)
            traj_g = integrate(DynamicsKind.QLLG, rho0, h, cfg, dt * (n_ext - 1), n_ext)
            s_ll = ObservableSeries.from_table(trajectory_observables(traj_ll, ops, h))
            s_g = ObservableSeries.from_table(trajectory_observables(traj_g, ops, h))
            curves = misfit_curves(s_ll, s_g, zeta_lo=0.9, zeta_hi=1.3, n_zeta=801)
            verdict = equivalence_verdict(curves)
            zeta = verdict.zeta_star
            dev = np.abs(interpolate(s_g, zeta * s_ll.times) - s_ll.values).max()
            worst_dev = max(worst_dev, dev)
            worst_zeta_err = max(worst_zeta_err, abs(zeta - (1.0 + kappa**2 * r * r)))
    _report(
        "spin-1/2 regression",
        worst_dev <= 1e-6,
        f"max component deviation {worst_dev:.2e} over 20 states x 2 kappas, "
        f"max |zeta - (1 + kappa^2 m0^2)| = {worst_zeta_err:.2e}",
    )


# --------------------------------------------------------------------------
# 7. triple-commutator identities
# --------------------------------------------------------------------------


def test_acceptance_triple_commutator():
    rho0 = build_initial_state(SpinTypeState(m0=1.0), SpinQuantumNumber(2))
    ops = make_spin_operators(SpinQuantumNumber(2))
    gm = make_gell_mann()

    bs = ops.along(np.array([1.0, 0.0, 1.0]) / RT2)
    zeeman = triple_commutator_check(rho0, bs, rel_tol=1e-10)
    aniso = triple_commutator_check(rho0, gm[3], reference=gm[4], rel_tol=1e-10)
    ok = (
        zeeman.is_proportional
        and abs(zeeman.ratio - 1.0 / 9.0) <= 1e-10
        and aniso.is_proportional
        and abs(aniso.ratio - 8j / 27.0) <= 1e-10
    )
    _report(
        "triple-commutator identities",
        ok,
        f"zeeman ratio {zeeman.ratio:.6g}, anisotropy ratio {aniso.ratio:.6g}",
    )


# --------------------------------------------------------------------------
# 8. fluctuation bounds for spin 1
# --------------------------------------------------------------------------


def test_acceptance_fluctuation_bounds():
    rng = np.random.default_rng(314159)
    ops = make_spin_operators(SpinQuantumNumber(2))
    worst_identity = 0.0
    lo, hi = np.inf, -np.inf
    for _ in range(10000):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m = a @ a.conj().T
        rho = DensityMatrix(m / m.trace().real)
        fs = fluctuation_summary(rho, ops)
        norm2 = spin_expectation(rho, ops).norm ** 2
        worst_identity = max(worst_identity, abs(fs.trace - (2.0 - norm2)))
        lo, hi = min(lo, fs.trace), max(hi, fs.trace)

    coherent = np.zeros((3, 3), dtype=complex)
    coherent[0, 0] = 1.0
    tr_coherent = fluctuation_summary(DensityMatrix(coherent), ops).trace
    a0 = 1.0 / math.sqrt(3.0)
    vec = np.array([a0, a0, -a0], dtype=complex)
    tr_anti = fluctuation_summary(DensityMatrix(np.outer(vec, vec.conj())), ops).trace

    ok = (
        worst_identity <= 1e-10
        and lo >= 1.0 - 1e-10
        and hi <= 2.0 + 1e-10
        and abs(tr_coherent - 1.0) <= 1e-12
        and abs(tr_anti - 2.0) <= 1e-12
    )
    _report(
        "fluctuation bounds",
        ok,
        f"trC in [{lo:.6f}, {hi:.6f}], identity dev {worst_identity:.2e}, "
        f"coherent {tr_coherent:.3f}, anti-coherent {tr_anti:.3f}",
    )


# --------------------------------------------------------------------------
# 9. the two flows stay qualitatively close at unit rescaling
# --------------------------------------------------------------------------


def test_acceptance_qualitative_gap(presets):
    details = []
    ok = True
    for name in ("case_i", "case_ii"):
        res = presets(name)
        n = res.trajectory_qll.n_grid
        gap = max(
            np.abs(res.table_qll[c] - res.table_qllg[c][:n]).max()
            for c in ("Sx", "Sy", "Sz")
        )
        details.append(f"{name}: gap {gap:.4f}")
        ok = ok and 1e-3 < gap < 0.15
    _report("qualitative similarity", ok, "; ".join(details))
