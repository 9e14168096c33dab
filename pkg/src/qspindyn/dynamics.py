"""Right-hand sides and time integration for the two damped spin equations.

The two dynamics kinds evolve a density matrix rho under a Hamiltonian H
with damping constant kappa >= 0:

* ``QLL``   rho' = i[rho, H] - kappa [rho, [rho, H]]        (explicit)
* ``QLLG``  rho' = i[rho, H] + i kappa [rho, rho']          (implicit)

The implicit form is resolved exactly at every stage evaluation by the
d^2 x d^2 linear solve in :func:`qspindyn.densmat.solve_implicit_rhs`; no
lagged-derivative approximation is used anywhere, since an O(h) bias there
would corrupt the rescaling-misfit analysis at the level that matters.

Integration is fixed-step RK4 by default (deterministic grids make misfit
comparisons exactly reproducible); an adaptive embedded RK45 is available
for cross-checks.  The internal step is decoupled from the output grid.
After every internal step the state is Hermitian-symmetrized and trace
renormalized; positivity is monitored on the recorded snapshots but never
enforced, so a violation surfaces as an error instead of being hidden.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .densmat import DensityMatrix, commutator, solve_implicit_rhs
from .hamiltonian import HamiltonianMatrix

__all__ = [
    "DEFAULT_STEP",
    "DynamicsKind",
    "IntegratorMethod",
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "PositivityError",
    "rhs",
    "integrate",
]

log = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3

# recorded eigenvalues below this signal a solver failure, not round-off
POSITIVITY_MONITOR_TOL = 1e-6


class DynamicsKind(Enum):
    QLL = "qll"
    QLLG = "qllg"


class IntegratorMethod(Enum):
    RK4_FIXED = "rk4_fixed"
    RK45_ADAPTIVE = "rk45_adaptive"


class IntegrationError(RuntimeError):
    """The integrator produced an unusable trajectory."""


class PositivityError(IntegrationError):
    """A recorded state left the physical cone beyond the monitor tolerance."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration method, step control, and the damping constant."""

    method: IntegratorMethod = IntegratorMethod.RK4_FIXED
    step: float = DEFAULT_STEP
    rtol: float = 1e-10
    atol: float = 1e-12
    kappa: float = 0.0

    def __post_init__(self):
        if not isinstance(self.method, IntegratorMethod):
            raise ValueError(f"method must be an IntegratorMethod, got {self.method!r}")
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be > 0")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Equidistant time grid with recorded states and their derivatives."""

    kind: DynamicsKind
    times: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray

    def __post_init__(self):
        for name in ("times", "states", "derivatives"):
            arr = getattr(self, name)
            arr.flags.writeable = False

    @property
    def n_grid(self) -> int:
        return self.times.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def _kind_code(kind: DynamicsKind) -> int:
    return _kernels.KIND_QLL if kind is DynamicsKind.QLL else _kernels.KIND_QLLG


def rhs(kind: DynamicsKind, rho, h, kappa: float) -> np.ndarray:
    """Evaluate the right-hand side of one dynamics kind at a single state.

    Parameters
    ----------
    kind : DynamicsKind
        Which equation to evaluate.
    rho : DensityMatrix or array_like
        Current state.
    h : HamiltonianMatrix or array_like
        Hamiltonian.
    kappa : float
        Damping constant, >= 0.

    Returns
    -------
    numpy.ndarray
        Hermitian, traceless time derivative of rho.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    r = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    hm = h.mat if isinstance(h, HamiltonianMatrix) else np.asarray(h, dtype=np.complex128)
    if r.shape != hm.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {hm.shape}")
    c = commutator(r, hm)
    if kind is DynamicsKind.QLL:
        if kappa == 0.0:
            return 1j * c
        return 1j * c - kappa * commutator(r, c)
    return solve_implicit_rhs(r, 1j * c, kappa)


# Dormand-Prince 5(4) tableau
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _dp54_step(kind_code, rho, h, kappa, step):
    ks = []
    for row in _DP_A:
        y = rho
        for a, k in zip(row, ks):
            if a != 0.0:
                y = y + (step * a) * k
        ks.append(_kernels._rhs_numpy(kind_code, y, h, kappa))
    y5 = rho
    y4 = rho
    for b5, b4, k in zip(_DP_B5, _DP_B4, ks):
        if b5 != 0.0:
            y5 = y5 + (step * b5) * k
        if b4 != 0.0:
            y4 = y4 + (step * b4) * k
    return y5, float(np.abs(y5 - y4).max())


def _rk45_traj(kind_code, rho0, h, kappa, dt, n_out, rtol, atol):
    d = rho0.shape[0]
    states = np.empty((n_out, d, d), dtype=np.complex128)
    derivs = np.empty((n_out, d, d), dtype=np.complex128)
    rho = rho0.copy()
    step = dt
    for i in range(n_out - 1):
        states[i] = rho
        derivs[i] = _kernels._rhs_numpy(kind_code, rho, h, kappa)
        remaining = dt
        while remaining > 1e-14 * dt:
            step = min(step, remaining)
            trial, err = _dp54_step(kind_code, rho, h, kappa, step)
            scale = atol + rtol * max(np.abs(rho).max(), np.abs(trial).max())
            ratio = err / scale
            if ratio <= 1.0:
                remaining -= step
                trial = 0.5 * (trial + trial.conj().T)
                rho = trial / trial.trace().real
            grow = 5.0 if ratio == 0.0 else 0.9 * ratio ** -0.2
            step *= min(5.0, max(0.2, grow))
    states[n_out - 1] = rho
    derivs[n_out - 1] = _kernels._rhs_numpy(kind_code, rho, h, kappa)
    return states, derivs


def _validate_recorded(kind, times, states):
    finite = np.isfinite(states.view(np.float64))
    if not finite.all():
        bad = int(np.nonzero(~finite.reshape(states.shape[0], -1).all(axis=1))[0][0])
        raise IntegrationError(
            f"{kind.value}: non-finite state at t = {times[bad]:.9g}; "
            "the step size is too large for this problem"
        )
    eigs = np.linalg.eigvalsh(states)
    lows = eigs[:, 0]
    if lows.min() < -POSITIVITY_MONITOR_TOL:
        bad = int(np.argmin(lows))
        raise PositivityError(
            f"{kind.value}: state at t = {times[bad]:.9g} has eigenvalue "
            f"{lows[bad]:.6e} beyond the -{POSITIVITY_MONITOR_TOL:.0e} monitor; "
            "the step size is too large for this problem"
        )


def integrate(
    kind: DynamicsKind,
    rho0: DensityMatrix,
    h: HamiltonianMatrix,
    cfg: IntegratorConfig,
    t_max: float,
    n_grid: int,
) -> Trajectory:
    """Integrate one dynamics kind and record it on an equidistant grid.

    Parameters
    ----------
    kind : DynamicsKind
        Equation to integrate.
    rho0 : DensityMatrix
        Initial state.
    h : HamiltonianMatrix
        Hamiltonian, same dimension as the state.
    cfg : IntegratorConfig
        Method, step control, and kappa.
    t_max : float
        Final time, > 0.
    n_grid : int
        Number of recorded points including both endpoints, >= 2.

    Returns
    -------
    Trajectory
        Times ``0, dt, ..., t_max`` with states and derivatives.

    Raises
    ------
    PositivityError
        If any recorded state has an eigenvalue below the monitor
        tolerance (the step is too large for the requested problem).
    IntegrationError
        If the solver produced non-finite entries.
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    if n_grid < 2:
        raise ValueError(f"n_grid must be >= 2, got {n_grid}")
    if rho0.dim != h.dim:
        raise ValueError(f"dimension mismatch: state {rho0.dim}, hamiltonian {h.dim}")

    dt = t_max / (n_grid - 1)
    code = _kind_code(kind)
    try:
        if cfg.method is IntegratorMethod.RK4_FIXED:
            substeps = max(1, math.ceil(dt / cfg.step - 1e-12))
            states, derivs = _kernels.rk4_trajectory(
                code, rho0.mat, h.mat, cfg.kappa, dt, n_grid, substeps
            )
        else:
            states, derivs = _rk45_traj(
                code, rho0.mat, h.mat, cfg.kappa, dt, n_grid, cfg.rtol, cfg.atol
            )
    except (ZeroDivisionError, np.linalg.LinAlgError) as exc:
        # A diverging state can zero its trace or make the implicit system
        # singular before the non-finite monitor sees a recorded node.
        raise IntegrationError(
            f"integration diverged ({exc}); the step size is too large "
            "for this scenario"
        ) from exc
    times = dt * np.arange(n_grid)

    _validate_recorded(kind, times, states)

    traces = np.einsum("tii->t", states).real
    purities = np.einsum("tab,tba->t", states, states).real
    log.debug(
        "%s trajectory: trace drift %.3e, purity %.6f -> %.6f over %d points",
        kind.value,
        float(np.abs(traces - 1.0).max()),
        float(purities[0]),
        float(purities[-1]),
        n_grid,
    )
    return Trajectory(kind=kind, times=times, states=states, derivatives=derivs)
