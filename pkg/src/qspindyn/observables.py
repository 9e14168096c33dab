"""Spin expectations, covariances, and fluctuation summaries.

For a state rho and spin operators (S_x, S_y, S_z) the observables are

* spin expectation   <S_j>   = Tr(rho S_j)
* covariance         C_jk    = Tr(rho {S_j, S_k}) / 2 - <S_j><S_k>
* fluctuation volume V_e     = (4 pi / 3) sqrt(det C)

The covariance matrix is real symmetric positive semidefinite; det C can
go negative by round-off for nearly singular C and is clamped at zero
before the square root.

Batched helpers evaluate the full set along a trajectory, including the
exact time derivatives obtained from the recorded d(rho)/dt, which the
misfit interpolation consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densmat import DensityMatrix
from .dynamics import Trajectory
from .hamiltonian import HamiltonianMatrix
from .spin_algebra import SpinOperators

__all__ = [
    "COMPONENT_LABELS",
    "SpinExpectation",
    "CovarianceMatrix",
    "FluctuationSummary",
    "spin_expectation",
    "covariance",
    "fluctuation_summary",
    "trajectory_observables",
]

# order of the nine compared observable components everywhere downstream
COMPONENT_LABELS = ("Sx", "Sy", "Sz", "Cxx", "Cxy", "Cxz", "Cyy", "Cyz", "Czz")

# (row, col) index pairs matching the six C components in COMPONENT_LABELS
_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))

IMAG_TOL = 1e-10
COV_PSD_TOL = 1e-10


@dataclass(frozen=True)
class SpinExpectation:
    """Real expectation vector (<S_x>, <S_y>, <S_z>)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"expected shape (3,), got {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric positive semidefinite 3x3 spin covariance."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected shape (3, 3), got {m.shape}")
        if np.abs(m - m.T).max() > IMAG_TOL:
            raise ValueError("covariance matrix is not symmetric")
        if np.linalg.eigvalsh(m)[0] < -COV_PSD_TOL:
            raise ValueError(
                f"covariance matrix has eigenvalue {np.linalg.eigvalsh(m)[0]:.3e} < "
                f"-{COV_PSD_TOL:.0e}"
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


@dataclass(frozen=True)
class FluctuationSummary:
    """Scalar fluctuation measures derived from one covariance matrix."""

    trace: float
    det: float
    volume: float


def _expectations(states: np.ndarray, ops: SpinOperators) -> np.ndarray:
    """Stack Tr(rho S_j) over states; (T, d, d) -> real (T, 3)."""
    s_ops = np.stack(ops.as_tuple())
    raw = np.einsum("tab,jba->tj", states, s_ops)
    if np.abs(raw.imag).max() > IMAG_TOL:
        raise ValueError(
            f"spin expectation has imaginary part {np.abs(raw.imag).max():.3e}; "
            "state is not Hermitian enough"
        )
    return raw.real


def _covariances(states: np.ndarray, exps: np.ndarray, ops: SpinOperators) -> np.ndarray:
    """Six covariance components per state, ordered as in COMPONENT_LABELS."""
    s = ops.as_tuple()
    acomm = np.stack([s[i] @ s[j] + s[j] @ s[i] for i, j in _PAIRS])
    half = 0.5 * np.einsum("tab,pba->tp", states, acomm).real
    prod = np.stack([exps[:, i] * exps[:, j] for i, j in _PAIRS], axis=1)
    return half - prod


def _cov_matrix_from_six(six: np.ndarray) -> np.ndarray:
    cxx, cxy, cxz, cyy, cyz, czz = six
    return np.array([[cxx, cxy, cxz], [cxy, cyy, cyz], [cxz, cyz, czz]])


def spin_expectation(rho: DensityMatrix, ops: SpinOperators) -> SpinExpectation:
    """Expectation vector of the three spin components in one state."""
    return SpinExpectation(_expectations(rho.mat[None], ops)[0])


def covariance(rho: DensityMatrix, ops: SpinOperators) -> CovarianceMatrix:
    """Symmetrized spin covariance matrix of one state."""
    states = rho.mat[None]
    exps = _expectations(states, ops)
    six = _covariances(states, exps, ops)[0]
    return CovarianceMatrix(_cov_matrix_from_six(six))


def fluctuation_summary(rho: DensityMatrix, ops: SpinOperators) -> FluctuationSummary:
    """Trace, determinant, and ellipsoid volume of the covariance matrix.

    The volume is (4 pi / 3) sqrt(det C) with the determinant clamped at
    zero, so states with a singular covariance report volume 0 exactly.
    """
    cov = covariance(rho, ops)
    det = cov.det
    volume = (4.0 * math.pi / 3.0) * math.sqrt(max(det, 0.0))
    return FluctuationSummary(trace=cov.trace, det=det, volume=volume)


def trajectory_observables(
    traj: Trajectory, ops: SpinOperators, h: HamiltonianMatrix
) -> dict[str, np.ndarray]:
    """All recorded scalar observables along a trajectory.

    Parameters
    ----------
    traj : Trajectory
        Integrated trajectory; its stored d(rho)/dt supplies the exact
        derivative columns.
    ops : SpinOperators
        Spin operators matching the trajectory dimension.
    h : HamiltonianMatrix
        Hamiltonian used for the energy column.

    Returns
    -------
    dict of str to numpy.ndarray
        Keys ``t``, the nine component labels, ``purity``, ``energy``,
        ``Ve``, ``trC``, and ``dSx`` ... ``dCzz`` (time derivatives of the
        nine components), each a 1-D array over the grid.
    """
    if ops.spin.dim != traj.dim:
        raise ValueError(f"dimension mismatch: operators {ops.spin.dim}, trajectory {traj.dim}")
    states = traj.states
    derivs = traj.derivatives

    exps = _expectations(states, ops)
    six = _covariances(states, exps, ops)

    s_ops = np.stack(ops.as_tuple())
    d_exps = np.einsum("tab,jba->tj", derivs, s_ops).real
    acomm = np.stack([s_ops[i] @ s_ops[j] + s_ops[j] @ s_ops[i] for i, j in _PAIRS])
    d_half = 0.5 * np.einsum("tab,pba->tp", derivs, acomm).real
    d_prod = np.stack(
        [d_exps[:, i] * exps[:, j] + exps[:, i] * d_exps[:, j] for i, j in _PAIRS], axis=1
    )
    d_six = d_half - d_prod

    purity = np.einsum("tab,tba->t", states, states).real
    energy = np.einsum("tab,ba->t", states, h.mat).real

    cov_mats = np.empty((states.shape[0], 3, 3))
    cov_mats[:, 0, 0] = six[:, 0]
    cov_mats[:, 0, 1] = cov_mats[:, 1, 0] = six[:, 1]
    cov_mats[:, 0, 2] = cov_mats[:, 2, 0] = six[:, 2]
    cov_mats[:, 1, 1] = six[:, 3]
    cov_mats[:, 1, 2] = cov_mats[:, 2, 1] = six[:, 4]
    cov_mats[:, 2, 2] = six[:, 5]
    dets = np.linalg.det(cov_mats)
    volumes = (4.0 * math.pi / 3.0) * np.sqrt(np.clip(dets, 0.0, None))
    tr_c = six[:, 0] + six[:, 3] + six[:, 5]

    out: dict[str, np.ndarray] = {"t": traj.times.copy()}
    for j, label in enumerate(COMPONENT_LABELS[:3]):
        out[label] = exps[:, j]
    for p, label in enumerate(COMPONENT_LABELS[3:]):
        out[label] = six[:, p]
    out["purity"] = purity
    out["energy"] = energy
    out["Ve"] = volumes
    out["trC"] = tr_c
    for j, label in enumerate(COMPONENT_LABELS[:3]):
        out["d" + label] = d_exps[:, j]
    for p, label in enumerate(COMPONENT_LABELS[3:]):
        out["d" + label] = d_six[:, p]
    return out
