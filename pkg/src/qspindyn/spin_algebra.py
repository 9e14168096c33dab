"""Spin operators for arbitrary spin, the d = 3 Gell-Mann basis, and state families.

Matrix conventions (hbar = 1 throughout):

* basis states are ordered ``|s; s>, |s; s-1>, ..., |s; -s>``;
* ``S_z`` is diagonal with entries ``s, s-1, ..., -s``;
* the ladder operators follow the standard matrix elements
  ``sqrt(s(s+1) - m(m +- 1))``.

The eight Gell-Mann matrices ``lambda_1 .. lambda_8`` form the traceless
orthogonal basis of su(3) used to decompose spin-1 states and Hamiltonians:
``Tr(lambda_i lambda_j) = 2 delta_ij``.  A spin-1 state is written as
``rho = (1/3)(I + sqrt(3) x . lambda)`` with the 8-component coherence
vector ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .densmat import DensityMatrix, hermiticity_defect

__all__ = [
    "SpinQuantumNumber",
    "SpinOperators",
    "GellMannBasis",
    "CoherenceVector",
    "SpinTypeState",
    "QutritMixtureState",
    "ExplicitState",
    "InitialStateSpec",
    "make_spin_operators",
    "make_gell_mann",
    "spin_from_gellmann_check",
    "build_initial_state",
    "to_coherence_vector",
    "from_coherence_vector",
]

_UNIT_AXIS_TOL = 1e-8


@dataclass(frozen=True)
class SpinQuantumNumber:
    """Spin s stored as the integer 2s, so half-integer spins are exact."""

    two_s: int

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or isinstance(self.two_s, bool):
            raise ValueError(f"two_s must be an integer, got {self.two_s!r}")
        if self.two_s < 1:
            raise ValueError(f"two_s must be >= 1, got {self.two_s}")

    @property
    def s(self) -> float:
        return self.two_s / 2.0

    @property
    def dim(self) -> int:
        return self.two_s + 1


@dataclass(frozen=True, eq=False)
class SpinOperators:
    """The triple (S_x, S_y, S_z) for one spin quantum number."""

    spin: SpinQuantumNumber
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dim(self) -> int:
        return self.spin.dim

    def as_tuple(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.sx, self.sy, self.sz)

    def along(self, axis) -> np.ndarray:
        """Projection ``n . S`` onto a 3-vector ``n``."""
        n = np.asarray(axis, dtype=float)
        return n[0] * self.sx + n[1] * self.sy + n[2] * self.sz


@dataclass(frozen=True, eq=False)
class GellMannBasis:
    """The eight 3x3 Gell-Mann matrices, index 0 holding lambda_1."""

    lambdas: np.ndarray

    def __post_init__(self):
        if self.lambdas.shape != (8, 3, 3):
            raise ValueError(f"expected shape (8, 3, 3), got {self.lambdas.shape}")

    def __getitem__(self, i: int) -> np.ndarray:
        return self.lambdas[i]

    def __len__(self) -> int:
        return 8


@dataclass(frozen=True, eq=False)
class CoherenceVector:
    """8-component real coherence vector of a spin-1 state."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.shape != (8,):
            raise ValueError(f"expected 8 components, got shape {x.shape}")
        norm_sq = float(x @ x)
        if not 0.0 <= norm_sq <= 1.0 + 1e-10:
            raise ValueError(f"|x|^2 = {norm_sq:.17g} outside [0, 1]")
        x = x.copy()
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.x @ self.x))


@dataclass(frozen=True)
class SpinTypeState:
    """State ``(1/d)(I + (m0/s) n . S)``; for s = 1 this is (1/3)(I + m0 n.S).

    The 1/s factor makes m0 = 1 saturate positivity for every spin, and
    reduces to the Bloch form ``(1/2)(I + m . sigma)`` at s = 1/2.
    """

    m0: float
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not np.isfinite(self.m0):
            raise ValueError("m0 must be finite")
        if self.m0 < 0.0:
            raise ValueError(f"m0 must be >= 0, got {self.m0}")
        if self.m0 > 1.0:
            raise ValueError(f"m0 exceeds positivity bound: {self.m0} > 1")
        axis = tuple(float(c) for c in self.axis)
        if len(axis) != 3:
            raise ValueError("axis must have 3 components")
        norm = float(np.sqrt(sum(c * c for c in axis)))
        if abs(norm - 1.0) > _UNIT_AXIS_TOL:
            raise ValueError(f"axis must be a unit vector, |axis| = {norm:.17g}")
        object.__setattr__(self, "m0", float(self.m0))
        object.__setattr__(self, "axis", axis)

    kind = "spin_type"


@dataclass(frozen=True)
class QutritMixtureState:
    """Mixture ``p |1;1><1;1| + (1-p) |1;-1><1;-1|`` (d = 3 only)."""

    p: float

    def __post_init__(self):
        if not np.isfinite(self.p) or not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    kind = "qutrit_mixture"


@dataclass(frozen=True, eq=False)
class ExplicitState:
    """A caller-supplied density matrix, validated when the state is built."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128).copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    kind = "explicit"


InitialStateSpec = Union[SpinTypeState, QutritMixtureState, ExplicitState]


def make_spin_operators(spin: SpinQuantumNumber) -> SpinOperators:
    """Build (S_x, S_y, S_z) from the standard ladder matrix elements.

    Parameters
    ----------
    spin : SpinQuantumNumber
        The spin, two_s >= 1.

    Returns
    -------
    SpinOperators
        Matrices of dimension ``two_s + 1`` satisfying
        ``[S_x, S_y] = i S_z`` (and cyclic) and the Casimir identity
        ``S_x^2 + S_y^2 + S_z^2 = s(s+1) I``.
    """
    s = spin.s
    d = spin.dim
    m = s - np.arange(d)
    sz = np.diag(m).astype(np.complex128)
    # raising operator: nonzero elements one place above the diagonal
    up = np.sqrt(s * (s + 1.0) - m[1:] * (m[1:] + 1.0))
    sp = np.zeros((d, d), dtype=np.complex128)
    sp[np.arange(d - 1), np.arange(1, d)] = up
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    for a in (sx, sy, sz):
        a.flags.writeable = False
    return SpinOperators(spin=spin, sx=sx, sy=sy, sz=sz)


def make_gell_mann() -> GellMannBasis:
    """The eight Gell-Mann matrices in the ``|1;1>, |1;0>, |1;-1>`` basis."""
    s3 = 1.0 / np.sqrt(3.0)
    lam = np.zeros((8, 3, 3), dtype=np.complex128)
    lam[0] = [[0, 1, 0], [1, 0, 0], [0, 0, 0]]
    lam[1] = [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]]
    lam[2] = np.diag([1.0, -1.0, 0.0])
    lam[3] = [[0, 0, 1], [0, 0, 0], [1, 0, 0]]
    lam[4] = [[0, 0, -1j], [0, 0, 0], [1j, 0, 0]]
    lam[5] = [[0, 0, 0], [0, 0, 1], [0, 1, 0]]
    lam[6] = [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]]
    lam[7] = np.diag([s3, s3, -2.0 * s3])
    lam.flags.writeable = False
    return GellMannBasis(lambdas=lam)


def spin_from_gellmann_check(
    ops: SpinOperators, gm: GellMannBasis, tol: float = 1e-12
) -> bool:
    """Verify the spin-1 operator decompositions over the Gell-Mann basis.

    Checks, entrywise within ``tol``:

    * ``S_x = (lambda_1 + lambda_6)/sqrt(2)``
    * ``S_y = (lambda_2 + lambda_7)/sqrt(2)``
    * ``S_z = (lambda_3 + sqrt(3) lambda_8)/2``
    * ``S_x^2 = (2/3) I - (1/4) lambda_3 + (1/2) lambda_4 + (1/(4 sqrt(3))) lambda_8``
    * ``S_z^2 = (2/3) I + (1/2) lambda_3 - (1/(2 sqrt(3))) lambda_8``

    Raises
    ------
    ValueError
        If the operators are not spin-1 (d != 3).
    """
    if ops.dim != 3:
        raise ValueError(f"decomposition check requires s = 1, got d = {ops.dim}")
    lam = gm.lambdas
    eye = np.eye(3)
    rt2 = np.sqrt(2.0)
    rt3 = np.sqrt(3.0)
    checks = [
        (ops.sx, (lam[0] + lam[5]) / rt2),
        (ops.sy, (lam[1] + lam[6]) / rt2),
        (ops.sz, 0.5 * (lam[2] + rt3 * lam[7])),
        (
            ops.sx @ ops.sx,
            (2.0 / 3.0) * eye - 0.25 * lam[2] + 0.5 * lam[3] + lam[7] / (4.0 * rt3),
        ),
        (
            ops.sz @ ops.sz,
            (2.0 / 3.0) * eye + 0.5 * lam[2] - lam[7] / (2.0 * rt3),
        ),
    ]
    return all(np.abs(lhs - rhs).max() <= tol for lhs, rhs in checks)


def build_initial_state(spec: InitialStateSpec, spin: SpinQuantumNumber) -> DensityMatrix:
    """Realize an initial-state specification as a validated DensityMatrix.

    Parameters
    ----------
    spec : InitialStateSpec
        One of :class:`SpinTypeState`, :class:`QutritMixtureState`,
        :class:`ExplicitState`.
    spin : SpinQuantumNumber
        Target spin; fixes the matrix dimension.

    Raises
    ------
    ValueError
        If the specification does not produce a valid state in this
        dimension (wrong size, negative eigenvalues, qutrit mixture with
        d != 3, ...).
    """
    d = spin.dim
    if isinstance(spec, SpinTypeState):
        ops = make_spin_operators(spin)
        scale = spec.m0 / spin.s
        mat = (np.eye(d) + scale * ops.along(spec.axis)) / d
        return DensityMatrix(mat)
    if isinstance(spec, QutritMixtureState):
        if d != 3:
            raise ValueError(f"qutrit_mixture requires d = 3, got d = {d}")
        mat = np.diag([spec.p, 0.0, 1.0 - spec.p]).astype(np.complex128)
        return DensityMatrix(mat)
    if isinstance(spec, ExplicitState):
        if spec.matrix.shape != (d, d):
            raise ValueError(
                f"explicit matrix has shape {spec.matrix.shape}, expected {(d, d)}"
            )
        return DensityMatrix(spec.matrix)
    raise TypeError(f"unknown initial-state spec: {spec!r}")


def to_coherence_vector(rho: DensityMatrix, gm: GellMannBasis) -> CoherenceVector:
    """Coherence vector ``x_i = (sqrt(3)/2) Tr(rho lambda_i)`` of a d = 3 state."""
    if rho.dim != 3:
        raise ValueError(f"coherence vector requires d = 3, got d = {rho.dim}")
    traces = np.einsum("iab,ba->i", gm.lambdas, rho.mat)
    if np.abs(traces.imag).max() > 1e-10:
        raise ValueError("state has non-Hermitian contamination")
    return CoherenceVector(x=(np.sqrt(3.0) / 2.0) * traces.real)


def from_coherence_vector(x: CoherenceVector, gm: GellMannBasis) -> DensityMatrix:
    """Reconstruct ``rho = (1/3)(I + sqrt(3) x . lambda)``."""
    mat = (np.eye(3) + np.sqrt(3.0) * np.einsum("i,iab->ab", x.x, gm.lambdas)) / 3.0
    if hermiticity_defect(mat) > 1e-12:
        raise ValueError("reconstruction produced a non-Hermitian matrix")
    return DensityMatrix(mat)
