"""Zeeman plus anisotropy Hamiltonian and its su(3) structure.

The model is ``H = -B . S + k_perp S_x^2 + k_par S_z^2`` in code units
where the gyromagnetic factor times the reference field is 1; energies are
measured in that unit and times in its inverse.  The physical time scale
(of order 10 ps for typical fields) never enters the computation and is
display metadata only.

For d = 3 the module also exposes the Gell-Mann decomposition of any
Hermitian matrix and the triple-commutator proportionality probe used to
distinguish the two damping structures analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densmat import DensityMatrix, commutator, hermiticity_defect
from .spin_algebra import GellMannBasis, SpinOperators

__all__ = [
    "HamiltonianSpec",
    "HamiltonianMatrix",
    "TripleCommutatorResult",
    "build_hamiltonian",
    "gellmann_decompose",
    "triple_commutator_check",
]


@dataclass(frozen=True)
class HamiltonianSpec:
    """Field vector and anisotropy constants, all in code energy units.

    No sign constraints are imposed; an easy z-axis corresponds to
    ``k_par < 0 < k_perp`` but that is a scenario choice, not a type law.
    """

    b_field: tuple[float, float, float]
    k_perp: float = 0.0
    k_par: float = 0.0

    def __post_init__(self):
        b = tuple(float(c) for c in self.b_field)
        if len(b) != 3:
            raise ValueError("b_field must have 3 components")
        if not all(np.isfinite(c) for c in b):
            raise ValueError("b_field components must be finite")
        if not np.isfinite(self.k_perp) or not np.isfinite(self.k_par):
            raise ValueError("anisotropy constants must be finite")
        object.__setattr__(self, "b_field", b)
        object.__setattr__(self, "k_perp", float(self.k_perp))
        object.__setattr__(self, "k_par", float(self.k_par))


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Hermitian realization of a HamiltonianSpec."""

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=np.complex128).copy()
        defect = hermiticity_defect(m)
        if defect > 1e-12:
            raise ValueError(f"Hamiltonian is not Hermitian: defect {defect:.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def build_hamiltonian(spec: HamiltonianSpec, ops: SpinOperators) -> HamiltonianMatrix:
    """Assemble ``H = -B . S + k_perp S_x^2 + k_par S_z^2``."""
    h = -ops.along(spec.b_field)
    if spec.k_perp != 0.0:
        h = h + spec.k_perp * (ops.sx @ ops.sx)
    if spec.k_par != 0.0:
        h = h + spec.k_par * (ops.sz @ ops.sz)
    return HamiltonianMatrix(mat=h)


def gellmann_decompose(
    h: HamiltonianMatrix, gm: GellMannBasis
) -> tuple[float, np.ndarray]:
    """Expand a 3x3 Hermitian matrix as ``c0 I + sum_i coeffs_i lambda_i``.

    The identity component ``c0 = Tr(h)/3`` is retained even though it
    never influences the dynamics: it shifts energy readouts.

    Returns
    -------
    (float, numpy.ndarray)
        ``c0`` and the 8 real coefficients ``coeffs_i = Tr(h lambda_i)/2``.
    """
    if h.dim != 3:
        raise ValueError(f"Gell-Mann decomposition requires d = 3, got d = {h.dim}")
    c0 = float(h.mat.trace().real) / 3.0
    coeffs = 0.5 * np.einsum("iab,ba->i", gm.lambdas, h.mat)
    if np.abs(coeffs.imag).max() > 1e-12:
        raise ValueError("non-Hermitian contamination in decomposition")
    return c0, coeffs.real


@dataclass(frozen=True)
class TripleCommutatorResult:
    """Outcome of the proportionality probe.

    ``ratio`` is the least-squares scalar c in ``triple ~ c * reference``;
    ``degenerate`` flags a vanishing reference (or both sides vanishing),
    in which case ``ratio`` is 0 and ``is_proportional`` reflects whether
    the triple commutator itself vanished.
    """

    is_proportional: bool
    ratio: complex
    degenerate: bool
    residual: float


def triple_commutator_check(
    rho0: DensityMatrix,
    target,
    reference=None,
    rel_tol: float = 1e-10,
) -> TripleCommutatorResult:
    """Test whether ``[rho0, [rho0, [rho0, target]]]`` is proportional to a reference.

    By default the reference is ``[rho0, target]``: for a Zeeman target the
    triple commutator folds back onto the single commutator, while for the
    anisotropy generator ``lambda_4`` the single commutator already points
    along ``lambda_5``, so the same default detects the new su(3) direction.
    An explicit ``reference`` (e.g. ``lambda_5`` itself) may be supplied.

    Parameters
    ----------
    rho0 : DensityMatrix
        State entering every commutator slot (d = 3).
    target : array_like
        Matrix in the innermost slot.
    reference : array_like, optional
        Comparison direction; defaults to ``[rho0, target]``.
    rel_tol : float
        Relative residual below which proportionality is declared.
    """
    if rho0.dim != 3:
        raise ValueError(f"triple-commutator probe requires d = 3, got d = {rho0.dim}")
    target = np.asarray(target, dtype=np.complex128)
    single = commutator(rho0.mat, target)
    triple = commutator(rho0.mat, commutator(rho0.mat, single))
    ref = single if reference is None else np.asarray(reference, dtype=np.complex128)

    ref_norm = float(np.linalg.norm(ref))
    triple_norm = float(np.linalg.norm(triple))
    scale = max(ref_norm, triple_norm)
    if scale <= 1e-14 * max(1.0, float(np.linalg.norm(target))):
        return TripleCommutatorResult(
            is_proportional=True, ratio=0j, degenerate=True, residual=0.0
        )
    if ref_norm <= 1e-14 * scale:
        return TripleCommutatorResult(
            is_proportional=False, ratio=0j, degenerate=True, residual=triple_norm
        )
    ratio = complex(np.vdot(ref, triple) / np.vdot(ref, ref))
    residual = float(np.linalg.norm(triple - ratio * ref))
    return TripleCommutatorResult(
        is_proportional=residual <= rel_tol * scale,
        ratio=ratio,
        degenerate=False,
        residual=residual,
    )
