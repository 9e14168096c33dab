"""Dense complex-matrix utilities and the implicit-commutator linear solve.

All operator and state matrices in this package are dense ``complex128``
arrays in row-major layout.  This module collects the Hermitian-specific
helpers shared by every other module, the :class:`DensityMatrix` wrapper
that enforces the physical state invariants, and ``solve_implicit_rhs``,
the vectorized d^2 x d^2 linear solve that resolves the implicit
Gilbert-damping term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HERMITICITY_TOL",
    "TRACE_TOL",
    "POSITIVITY_TOL",
    "DensityMatrix",
    "dagger",
    "commutator",
    "anticommutator",
    "hermiticity_defect",
    "symmetrize",
    "eigenvalues_hermitian",
    "solve_implicit_rhs",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10

# eigenvalues_hermitian accepts inputs that are Hermitian only up to
# accumulated round-off, hence the looser gate.
EIG_HERMITICITY_TOL = 1e-8


def _as_complex(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return _as_complex(a).conj().T


def commutator(a, b) -> np.ndarray:
    """Matrix commutator ``ab - ba``.

    Raises
    ------
    ValueError
        If the two matrices have different dimensions.
    """
    a = _as_complex(a)
    b = _as_complex(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    """Matrix anticommutator ``ab + ba``."""
    a = _as_complex(a)
    b = _as_complex(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b + b @ a


def hermiticity_defect(a) -> float:
    """Largest entrywise deviation of ``a`` from its conjugate transpose."""
    a = _as_complex(a)
    return float(np.abs(a - a.conj().T).max())


def symmetrize(a) -> np.ndarray:
    """Project onto the Hermitian part, ``(a + a^dagger)/2``."""
    a = _as_complex(a)
    return 0.5 * (a + a.conj().T)


def eigenvalues_hermitian(m, tol: float = EIG_HERMITICITY_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending.

    Parameters
    ----------
    m : array_like
        Square matrix, Hermitian within ``tol``.
    tol : float
        Maximum tolerated hermiticity defect.

    Raises
    ------
    ValueError
        If the input is not Hermitian within ``tol``.
    """
    m = _as_complex(m)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValueError(
            f"matrix is not Hermitian: defect {defect:.3e} exceeds {tol:.3e}"
        )
    return np.linalg.eigvalsh(m)


@dataclass(frozen=True)
class DensityMatrix:
    """Validated quantum state: Hermitian, unit trace, positive semidefinite.

    The wrapped array is copied and frozen at construction; instances are
    immutable and safe to share between threads.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = _as_complex(self.mat).copy()
        if m.shape[0] < 2:
            raise ValueError("density matrices here have dimension >= 2")
        defect = hermiticity_defect(m)
        if defect > HERMITICITY_TOL:
            raise ValueError(f"not Hermitian: defect {defect:.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr:.17g} is not 1 within {TRACE_TOL:.1e}")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -POSITIVITY_TOL:
            raise ValueError(f"not positive semidefinite: min eigenvalue {lo:.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def purity(self) -> float:
        """Tr(rho^2)."""
        return float(np.einsum("ab,ba->", self.mat, self.mat).real)

    def eigenvalues(self) -> np.ndarray:
        return eigenvalues_hermitian(self.mat)


def _state_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.mat
    return _as_complex(rho)


def solve_implicit_rhs(rho, rhs0, kappa: float) -> np.ndarray:
    """Solve ``X - i*kappa*[rho, X] = rhs0`` for X.

    Vectorizing with row-major ``vec`` turns the commutator map into
    ``kron(rho, I) - kron(I, rho.T)``, so the system matrix is

        M = I - i*kappa*(kron(rho, I) - kron(I, rho.T))

    whose eigenvalues are ``1 - i*kappa*(p_i - p_j)`` over eigenvalue pairs
    of rho.  All ``p_i`` are real, so every system eigenvalue has modulus
    >= 1 and the solve cannot be singular for a valid state.  The result is
    symmetrized to remove round-off skew.

    Parameters
    ----------
    rho : DensityMatrix or array_like
        Hermitian state entering the commutator.
    rhs0 : array_like
        Hermitian right-hand side, ``i[rho, H]`` in the intended use.
    kappa : float
        Damping constant, >= 0.

    Returns
    -------
    numpy.ndarray
        The unique Hermitian solution X.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    r = _state_matrix(rho)
    b = _as_complex(rhs0)
    if r.shape != b.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {b.shape}")
    d = r.shape[0]
    if kappa == 0.0:
        return b.copy()
    eye = np.eye(d)
    system = np.eye(d * d, dtype=np.complex128) - 1j * kappa * (
        np.kron(r, eye) - np.kron(eye, r.T)
    )
    x = np.linalg.solve(system, b.reshape(-1)).reshape(d, d)
    return 0.5 * (x + x.conj().T)
