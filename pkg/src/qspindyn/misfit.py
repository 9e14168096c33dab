"""Temporal-rescaling misfit between two observable series.

Given a reference series f(t) on an equidistant grid and a candidate
series g(t) with recorded derivatives, the misfit of one component at a
rescaling factor zeta is the mean squared residual over the reference
grid:

    R(zeta) = (1/N) sum_i [ g(zeta t_i) - f(t_i) ]^2

with g evaluated by cubic Hermite interpolation from its stored values
and derivatives, so no information is lost to a second integration.  The
two dynamics are equivalent up to a constant rescaling of time exactly
when all nine compared components (three spin expectations, six
covariance entries) reach a negligible minimum at a common zeta.

The scan over a zeta grid is the hot loop and lives in
:mod:`qspindyn._kernels`; the per-component minimum is then sharpened by
golden-section bracketing plus a final parabolic fit, which reaches well
below the grid spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .observables import COMPONENT_LABELS

__all__ = [
    "DEFAULT_ZETA_LO",
    "DEFAULT_ZETA_HI",
    "DEFAULT_N_ZETA",
    "DEFAULT_ZETA_TOL",
    "DEFAULT_VALUE_TOL",
    "NOISE_FLOOR",
    "ObservableSeries",
    "MisfitCurve",
    "EquivalenceVerdict",
    "interpolate",
    "misfit_value",
    "misfit_curves",
    "equivalence_verdict",
    "misfit_magnitude_compare",
]

DEFAULT_ZETA_LO = 0.85
DEFAULT_ZETA_HI = 1.25
DEFAULT_N_ZETA = 4001
DEFAULT_ZETA_TOL = 5e-4
DEFAULT_VALUE_TOL = 1e-6

# minima below this carry no information beyond integrator round-off
NOISE_FLOOR = 1e-12

GRID_UNIFORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Nine observable components with derivatives on an equidistant grid."""

    times: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        derivs = np.asarray(self.derivatives, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("times must be 1-D with at least two points")
        n = times.size
        ncomp = len(COMPONENT_LABELS)
        if values.shape != (ncomp, n) or derivs.shape != (ncomp, n):
            raise ValueError(
                f"values and derivatives must have shape ({ncomp}, {n}), got "
                f"{values.shape} and {derivs.shape}"
            )
        dt = (times[-1] - times[0]) / (n - 1)
        if not dt > 0:
            raise ValueError("times must be strictly increasing")
        if np.abs(np.diff(times) - dt).max() > GRID_UNIFORM_TOL * dt:
            raise ValueError("times must be equidistant")
        for arr in (times, values, derivs):
            arr.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivatives", derivs)

    @property
    def dt(self) -> float:
        return float((self.times[-1] - self.times[0]) / (self.times.size - 1))

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    @classmethod
    def from_table(cls, table: dict) -> "ObservableSeries":
        """Build a series from the column dict of ``trajectory_observables``."""
        values = np.stack([np.asarray(table[k], dtype=float) for k in COMPONENT_LABELS])
        derivs = np.stack(
            [np.asarray(table["d" + k], dtype=float) for k in COMPONENT_LABELS]
        )
        return cls(times=np.asarray(table["t"], dtype=float), values=values, derivatives=derivs)


@dataclass(frozen=True, eq=False)
class MisfitCurve:
    """Misfit of one component over the scanned zeta grid."""

    label: str
    zetas: np.ndarray
    values: np.ndarray
    zeta_min: float
    value_min: float
    argmin_interior: bool

    def __post_init__(self):
        for name in ("zetas", "values"):
            arr = getattr(self, name)
            arr.flags.writeable = False


@dataclass(frozen=True)
class EquivalenceVerdict:
    """Decision on whether one common rescaling collapses every component."""

    equivalent: bool
    zeta_star: float
    zeta_spread: float
    max_min_value: float
    zeta_tol: float
    value_tol: float
    component_zetas: np.ndarray
    component_values: np.ndarray

    def __post_init__(self):
        for name in ("component_zetas", "component_values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def interpolate(series: ObservableSeries, taus) -> np.ndarray:
    """Cubic Hermite values of all components at arbitrary times.

    Times beyond the grid fall into the last segment (extrapolation);
    callers scanning rescalings are expected to over-integrate the
    candidate series so this never happens in earnest.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    return _kernels._hermite_block(series.values, series.derivatives, series.dt, taus)


def _check_coverage(reference: ObservableSeries, candidate: ObservableSeries, zeta_hi: float):
    needed = zeta_hi * reference.t_max
    if needed > candidate.t_max * (1.0 + 1e-9):
        raise ValueError(
            f"candidate series ends at t = {candidate.t_max:.6g} but the scan needs "
            f"{needed:.6g}; integrate the candidate further"
        )


def misfit_value(
    reference: ObservableSeries, candidate: ObservableSeries, zeta: float
) -> np.ndarray:
    """Per-component misfit at a single rescaling factor; shape (9,)."""
    if not zeta > 0:
        raise ValueError(f"zeta must be > 0, got {zeta}")
    _check_coverage(reference, candidate, zeta)
    return _kernels.misfit_scan(
        reference.values,
        candidate.values,
        candidate.derivatives,
        reference.dt,
        candidate.dt,
        np.array([zeta]),
    )[0]


def _refine_component(ref_vals, cand_vals, cand_ders, dt_ref, dt_cand, lo, mid, hi):
    """Golden-section plus parabolic sharpening inside one grid bracket."""

    def f(z):
        return _kernels.misfit_single(ref_vals, cand_vals, cand_ders, dt_ref, dt_cand, z)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > 1e-6 * max(1.0, abs(mid)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x1, x3 = a, b
    x2 = 0.5 * (a + b)
    f1, f2, f3 = f(x1), f(x2), f(x3)
    best_z, best_f = min(((x1, f1), (x2, f2), (x3, f3)), key=lambda p: p[1])
    num = (x2 - x1) ** 2 * (f2 - f3) - (x2 - x3) ** 2 * (f2 - f1)
    den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1)
    if den != 0.0:
        vertex = x2 - 0.5 * num / den
        if x1 <= vertex <= x3:
            fv = f(vertex)
            if fv < best_f:
                best_z, best_f = vertex, fv
    return best_z, best_f


def misfit_curves(
    reference: ObservableSeries,
    candidate: ObservableSeries,
    zeta_lo: float = DEFAULT_ZETA_LO,
    zeta_hi: float = DEFAULT_ZETA_HI,
    n_zeta: int = DEFAULT_N_ZETA,
    refine: bool = True,
) -> tuple[MisfitCurve, ...]:
    """Scan the misfit of all nine components over a zeta grid.

    Parameters
    ----------
    reference : ObservableSeries
        Series compared at its own grid times.
    candidate : ObservableSeries
        Series evaluated at the rescaled times ``zeta * t``; must extend
        to at least ``zeta_hi`` times the reference horizon.
    zeta_lo, zeta_hi : float
        Scan window, ``0 < zeta_lo < zeta_hi``.
    n_zeta : int
        Grid points across the window, >= 3.
    refine : bool
        Sharpen interior minima below the grid spacing.

    Returns
    -------
    tuple of MisfitCurve
        One curve per component, in ``COMPONENT_LABELS`` order.  A grid
        argmin on a window edge is reported as-is with
        ``argmin_interior=False`` and is never refined.
    """
    if not (0 < zeta_lo < zeta_hi):
        raise ValueError(f"need 0 < zeta_lo < zeta_hi, got {zeta_lo}, {zeta_hi}")
    if n_zeta < 3:
        raise ValueError(f"n_zeta must be >= 3, got {n_zeta}")
    _check_coverage(reference, candidate, zeta_hi)

    zetas = np.linspace(zeta_lo, zeta_hi, n_zeta)
    grid = _kernels.misfit_scan(
        reference.values,
        candidate.values,
        candidate.derivatives,
        reference.dt,
        candidate.dt,
        zetas,
    )

    curves = []
    for ci, label in enumerate(COMPONENT_LABELS):
        col = grid[:, ci]
        k = int(np.argmin(col))
        interior = 0 < k < n_zeta - 1
        z_min, v_min = float(zetas[k]), float(col[k])
        if refine and interior:
            z_min, v_min = _refine_component(
                reference.values[ci],
                candidate.values[ci],
                candidate.derivatives[ci],
                reference.dt,
                candidate.dt,
                float(zetas[k - 1]),
                float(zetas[k]),
                float(zetas[k + 1]),
            )
            if v_min > col[k]:
                z_min, v_min = float(zetas[k]), float(col[k])
        curves.append(
            MisfitCurve(
                label=label,
                zetas=zetas.copy(),
                values=col.copy(),
                zeta_min=z_min,
                value_min=v_min,
                argmin_interior=interior,
            )
        )
    return tuple(curves)


def equivalence_verdict(
    curves,
    zeta_tol: float = DEFAULT_ZETA_TOL,
    value_tol: float = DEFAULT_VALUE_TOL,
) -> EquivalenceVerdict:
    """Decide rescaling equivalence from a full set of misfit curves.

    The two series are declared equivalent when every informative
    component (one whose misfit is not flat at the noise floor) attains
    an interior minimum, the minima agree on zeta within ``zeta_tol``,
    and the worst minimum is below ``value_tol``.  Components that are
    flat at the noise floor match trivially at every zeta and are
    excluded from the spread; if all components are flat the series are
    equivalent with ``zeta_star = 1``.
    """
    if len(curves) == 0:
        raise ValueError("need at least one misfit curve")
    zs = np.array([c.zeta_min for c in curves])
    vs = np.array([c.value_min for c in curves])
    informative = np.array([c.values.max() > NOISE_FLOOR for c in curves])
    max_min = float(vs.max())

    if informative.any():
        zi = zs[informative]
        spread = float(zi.max() - zi.min())
        zeta_star = float(zi.mean())
        interior_ok = all(c.argmin_interior for c, inf in zip(curves, informative) if inf)
        equivalent = interior_ok and spread <= zeta_tol and max_min <= value_tol
    else:
        spread = 0.0
        zeta_star = 1.0
        equivalent = True

    return EquivalenceVerdict(
        equivalent=equivalent,
        zeta_star=zeta_star,
        zeta_spread=spread,
        max_min_value=max_min,
        zeta_tol=zeta_tol,
        value_tol=value_tol,
        component_zetas=zs,
        component_values=vs,
    )


def misfit_magnitude_compare(curves_a, curves_b) -> float:
    """Ratio of worst-component minimum misfits, run B over run A.

    Returns NaN when both runs sit at the noise floor (no magnitudes to
    compare) and +inf when only run A does.
    """
    a = max(c.value_min for c in curves_a)
    b = max(c.value_min for c in curves_b)
    if a <= NOISE_FLOOR and b <= NOISE_FLOOR:
        return math.nan
    if a <= NOISE_FLOOR:
        return math.inf
    return b / a
