"""Numerical kernels with a numba fast path and a pure-numpy fallback.

Backend selection happens once at import time from the environment:

* ``QSPINDYN_BACKEND=auto``  (default) use numba when importable;
* ``QSPINDYN_BACKEND=numba`` require numba, fail loudly if missing;
* ``QSPINDYN_BACKEND=numpy`` never import numba.

Both implementations of every kernel are kept importable (when their
dependencies allow) so the test suite and the benchmark script can compare
them; only the dispatch functions at the bottom consult ``BACKEND``.

``QSPINDYN_THREADS`` caps the parallelism of the misfit scan, the only
parallel kernel.  Results are independent of the thread count: every zeta
writes its own output slot.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = [
    "BACKEND",
    "KIND_QLL",
    "KIND_QLLG",
    "thread_cap",
    "rk4_trajectory",
    "misfit_scan",
    "misfit_single",
]

KIND_QLL = 0
KIND_QLLG = 1


def _select_backend():
    env = os.environ.get("QSPINDYN_BACKEND", "auto").strip().lower()
    if env not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"QSPINDYN_BACKEND must be one of auto/numba/numpy, got {env!r}"
        )
    if env == "numpy":
        return "numpy", None
    try:
        import numba
    except ImportError:
        if env == "numba":
            raise RuntimeError("QSPINDYN_BACKEND=numba but numba is not importable")
        return "numpy", None
    return "numba", numba


BACKEND, _nb = _select_backend()


def thread_cap() -> int:
    """Requested misfit-scan parallelism; defaults to the available cores."""
    raw = os.environ.get("QSPINDYN_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"QSPINDYN_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise ValueError(f"QSPINDYN_THREADS must be >= 1, got {n}")
    return n


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _rhs_numpy(kind_code: int, rho, h, kappa: float):
    c = rho @ h - h @ rho
    if kind_code == KIND_QLL:
        if kappa == 0.0:
            return 1j * c
        return 1j * c - kappa * (rho @ c - c @ rho)
    rhs0 = 1j * c
    if kappa == 0.0:
        return rhs0
    d = rho.shape[0]
    eye = np.eye(d)
    system = np.eye(d * d, dtype=np.complex128) - 1j * kappa * (
        np.kron(rho, eye) - np.kron(eye, rho.T)
    )
    x = np.linalg.solve(system, rhs0.reshape(-1)).reshape(d, d)
    return 0.5 * (x + x.conj().T)


def _rk4_step_inplace_numpy(kind_code, rho, h, kappa, step):
    k1 = _rhs_numpy(kind_code, rho, h, kappa)
    k2 = _rhs_numpy(kind_code, rho + (0.5 * step) * k1, h, kappa)
    k3 = _rhs_numpy(kind_code, rho + (0.5 * step) * k2, h, kappa)
    k4 = _rhs_numpy(kind_code, rho + step * k3, h, kappa)
    out = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = 0.5 * (out + out.conj().T)
    return out / out.trace().real, k1


def _rk4_traj_numpy(kind_code, rho0, h, kappa, dt, n_out, substeps):
    d = rho0.shape[0]
    states = np.empty((n_out, d, d), dtype=np.complex128)
    derivs = np.empty((n_out, d, d), dtype=np.complex128)
    rho = rho0.copy()
    inner = dt / substeps
    for i in range(n_out - 1):
        states[i] = rho
        for k in range(substeps):
            rho, k1 = _rk4_step_inplace_numpy(kind_code, rho, h, kappa, inner)
            if k == 0:
                derivs[i] = k1
    states[n_out - 1] = rho
    derivs[n_out - 1] = _rhs_numpy(kind_code, rho, h, kappa)
    return states, derivs


def _hermite_block(vals_g, ders_g, dt_g, tau):
    """Cubic Hermite values of every component row at the times ``tau``."""
    last = vals_g.shape[1] - 2
    x = tau / dt_g
    j = np.minimum(x.astype(np.int64), last)
    u = x - j
    um1 = 1.0 - u
    h00 = (1.0 + 2.0 * u) * um1 * um1
    h10 = u * um1 * um1
    h01 = u * u * (3.0 - 2.0 * u)
    h11 = u * u * (u - 1.0)
    return (
        h00 * vals_g[:, j]
        + (dt_g * h10) * ders_g[:, j]
        + h01 * vals_g[:, j + 1]
        + (dt_g * h11) * ders_g[:, j + 1]
    )


def _misfit_scan_numpy(vals_ll, vals_g, ders_g, dt_ll, dt_g, zetas, threads=1):
    n = vals_ll.shape[1]
    t_ll = dt_ll * np.arange(n)
    out = np.empty((zetas.size, vals_ll.shape[0]))

    def fill(lo, hi):
        for zi in range(lo, hi):
            diff = _hermite_block(vals_g, ders_g, dt_g, zetas[zi] * t_ll) - vals_ll
            out[zi] = np.mean(diff * diff, axis=1)

    threads = min(threads, zetas.size) if zetas.size else 1
    if threads <= 1:
        fill(0, zetas.size)
        return out
    bounds = np.linspace(0, zetas.size, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(fill, bounds[i], bounds[i + 1]) for i in range(threads)
        ]
        for f in futures:
            f.result()
    return out


def _misfit_single_numpy(vals_ll, vals_g, ders_g, dt_ll, dt_g, zeta):
    t_ll = dt_ll * np.arange(vals_ll.shape[0])
    diff = (
        _hermite_block(vals_g[None, :], ders_g[None, :], dt_g, zeta * t_ll)[0]
        - vals_ll
    )
    return float(np.mean(diff * diff))


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily, cached on disk)
# ---------------------------------------------------------------------------

if _nb is not None:
    _njit = _nb.njit
    _prange = _nb.prange

    @_njit(cache=True, nogil=True)
    def _mm_nb(a, b):
        d = a.shape[0]
        out = np.zeros((d, d), np.complex128)
        for i in range(d):
            for k in range(d):
                aik = a[i, k]
                for j in range(d):
                    out[i, j] += aik * b[k, j]
        return out

    @_njit(cache=True, nogil=True)
    def _rhs_nb(kind_code, rho, h, kappa):
        c = _mm_nb(rho, h) - _mm_nb(h, rho)
        if kind_code == KIND_QLL:
            if kappa == 0.0:
                return 1j * c
            return 1j * c - kappa * (_mm_nb(rho, c) - _mm_nb(c, rho))
        rhs0 = 1j * c
        if kappa == 0.0:
            return rhs0
        d = rho.shape[0]
        dd = d * d
        system = np.zeros((dd, dd), np.complex128)
        for i in range(dd):
            system[i, i] = 1.0
        ik = 1j * kappa
        for a in range(d):
            for b in range(d):
                row = a * d + b
                for c2 in range(d):
                    system[row, c2 * d + b] -= ik * rho[a, c2]
                    system[row, a * d + c2] += ik * rho[c2, b]
        x = np.linalg.solve(system, rhs0.reshape(dd)).reshape((d, d))
        out = np.empty((d, d), np.complex128)
        for i in range(d):
            for j in range(d):
                out[i, j] = 0.5 * (x[i, j] + np.conj(x[j, i]))
        return out

    @_njit(cache=True, nogil=True)
    def _rk4_traj_nb(kind_code, rho0, h, kappa, dt, n_out, substeps):
        d = rho0.shape[0]
        states = np.empty((n_out, d, d), np.complex128)
        derivs = np.empty((n_out, d, d), np.complex128)
        rho = rho0.copy()
        inner = dt / substeps
        for i in range(n_out - 1):
            states[i] = rho
            for k in range(substeps):
                k1 = _rhs_nb(kind_code, rho, h, kappa)
                if k == 0:
                    derivs[i] = k1
                k2 = _rhs_nb(kind_code, rho + (0.5 * inner) * k1, h, kappa)
                k3 = _rhs_nb(kind_code, rho + (0.5 * inner) * k2, h, kappa)
                k4 = _rhs_nb(kind_code, rho + inner * k3, h, kappa)
                nxt = rho + (inner / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                tr = 0.0
                for a in range(d):
                    tr += nxt[a, a].real
                for a in range(d):
                    for b in range(d):
                        nxt[a, b] = 0.5 * (nxt[a, b] + np.conj(nxt[b, a])) / tr
                rho = nxt
        states[n_out - 1] = rho
        derivs[n_out - 1] = _rhs_nb(kind_code, rho, h, kappa)
        return states, derivs

    @_njit(cache=True, nogil=True)
    def _misfit_point_nb(vals_ll, vals_g, ders_g, dt_ll, dt_g, zeta, acc):
        ncomp, n = vals_ll.shape
        last = vals_g.shape[1] - 2
        for c in range(ncomp):
            acc[c] = 0.0
        for ti in range(n):
            x = zeta * (dt_ll * ti) / dt_g
            j = int(x)
            if j > last:
                j = last
            u = x - j
            um1 = 1.0 - u
            h00 = (1.0 + 2.0 * u) * um1 * um1
            h10 = (u * um1 * um1) * dt_g
            h01 = u * u * (3.0 - 2.0 * u)
            h11 = (u * u * (u - 1.0)) * dt_g
            for c in range(ncomp):
                p = (
                    h00 * vals_g[c, j]
                    + h10 * ders_g[c, j]
                    + h01 * vals_g[c, j + 1]
                    + h11 * ders_g[c, j + 1]
                )
                diff = p - vals_ll[c, ti]
                acc[c] += diff * diff
        for c in range(ncomp):
            acc[c] /= n

    @_njit(cache=True, nogil=True, parallel=True)
    def _misfit_scan_nb(vals_ll, vals_g, ders_g, dt_ll, dt_g, zetas):
        ncomp = vals_ll.shape[0]
        out = np.empty((zetas.shape[0], ncomp))
        for zi in _prange(zetas.shape[0]):
            _misfit_point_nb(vals_ll, vals_g, ders_g, dt_ll, dt_g, zetas[zi], out[zi])
        return out

    @_njit(cache=True, nogil=True)
    def _misfit_single_nb(vals_ll, vals_g, ders_g, dt_ll, dt_g, zeta):
        acc = np.empty(1)
        _misfit_point_nb(
            vals_ll.reshape((1, vals_ll.shape[0])),
            vals_g.reshape((1, vals_g.shape[0])),
            ders_g.reshape((1, ders_g.shape[0])),
            dt_ll,
            dt_g,
            zeta,
            acc,
        )
        return acc[0]

    def _apply_thread_cap():
        cap = min(thread_cap(), _nb.config.NUMBA_NUM_THREADS)
        _nb.set_num_threads(max(1, cap))


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def rk4_trajectory(kind_code, rho0, h, kappa, dt, n_out, substeps):
    """Fixed-step RK4 over ``n_out`` output intervals with ``substeps`` each.

    Returns the recorded states and right-hand sides at the output grid;
    every internal step is Hermitian-symmetrized and trace-renormalized.
    """
    if BACKEND == "numba":
        return _rk4_traj_nb(
            kind_code,
            np.ascontiguousarray(rho0),
            np.ascontiguousarray(h),
            float(kappa),
            float(dt),
            int(n_out),
            int(substeps),
        )
    return _rk4_traj_numpy(kind_code, rho0, h, kappa, dt, n_out, substeps)


def misfit_scan(vals_ll, vals_g, ders_g, dt_ll, dt_g, zetas):
    """Mean-squared rescaling misfit for each (zeta, component) pair.

    ``vals_ll`` has shape (ncomp, n); ``vals_g``/``ders_g`` carry the
    rescaled series and its time derivatives on a grid of spacing
    ``dt_g`` that must cover ``zetas[-1] * dt_ll * (n - 1)``.
    Returns an array of shape ``(len(zetas), ncomp)``.
    """
    vals_ll = np.ascontiguousarray(vals_ll, dtype=np.float64)
    vals_g = np.ascontiguousarray(vals_g, dtype=np.float64)
    ders_g = np.ascontiguousarray(ders_g, dtype=np.float64)
    zetas = np.ascontiguousarray(zetas, dtype=np.float64)
    if BACKEND == "numba":
        _apply_thread_cap()
        return _misfit_scan_nb(vals_ll, vals_g, ders_g, float(dt_ll), float(dt_g), zetas)
    return _misfit_scan_numpy(
        vals_ll, vals_g, ders_g, float(dt_ll), float(dt_g), zetas, threads=thread_cap()
    )


def misfit_single(vals_ll, vals_g, ders_g, dt_ll, dt_g, zeta):
    """Single-component, single-zeta misfit value (used by refinement)."""
    vals_ll = np.ascontiguousarray(vals_ll, dtype=np.float64)
    vals_g = np.ascontiguousarray(vals_g, dtype=np.float64)
    ders_g = np.ascontiguousarray(ders_g, dtype=np.float64)
    if BACKEND == "numba":
        return float(
            _misfit_single_nb(vals_ll, vals_g, ders_g, float(dt_ll), float(dt_g), float(zeta))
        )
    return _misfit_single_numpy(vals_ll, vals_g, ders_g, dt_ll, dt_g, zeta)
