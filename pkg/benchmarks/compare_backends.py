"""Compare the numba and pure-numpy backends on the hot kernels.

The backend is fixed at import time by ``QSPINDYN_BACKEND``, so this script
re-executes itself once per backend in a subprocess and then prints a
side-by-side table.  Timings are best-of-``--repeat`` wall times with a
warm-up call first, so numba JIT compilation is excluded.

Usage::

    python3 benchmarks/compare_backends.py [--preset case_i] [--repeat 3]
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time


def _run_single(preset: str, n_grid: int, repeat: int) -> dict:
    from qspindyn import BACKEND
    from qspindyn.dynamics import DynamicsKind, IntegratorConfig, integrate
    from qspindyn.hamiltonian import HamiltonianSpec, build_hamiltonian
    from qspindyn.misfit import ObservableSeries, misfit_curves
    from qspindyn.observables import trajectory_observables
    from qspindyn.scenarios_cli import preset_config
    from qspindyn.spin_algebra import (
        SpinQuantumNumber,
        build_initial_state,
        make_spin_operators,
    )

    cfg = preset_config(preset)
    spin = SpinQuantumNumber(cfg.two_s)
    ops = make_spin_operators(spin)
    rho0 = build_initial_state(cfg.state, spin)
    h = build_hamiltonian(
        HamiltonianSpec(b_field=cfg.b_field, k_perp=cfg.k_perp, k_par=cfg.k_par), ops
    )
    icfg = IntegratorConfig(step=cfg.step, kappa=cfg.kappa)
    dt = cfg.t_max / (n_grid - 1)
    n_ext = math.ceil((n_grid - 1) * cfg.zeta_hi) + 1

    def timed(fn, *args):
        fn(*args)  # warm-up (JIT compile, cache fill)
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn(*args)
            best = min(best, time.perf_counter() - t0)
        return best

    t_qll = timed(integrate, DynamicsKind.QLL, rho0, h, icfg, cfg.t_max, n_grid)
    t_qllg = timed(
        integrate, DynamicsKind.QLLG, rho0, h, icfg, dt * (n_ext - 1), n_ext
    )

    traj_ll = integrate(DynamicsKind.QLL, rho0, h, icfg, cfg.t_max, n_grid)
    traj_g = integrate(DynamicsKind.QLLG, rho0, h, icfg, dt * (n_ext - 1), n_ext)
    s_ll = ObservableSeries.from_table(trajectory_observables(traj_ll, ops, h))
    s_g = ObservableSeries.from_table(trajectory_observables(traj_g, ops, h))
    t_scan = timed(
        misfit_curves, s_ll, s_g, cfg.zeta_lo, cfg.zeta_hi, cfg.n_zeta
    )

    return {
        "backend": BACKEND,
        "qll_integrate": t_qll,
        "qllg_integrate": t_qllg,
        "misfit_scan": t_scan,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--preset", default="case_i")
    parser.add_argument("--n-grid", type=int, default=20001)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--single", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.single:
        print(json.dumps(_run_single(args.preset, args.n_grid, args.repeat)))
        return 0

    rows = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, QSPINDYN_BACKEND=backend)
        proc = subprocess.run(
            [
                sys.executable,
                os.path.abspath(__file__),
                "--single",
                "--preset",
                args.preset,
                "--n-grid",
                str(args.n_grid),
                "--repeat",
                str(args.repeat),
            ],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            print(f"{backend} backend failed:\n{proc.stderr}", file=sys.stderr)
            return 1
        rows.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    print(
        f"preset={args.preset}  n_grid={args.n_grid}  repeat={args.repeat}  "
        "(best wall time, warm)"
    )
    header = f"{'kernel':<16}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for key in ("qll_integrate", "qllg_integrate", "misfit_scan"):
        a, b = rows[0][key], rows[1][key]
        print(f"{key:<16}{a:>12.4f}{b:>12.4f}{a / b:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
