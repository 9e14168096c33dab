"""Scenario configs, named presets, artifact files, and the command line.

A scenario bundles everything one comparison run needs: the spin quantum
number, the initial state, the field and anisotropy, kappa, the time
grid, and the rescaling-scan window.  Configs live in versioned JSON
(schema ``qspindyn.scenario.v1``); :func:`validate_config` reports every
problem at once instead of stopping at the first.

Running a scenario integrates both dynamics kinds (the candidate one is
integrated past the horizon so every rescaled time stays inside its
grid), evaluates the observables, scans the misfit, and writes a
directory of artifacts:

* ``config.json``           echo of the fully resolved config
* ``trajectory_qll.csv``    observables and derivatives per grid time
* ``trajectory_qllg.csv``   same for the candidate, on its longer grid
* ``misfit.json``           full per-component misfit curves
* ``verdict.json``          the equivalence decision
* ``manifest.json``         file list with sha256 checksums

All files are written atomically (temp file plus rename) and all floats
carry 17 significant digits, so a rerun from the same config is
byte-identical and ``misfit --rerun`` can rebuild the misfit files from
the CSVs alone without re-integrating.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .densmat import DensityMatrix
from .dynamics import (
    DynamicsKind,
    IntegrationError,
    IntegratorConfig,
    IntegratorMethod,
    Trajectory,
    integrate,
)
from .hamiltonian import HamiltonianSpec, build_hamiltonian
from .misfit import (
    DEFAULT_N_ZETA,
    DEFAULT_VALUE_TOL,
    DEFAULT_ZETA_HI,
    DEFAULT_ZETA_LO,
    DEFAULT_ZETA_TOL,
    EquivalenceVerdict,
    MisfitCurve,
    ObservableSeries,
    equivalence_verdict,
    misfit_curves,
)
from .observables import trajectory_observables
from .spin_algebra import (
    ExplicitState,
    QutritMixtureState,
    SpinQuantumNumber,
    SpinTypeState,
    build_initial_state,
    make_spin_operators,
)

__all__ = [
    "SCHEMA_VERSION",
    "CSV_COLUMNS",
    "ConfigError",
    "ScenarioConfig",
    "ScenarioResult",
    "RunArtifact",
    "PRESETS",
    "list_presets",
    "preset_config",
    "validate_config",
    "simulate_scenario",
    "run_scenario",
    "read_trajectory_table",
    "rerun_misfit",
    "main",
]

SCHEMA_VERSION = "qspindyn.scenario.v1"
MISFIT_SCHEMA_VERSION = "qspindyn.misfit.v1"
VERDICT_SCHEMA_VERSION = "qspindyn.verdict.v1"
MANIFEST_SCHEMA_VERSION = "qspindyn.manifest.v1"

_OBS_COLUMNS = (
    "Sx", "Sy", "Sz", "Cxx", "Cxy", "Cxz", "Cyy", "Cyz", "Czz",
    "purity", "energy", "Ve", "trC",
)
_DERIV_COLUMNS = tuple(
    "d" + k for k in ("Sx", "Sy", "Sz", "Cxx", "Cxy", "Cxz", "Cyy", "Cyz", "Czz")
)
CSV_COLUMNS = ("t",) + _OBS_COLUMNS + _DERIV_COLUMNS

_STATE_KINDS = ("spin_type", "qutrit_mixture", "explicit")
_METHODS = tuple(m.value for m in IntegratorMethod)

_CONFIG_KEYS = {
    "schema", "name", "two_s", "state", "b_field", "k_perp", "k_par",
    "kappa", "t_max", "n_grid", "method", "step", "rtol", "atol",
    "zeta_lo", "zeta_hi", "n_zeta",
}


class ConfigError(ValueError):
    """One or more configuration problems; ``errors`` lists them all."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved inputs of one comparison run."""

    name: str
    two_s: int
    state: SpinTypeState | QutritMixtureState | ExplicitState
    b_field: tuple[float, float, float]
    kappa: float
    k_perp: float = 0.0
    k_par: float = 0.0
    t_max: float = 40.0
    n_grid: int = 50000
    method: IntegratorMethod = IntegratorMethod.RK4_FIXED
    step: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    zeta_lo: float = DEFAULT_ZETA_LO
    zeta_hi: float = DEFAULT_ZETA_HI
    n_zeta: int = DEFAULT_N_ZETA

    def to_dict(self) -> dict:
        """JSON-ready dict, schema tag first, floats left as numbers."""
        if isinstance(self.state, SpinTypeState):
            state = {
                "kind": "spin_type",
                "m0": self.state.m0,
                "axis": list(self.state.axis),
            }
        elif isinstance(self.state, QutritMixtureState):
            state = {"kind": "qutrit_mixture", "p": self.state.p}
        else:
            state = {
                "kind": "explicit",
                "matrix_re": self.state.matrix.real.tolist(),
                "matrix_im": self.state.matrix.imag.tolist(),
            }
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "two_s": self.two_s,
            "state": state,
            "b_field": list(self.b_field),
            "k_perp": self.k_perp,
            "k_par": self.k_par,
            "kappa": self.kappa,
            "t_max": self.t_max,
            "n_grid": self.n_grid,
            "method": self.method.value,
            "step": self.step,
            "rtol": self.rtol,
            "atol": self.atol,
            "zeta_lo": self.zeta_lo,
            "zeta_hi": self.zeta_hi,
            "n_zeta": self.n_zeta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        """Validate and build; raises ConfigError listing every problem."""
        errors = validate_config(data)
        if errors:
            raise ConfigError(errors)
        sd = data["state"]
        if sd["kind"] == "spin_type":
            axis = tuple(float(v) for v in sd.get("axis", (0.0, 0.0, 1.0)))
            state = SpinTypeState(m0=float(sd["m0"]), axis=axis)
        elif sd["kind"] == "qutrit_mixture":
            state = QutritMixtureState(p=float(sd["p"]))
        else:
            re = np.asarray(sd["matrix_re"], dtype=float)
            im = np.asarray(sd.get("matrix_im", np.zeros_like(re)), dtype=float)
            state = ExplicitState(matrix=re + 1j * im)
        return cls(
            name=str(data.get("name", "custom")),
            two_s=int(data["two_s"]),
            state=state,
            b_field=tuple(float(v) for v in data["b_field"]),
            kappa=float(data["kappa"]),
            k_perp=float(data.get("k_perp", 0.0)),
            k_par=float(data.get("k_par", 0.0)),
            t_max=float(data.get("t_max", 40.0)),
            n_grid=int(data.get("n_grid", 50000)),
            method=IntegratorMethod(data.get("method", "rk4_fixed")),
            step=float(data.get("step", 1e-3)),
            rtol=float(data.get("rtol", 1e-10)),
            atol=float(data.get("atol", 1e-12)),
            zeta_lo=float(data.get("zeta_lo", DEFAULT_ZETA_LO)),
            zeta_hi=float(data.get("zeta_hi", DEFAULT_ZETA_HI)),
            n_zeta=int(data.get("n_zeta", DEFAULT_N_ZETA)),
        )


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

_B_TILTED = [2.0 ** -0.5, 0.0, 2.0 ** -0.5]

PRESETS: dict[str, dict] = {
    "rescalable": {
        "schema": SCHEMA_VERSION,
        "name": "rescalable",
        "two_s": 2,
        "state": {"kind": "spin_type", "m0": 1.0, "axis": [0.0, 0.0, 1.0]},
        "b_field": _B_TILTED,
        "kappa": 0.5,
    },
    "case_i": {
        "schema": SCHEMA_VERSION,
        "name": "case_i",
        "two_s": 2,
        "state": {"kind": "spin_type", "m0": 1.0, "axis": [0.0, 0.0, 1.0]},
        "b_field": _B_TILTED,
        "k_perp": 0.3,
        "k_par": -0.1,
        "kappa": 0.5,
    },
    "case_ii": {
        "schema": SCHEMA_VERSION,
        "name": "case_ii",
        "two_s": 2,
        "state": {"kind": "qutrit_mixture", "p": 5.0 / 6.0},
        "b_field": _B_TILTED,
        "kappa": 0.5,
    },
    "case_iii_qutrit_aniso": {
        "schema": SCHEMA_VERSION,
        "name": "case_iii_qutrit_aniso",
        "two_s": 2,
        "state": {"kind": "qutrit_mixture", "p": 5.0 / 6.0},
        "b_field": _B_TILTED,
        "k_perp": 0.3,
        "k_par": -0.1,
        "kappa": 0.5,
    },
    "spin_half_regression": {
        "schema": SCHEMA_VERSION,
        "name": "spin_half_regression",
        "two_s": 1,
        "state": {"kind": "spin_type", "m0": 0.8, "axis": [1.0, 0.0, 0.0]},
        "b_field": [0.0, 0.0, 1.0],
        "kappa": 0.5,
    },
}

PRESET_DESCRIPTIONS = {
    "rescalable": "spin-1 spin-type state in a pure Zeeman field; one rescaling collapses the flows",
    "case_i": "spin-1 spin-type state with transverse and uniaxial anisotropy; no common rescaling",
    "case_ii": "rank-deficient qutrit mixture in a pure Zeeman field; rescaling fails without anisotropy",
    "case_iii_qutrit_aniso": "qutrit mixture combined with the anisotropy of case_i",
    "spin_half_regression": "spin-1/2 check: exact equivalence at zeta = 1 + kappa^2 m0^2",
}


def list_presets() -> tuple[str, ...]:
    """Names of the built-in scenarios, in definition order."""
    return tuple(PRESETS)


def preset_config(name: str) -> ScenarioConfig:
    """Resolve one preset by name."""
    if name not in PRESETS:
        raise ConfigError(
            [f"unknown preset {name!r}; available: {', '.join(PRESETS)}"]
        )
    return ScenarioConfig.from_dict(PRESETS[name])


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _validate_state(sd, two_s, errors):
    if not isinstance(sd, dict):
        errors.append("state must be an object")
        return
    kind = sd.get("kind")
    if kind not in _STATE_KINDS:
        errors.append(f"state.kind must be one of {_STATE_KINDS}, got {kind!r}")
        return
    if kind == "spin_type":
        m0 = sd.get("m0")
        if not _is_number(m0):
            errors.append("state.m0 must be a finite number")
        elif abs(m0) > 1.0 + 1e-12:
            errors.append(f"m0 exceeds positivity bound: |{m0}| > 1")
        axis = sd.get("axis", [0.0, 0.0, 1.0])
        if (
            not isinstance(axis, (list, tuple))
            or len(axis) != 3
            or not all(_is_number(v) for v in axis)
        ):
            errors.append("state.axis must be three finite numbers")
        elif math.hypot(*(float(v) for v in axis)) == 0.0:
            errors.append("state.axis must be nonzero")
        extra = set(sd) - {"kind", "m0", "axis"}
    elif kind == "qutrit_mixture":
        p = sd.get("p")
        if not _is_number(p) or not 0.0 <= p <= 1.0:
            errors.append("state.p must be a number in [0, 1]")
        if two_s is not None and two_s != 2:
            errors.append(f"qutrit_mixture requires two_s = 2, got {two_s}")
        extra = set(sd) - {"kind", "p"}
    else:
        re = sd.get("matrix_re")
        im = sd.get("matrix_im")
        try:
            re_arr = np.asarray(re, dtype=float)
            im_arr = np.zeros_like(re_arr) if im is None else np.asarray(im, dtype=float)
            if re_arr.ndim != 2 or re_arr.shape[0] != re_arr.shape[1]:
                raise ValueError(f"matrix must be square, got shape {re_arr.shape}")
            if im_arr.shape != re_arr.shape:
                raise ValueError("matrix_im shape differs from matrix_re")
            dm = DensityMatrix(re_arr + 1j * im_arr)
            if two_s is not None and dm.dim != two_s + 1:
                errors.append(
                    f"explicit state has dimension {dm.dim}, expected {two_s + 1}"
                )
        except (ValueError, TypeError) as exc:
            errors.append(f"explicit state invalid: {exc}")
        extra = set(sd) - {"kind", "matrix_re", "matrix_im"}
    for key in sorted(extra):
        errors.append(f"unknown state key: {key}")


def validate_config(data) -> list[str]:
    """Collect every problem with a raw config dict; empty means valid."""
    if not isinstance(data, dict):
        return ["config must be a JSON object"]
    errors: list[str] = []
    for key in sorted(set(data) - _CONFIG_KEYS):
        errors.append(f"unknown key: {key}")

    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        errors.append(f"schema must be {SCHEMA_VERSION!r}, got {schema!r}")

    if "name" in data and (not isinstance(data["name"], str) or not data["name"]):
        errors.append("name must be a non-empty string")

    two_s = data.get("two_s")
    if not _is_int(two_s) or two_s < 1:
        errors.append(f"two_s must be an integer >= 1, got {two_s!r}")
        two_s = None

    if "state" not in data:
        errors.append("missing key: state")
    else:
        _validate_state(data["state"], two_s, errors)

    b = data.get("b_field")
    if (
        not isinstance(b, (list, tuple))
        or len(b) != 3
        or not all(_is_number(v) for v in b)
    ):
        errors.append("b_field must be three finite numbers")

    for key in ("k_perp", "k_par"):
        if key in data and not _is_number(data[key]):
            errors.append(f"{key} must be a finite number")

    kappa = data.get("kappa")
    if not _is_number(kappa) or kappa < 0:
        errors.append(f"kappa must be a number >= 0, got {kappa!r}")

    if "t_max" in data and (not _is_number(data["t_max"]) or data["t_max"] <= 0):
        errors.append("t_max must be a number > 0")
    if "n_grid" in data and (not _is_int(data["n_grid"]) or data["n_grid"] < 2):
        errors.append("n_grid must be an integer >= 2")
    if "method" in data and data["method"] not in _METHODS:
        errors.append(f"method must be one of {_METHODS}, got {data['method']!r}")
    for key in ("step", "rtol", "atol"):
        if key in data and (not _is_number(data[key]) or data[key] <= 0):
            errors.append(f"{key} must be a number > 0")

    lo = data.get("zeta_lo", DEFAULT_ZETA_LO)
    hi = data.get("zeta_hi", DEFAULT_ZETA_HI)
    lo_ok = _is_number(lo) and lo > 0
    hi_ok = _is_number(hi)
    if not lo_ok:
        errors.append("zeta_lo must be a number > 0")
    if not hi_ok:
        errors.append("zeta_hi must be a finite number")
    if lo_ok and hi_ok and not lo < hi:
        errors.append(f"zeta window is empty: zeta_lo {lo} >= zeta_hi {hi}")
    if "n_zeta" in data and (not _is_int(data["n_zeta"]) or data["n_zeta"] < 3):
        errors.append("n_zeta must be an integer >= 3")

    return errors


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    """Everything one run produced, before any file is written."""

    config: ScenarioConfig
    trajectory_qll: Trajectory
    trajectory_qllg: Trajectory
    table_qll: dict
    table_qllg: dict
    curves: tuple[MisfitCurve, ...]
    verdict: EquivalenceVerdict


def _candidate_grid(n_grid: int, zeta_hi: float) -> int:
    """Points needed so the candidate grid covers zeta_hi * t_max."""
    return math.ceil((n_grid - 1) * zeta_hi) + 1


def simulate_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Integrate both dynamics kinds and run the full misfit analysis.

    The reference kind runs on the configured grid; the candidate kind
    runs on the same spacing extended past ``zeta_hi * t_max`` so the
    misfit scan never extrapolates.
    """
    spin = SpinQuantumNumber(config.two_s)
    ops = make_spin_operators(spin)
    rho0 = build_initial_state(config.state, spin)
    h = build_hamiltonian(
        HamiltonianSpec(
            b_field=config.b_field, k_perp=config.k_perp, k_par=config.k_par
        ),
        ops,
    )
    icfg = IntegratorConfig(
        method=config.method,
        step=config.step,
        rtol=config.rtol,
        atol=config.atol,
        kappa=config.kappa,
    )
    dt = config.t_max / (config.n_grid - 1)
    n_ext = _candidate_grid(config.n_grid, config.zeta_hi)
    t_ext = dt * (n_ext - 1)

    traj_qll = integrate(DynamicsKind.QLL, rho0, h, icfg, config.t_max, config.n_grid)
    traj_qllg = integrate(DynamicsKind.QLLG, rho0, h, icfg, t_ext, n_ext)

    table_qll = trajectory_observables(traj_qll, ops, h)
    table_qllg = trajectory_observables(traj_qllg, ops, h)
    series_qll = ObservableSeries.from_table(table_qll)
    series_qllg = ObservableSeries.from_table(table_qllg)

    curves = misfit_curves(
        series_qll,
        series_qllg,
        zeta_lo=config.zeta_lo,
        zeta_hi=config.zeta_hi,
        n_zeta=config.n_zeta,
    )
    verdict = equivalence_verdict(curves)
    return ScenarioResult(
        config=config,
        trajectory_qll=traj_qll,
        trajectory_qllg=traj_qllg,
        table_qll=table_qll,
        table_qllg=table_qllg,
        curves=curves,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# artifact files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunArtifact:
    """Paths of the files one run wrote, plus the in-memory result."""

    out_dir: Path
    config_path: Path
    trajectory_qll_path: Path
    trajectory_qllg_path: Path
    misfit_path: Path
    verdict_path: Path
    manifest_path: Path
    result: ScenarioResult


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: Path, data: bytes):
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _csv_bytes(table: dict) -> bytes:
    cols = [np.asarray(table[k], dtype=float) for k in CSV_COLUMNS]
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in zip(*cols):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue().encode("ascii")


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("ascii")


def _misfit_payload(config: ScenarioConfig, curves) -> dict:
    return {
        "schema": MISFIT_SCHEMA_VERSION,
        "name": config.name,
        "zeta_lo": config.zeta_lo,
        "zeta_hi": config.zeta_hi,
        "n_zeta": config.n_zeta,
        "components": [
            {
                "label": c.label,
                "zeta_min": c.zeta_min,
                "value_min": c.value_min,
                "argmin_interior": c.argmin_interior,
                "zetas": c.zetas.tolist(),
                "values": c.values.tolist(),
            }
            for c in curves
        ],
    }


def _verdict_payload(config: ScenarioConfig, curves, v: EquivalenceVerdict) -> dict:
    return {
        "schema": VERDICT_SCHEMA_VERSION,
        "name": config.name,
        "equivalent": v.equivalent,
        "zeta_star": v.zeta_star,
        "zeta_spread": v.zeta_spread,
        "max_min_value": v.max_min_value,
        "zeta_tol": v.zeta_tol,
        "value_tol": v.value_tol,
        "components": [
            {"label": c.label, "zeta_min": c.zeta_min, "value_min": c.value_min}
            for c in curves
        ],
    }


def run_scenario(config: ScenarioConfig, out_dir) -> RunArtifact:
    """Simulate one scenario and write its artifact directory.

    Every file is written atomically; rerunning the same config yields
    byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = simulate_scenario(config)

    payloads = {
        "config.json": _json_bytes(config.to_dict()),
        "trajectory_qll.csv": _csv_bytes(result.table_qll),
        "trajectory_qllg.csv": _csv_bytes(result.table_qllg),
        "misfit.json": _json_bytes(_misfit_payload(config, result.curves)),
        "verdict.json": _json_bytes(_verdict_payload(config, result.curves, result.verdict)),
    }
    for name, data in payloads.items():
        _write_atomic(out / name, data)

    manifest = {
        "schema": MANIFEST_SCHEMA_VERSION,
        "name": config.name,
        "files": {
            name: {
                "bytes": len(data),
                "sha256": hashlib.sha256(data).hexdigest(),
            }
            for name, data in payloads.items()
        },
        "n_grid": config.n_grid,
        "n_grid_candidate": result.trajectory_qllg.n_grid,
    }
    _write_atomic(out / "manifest.json", _json_bytes(manifest))

    return RunArtifact(
        out_dir=out,
        config_path=out / "config.json",
        trajectory_qll_path=out / "trajectory_qll.csv",
        trajectory_qllg_path=out / "trajectory_qllg.csv",
        misfit_path=out / "misfit.json",
        verdict_path=out / "verdict.json",
        manifest_path=out / "manifest.json",
        result=result,
    )


def read_trajectory_table(path) -> dict:
    """Load one trajectory CSV back into a column dict (floats round-trip)."""
    path = Path(path)
    with open(path, "r", encoding="ascii", newline="") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(
            f"{path.name}: unexpected columns {header}, expected {list(CSV_COLUMNS)}"
        )
    if data.shape[0] < 2:
        raise ValueError(f"{path.name}: need at least two rows, got {data.shape[0]}")
    return {k: data[:, i].copy() for i, k in enumerate(CSV_COLUMNS)}


def rerun_misfit(run_dir) -> tuple[Path, Path]:
    """Recompute misfit.json and verdict.json from the stored CSVs.

    Uses only the artifact directory: the echoed config supplies the scan
    window and the CSVs supply the series, so the rewritten files are
    byte-identical to the original run's.
    """
    run = Path(run_dir)
    with open(run / "config.json", "r", encoding="ascii") as fh:
        config = ScenarioConfig.from_dict(json.load(fh))
    table_qll = read_trajectory_table(run / "trajectory_qll.csv")
    table_qllg = read_trajectory_table(run / "trajectory_qllg.csv")
    series_qll = ObservableSeries.from_table(table_qll)
    series_qllg = ObservableSeries.from_table(table_qllg)
    curves = misfit_curves(
        series_qll,
        series_qllg,
        zeta_lo=config.zeta_lo,
        zeta_hi=config.zeta_hi,
        n_zeta=config.n_zeta,
    )
    verdict = equivalence_verdict(curves)

    misfit_path = run / "misfit.json"
    verdict_path = run / "verdict.json"
    _write_atomic(misfit_path, _json_bytes(_misfit_payload(config, curves)))
    _write_atomic(verdict_path, _json_bytes(_verdict_payload(config, curves, verdict)))
    return misfit_path, verdict_path


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError([message])


def _load_config_arg(arg: str) -> ScenarioConfig:
    if arg in PRESETS:
        return preset_config(arg)
    path = Path(arg)
    if not path.exists():
        raise ConfigError(
            [f"{arg!r} is neither a preset nor an existing config file"]
        )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON: {exc}"])
    return ScenarioConfig.from_dict(data)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qspindyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write artifacts")
    p_run.add_argument("scenario", help="preset name or path to a config JSON")
    p_run.add_argument("--out", required=True, help="output directory")

    sub.add_parser("presets", help="list the built-in scenarios")

    p_val = sub.add_parser("validate", help="check a config file, reporting all errors")
    p_val.add_argument("config", help="path to a config JSON")

    p_mis = sub.add_parser("misfit", help="recompute misfit files from stored CSVs")
    p_mis.add_argument("--rerun", required=True, metavar="DIR", help="run directory")
    return parser


def main(argv=None) -> int:
    """CLI entry point; returns the process exit code."""
    try:
        args = _build_parser().parse_args(argv)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1

    try:
        if args.command == "presets":
            for name in list_presets():
                print(f"{name}: {PRESET_DESCRIPTIONS[name]}")
            return 0

        if args.command == "validate":
            path = Path(args.config)
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    data = json.load(fh)
            except OSError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            except json.JSONDecodeError as exc:
                print(f"error: {path}: invalid JSON: {exc}", file=sys.stderr)
                return 1
            errors = validate_config(data)
            for err in errors:
                print(f"error: {err}", file=sys.stderr)
            if errors:
                return 1
            print(f"{path}: valid ({data.get('name', 'custom')})")
            return 0

        if args.command == "run":
            try:
                config = _load_config_arg(args.scenario)
            except ConfigError as exc:
                for err in exc.errors:
                    print(f"error: {err}", file=sys.stderr)
                return 1
            artifact = run_scenario(config, args.out)
            v = artifact.result.verdict
            print(
                f"{config.name}: equivalent={v.equivalent} "
                f"zeta_star={v.zeta_star:.6f} spread={v.zeta_spread:.3e} "
                f"max_min={v.max_min_value:.3e}"
            )
            print(f"artifacts written to {artifact.out_dir}")
            return 0

        if args.command == "misfit":
            misfit_path, verdict_path = rerun_misfit(args.rerun)
            print(f"rewrote {misfit_path} and {verdict_path}")
            return 0
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2
