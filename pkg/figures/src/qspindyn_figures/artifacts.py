"""Readers for the documented qspindyn artifact schemas.

This package never imports the simulator; the CSV/JSON files are the whole
interface. The column list and JSON schema tags below restate that documented
contract and are validated strictly, since a silent mismatch would produce a
wrong figure rather than a crash.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

CSV_COLUMNS = (
    "t",
    "Sx",
    "Sy",
    "Sz",
    "Cxx",
    "Cxy",
    "Cxz",
    "Cyy",
    "Cyz",
    "Czz",
    "purity",
    "energy",
    "Ve",
    "trC",
    "dSx",
    "dSy",
    "dSz",
    "dCxx",
    "dCxy",
    "dCxz",
    "dCyy",
    "dCyz",
    "dCzz",
)

MISFIT_SCHEMA = "qspindyn.misfit.v1"

_COMPONENT_KEYS = ("label", "zetas", "values", "zeta_min")


class ArtifactError(ValueError):
    """An artifact file is missing, empty, or violates its schema."""


@dataclass(frozen=True)
class MisfitComponent:
    label: str
    zetas: np.ndarray
    values: np.ndarray
    zeta_min: float


@dataclass(frozen=True)
class MisfitData:
    name: str
    zeta_lo: float
    zeta_hi: float
    components: tuple


def read_trajectory(path) -> dict:
    """Load one trajectory CSV as a dict of named float columns.

    Raises ArtifactError naming the first offending column when the header
    deviates from the documented layout, and when the file is empty or has
    a header but no rows.
    """
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"{path}: no such file")
    with path.open("r", encoding="ascii") as fh:
        header_line = fh.readline().strip()
        if not header_line:
            raise ArtifactError(f"{path.name}: empty file")
        header = tuple(header_line.split(","))
        for got, want in zip(header, CSV_COLUMNS):
            if got != want:
                raise ArtifactError(
                    f"{path.name}: schema mismatch, column '{got}' where "
                    f"'{want}' was expected"
                )
        if len(header) < len(CSV_COLUMNS):
            missing = CSV_COLUMNS[len(header)]
            raise ArtifactError(f"{path.name}: schema mismatch, missing column '{missing}'")
        if len(header) > len(CSV_COLUMNS):
            extra = header[len(CSV_COLUMNS)]
            raise ArtifactError(f"{path.name}: schema mismatch, unexpected column '{extra}'")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise ArtifactError(f"{path.name}: empty table, no data rows")
    if data.shape[1] != len(CSV_COLUMNS):
        raise ArtifactError(
            f"{path.name}: row width {data.shape[1]} does not match the "
            f"{len(CSV_COLUMNS)}-column header"
        )
    return {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}


def read_misfit(path) -> MisfitData:
    """Load misfit.json: per-component scan curves plus refined argmins.

    The argmins are taken verbatim from the file; nothing is recomputed.
    """
    import json

    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"{path}: no such file")
    try:
        doc = json.loads(path.read_text(encoding="ascii"))
    except ValueError as exc:
        raise ArtifactError(f"{path.name}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("schema") != MISFIT_SCHEMA:
        raise ArtifactError(
            f"{path.name}: schema mismatch, expected '{MISFIT_SCHEMA}', "
            f"got {doc.get('schema')!r}"
        )
    raw = doc.get("components")
    if not isinstance(raw, list) or not raw:
        raise ArtifactError(f"{path.name}: schema mismatch, missing column 'components'")
    components = []
    for i, comp in enumerate(raw):
        for key in _COMPONENT_KEYS:
            if key not in comp:
                raise ArtifactError(
                    f"{path.name}: schema mismatch, component {i} missing "
                    f"column '{key}'"
                )
        zetas = np.asarray(comp["zetas"], dtype=float)
        values = np.asarray(comp["values"], dtype=float)
        if zetas.ndim != 1 or zetas.shape != values.shape or zetas.size < 2:
            raise ArtifactError(
                f"{path.name}: component {comp['label']!r} has malformed "
                "zetas/values arrays"
            )
        components.append(
            MisfitComponent(
                label=str(comp["label"]),
                zetas=zetas,
                values=values,
                zeta_min=float(comp["zeta_min"]),
            )
        )
    return MisfitData(
        name=str(doc.get("name", "")),
        zeta_lo=float(doc.get("zeta_lo", components[0].zetas[0])),
        zeta_hi=float(doc.get("zeta_hi", components[0].zetas[-1])),
        components=tuple(components),
    )
