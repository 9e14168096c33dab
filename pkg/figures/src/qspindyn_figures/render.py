"""Figure construction and deterministic rendering.

All inputs are parsed and validated before the output path is touched, so a
bad artifact directory never leaves a partial image behind. Output is PNG
with pinned metadata; rendering the same artifacts twice yields identical
bytes.
"""

import os
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .artifacts import ArtifactError, read_misfit, read_trajectory

KINDS = ("spin_components", "covariance_elements", "fluctuations", "misfit_curves")

QLLG_STYLE = "-"
QLL_STYLE = "--"
ARGMIN_STYLE = ":"

_PANELS = {
    "spin_components": ("Sx", "Sy", "Sz"),
    "covariance_elements": ("Cxx", "Cxy", "Cxz", "Cyy", "Cyz", "Czz"),
    "fluctuations": ("Ve", "trC"),
}

# tab10 hex values, fixed here so a matplotlib default change cannot alter output
_COLORS = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)

_PNG_METADATA = {"Software": "qspindyn-figures"}


@dataclass(frozen=True)
class FigureSpec:
    """One rendering request: which figure, from where, to where."""

    kind: str
    artifact_dir: Path
    out_path: Path
    panel_labels: tuple = None
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}, expected one of {KINDS}")
        object.__setattr__(self, "artifact_dir", Path(self.artifact_dir))
        object.__setattr__(self, "out_path", Path(self.out_path))
        if self.panel_labels is not None:
            object.__setattr__(self, "panel_labels", tuple(self.panel_labels))
        if self.out_path.suffix.lower() != ".png":
            raise ValueError(
                f"unsupported output format {self.out_path.suffix!r}: only .png "
                "renders byte-identically"
            )
        if not self.dpi > 0:
            raise ValueError(f"dpi must be positive, got {self.dpi}")


def _panel_labels(spec: FigureSpec, default: tuple) -> tuple:
    if spec.panel_labels is None:
        return default
    if len(spec.panel_labels) != len(default):
        raise ValueError(
            f"{spec.kind} needs {len(default)} panel labels, "
            f"got {len(spec.panel_labels)}"
        )
    return spec.panel_labels


def _trajectory_pair_figure(spec: FigureSpec, columns: tuple, ncols: int):
    table_ll = read_trajectory(spec.artifact_dir / "trajectory_qll.csv")
    table_g = read_trajectory(spec.artifact_dir / "trajectory_qllg.csv")
    labels = _panel_labels(spec, columns)

    nrows = len(columns) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, sharex=True, figsize=(4.2 * ncols + 2.2, 2.2 * nrows + 0.8)
    )
    axes = list(axes.flat)
    t_end = table_ll["t"][-1]
    for i, (col, label) in enumerate(zip(columns, labels)):
        ax = axes[i]
        color = _COLORS[i % len(_COLORS)]
        ax.plot(
            table_g["t"], table_g[col], QLLG_STYLE, color=color, lw=1.2,
            label=f"qllg {col}",
        )
        ax.plot(
            table_ll["t"], table_ll[col], QLL_STYLE, color="black", lw=1.0,
            label=f"qll {col}",
        )
        ax.set_xlim(0.0, t_end)
        ax.set_ylabel(label)
        ax.legend(loc="upper right", fontsize=8, framealpha=1.0)
    for ax in axes[-ncols:]:
        ax.set_xlabel("t")
    fig.tight_layout()
    return fig


def _misfit_figure(spec: FigureSpec):
    data = read_misfit(spec.artifact_dir / "misfit.json")
    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    for i, comp in enumerate(data.components):
        color = _COLORS[i % len(_COLORS)]
        ax.plot(comp.zetas, comp.values, QLLG_STYLE, color=color, lw=1.1,
                label=comp.label)
        ax.axvline(comp.zeta_min, linestyle=ARGMIN_STYLE, color=color, lw=1.0)
    ax.set_xlim(data.zeta_lo, data.zeta_hi)
    ax.set_xlabel("time rescaling factor")
    ax.set_ylabel("misfit")
    if data.name:
        ax.set_title(data.name)
    ax.legend(loc="upper right", fontsize=8, ncol=3, framealpha=1.0)
    fig.tight_layout()
    return fig


def build_figure(spec: FigureSpec):
    """Parse the artifacts named by ``spec`` and return the matplotlib figure."""
    if spec.kind == "misfit_curves":
        return _misfit_figure(spec)
    if spec.kind == "covariance_elements":
        return _trajectory_pair_figure(spec, _PANELS[spec.kind], ncols=2)
    return _trajectory_pair_figure(spec, _PANELS[spec.kind], ncols=1)


def render(spec: FigureSpec) -> Path:
    """Render one figure to ``spec.out_path`` and return that path.

    The image is written atomically after every input has parsed, so no
    file appears on failure. Identical artifacts produce identical bytes.
    """
    fig = build_figure(spec)
    try:
        out = spec.out_path
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp = out.with_name(out.name + ".tmp")
        fig.savefig(tmp, format="png", dpi=spec.dpi, metadata=_PNG_METADATA)
        os.replace(tmp, out)
    finally:
        plt.close(fig)
    return out


__all__ = [
    "ARGMIN_STYLE",
    "ArtifactError",
    "FigureSpec",
    "KINDS",
    "QLL_STYLE",
    "QLLG_STYLE",
    "build_figure",
    "render",
]
