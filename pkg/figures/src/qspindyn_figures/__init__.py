"""Offline rendering of qspindyn artifacts into figures.

Consumes only the documented CSV/JSON artifact schemas; the simulator
package is never imported and no quantity is recomputed here.
"""

from .artifacts import (
    CSV_COLUMNS,
    MISFIT_SCHEMA,
    ArtifactError,
    MisfitComponent,
    MisfitData,
    read_misfit,
    read_trajectory,
)
from .render import (
    ARGMIN_STYLE,
    KINDS,
    QLL_STYLE,
    QLLG_STYLE,
    FigureSpec,
    build_figure,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "ARGMIN_STYLE",
    "ArtifactError",
    "CSV_COLUMNS",
    "FigureSpec",
    "KINDS",
    "MISFIT_SCHEMA",
    "MisfitComponent",
    "MisfitData",
    "QLL_STYLE",
    "QLLG_STYLE",
    "build_figure",
    "read_misfit",
    "read_trajectory",
    "render",
    "__version__",
]
