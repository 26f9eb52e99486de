"""Figure rendering and validation for niching-EA experiment outputs."""

from .render import KINDS, FigureSpec, extract_series, render, render_file
from .schemas import (RUN_COLUMNS, SUMMARY_COLUMNS, TRACE_COLUMNS,
                      ValidationReport, Violation, validate_csv,
                      validate_path, validate_snapshot)
from .series import (SchemaError, curve_series, heatmap_series,
                     snapshot_series)

__version__ = "0.1.0"

__all__ = [
    "KINDS", "FigureSpec", "extract_series", "render", "render_file",
    "RUN_COLUMNS", "SUMMARY_COLUMNS", "TRACE_COLUMNS",
    "ValidationReport", "Violation", "validate_csv", "validate_path",
    "validate_snapshot", "SchemaError", "curve_series", "heatmap_series",
    "snapshot_series", "__version__",
]
