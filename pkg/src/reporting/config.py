"""Configuration constants for the reporting pipeline."""
from __future__ import annotations

import os

# Significant digits of numbers in text summaries
SUMMARY_DIGITS: int = int(os.getenv("REPORT_SUMMARY_DIGITS", "6"))

# Figure size in inches for the per-metric plots
PLOT_WIDTH: float = float(os.getenv("REPORT_PLOT_WIDTH", "6.0"))
PLOT_HEIGHT: float = float(os.getenv("REPORT_PLOT_HEIGHT", "4.0"))

# Base font size of plot labels
PLOT_FONT_SIZE: int = int(os.getenv("REPORT_PLOT_FONT_SIZE", "10"))

# Salt for SVG element ids; fixed so reruns produce identical files
SVG_HASH_SALT: str = os.getenv("REPORT_SVG_HASH_SALT", "fda-phase")
