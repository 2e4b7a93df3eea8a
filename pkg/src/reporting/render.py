"""Render text summaries using Jinja2 templates."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from jinja2 import Environment, FileSystemLoader

from src.reporting.context import (
    FailuresContext,
    PhaseContext,
    RateContext,
    SweepContext,
    VerifyContext,
)

logger = logging.getLogger(__name__)

_TEMPLATE_DIR = Path(__file__).parent / "templates"

# Plain-text output; escaping would mangle "<=" in check tolerances.
_env = Environment(
    loader=FileSystemLoader(str(_TEMPLATE_DIR)),
    autoescape=False,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)

# ---------------------------------------------------------------------------
# Helper functions
# ---------------------------------------------------------------------------


def _render(template_name: str, context: dict) -> str:
    return _env.get_template(template_name).render(**context)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def render_phase_summary(context: PhaseContext) -> str:
    return _render("phase_summary.txt.j2", context.to_dict())


def render_verify(context: VerifyContext) -> str:
    return _render("verify.txt.j2", context.to_dict())


def render_failures(context: FailuresContext) -> str:
    return _render("failures.txt.j2", context.to_dict())


def render_rate_summary(context: RateContext) -> str:
    return _render("rates.txt.j2", context.to_dict())


def render_sweep_summary(context: SweepContext) -> str:
    return _render("sweep_summary.txt.j2", context.to_dict())


def write_text(path: str | Path, text: str, *, label: Optional[str] = None) -> Path:
    """Write *text* to *path*, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    logger.debug("Wrote %s (%d chars) to %s", label or "text", len(text), target)
    return target
