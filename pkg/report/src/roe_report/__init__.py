"""Static report builder for extraction-experiment batches.

Reads the run files the ``roe`` CLI writes (certificate/config JSON and
residual-sweep CSV), renders SVG charts and one self-contained HTML page.
Pure stdlib; never mutates its inputs; byte-idempotent outputs.
"""

from .batch import ExperimentBatch, Run, SchemaMismatch, discover_batch
from .charts import render_goal_surface, render_recovery
from .html import render_summary

__version__ = "0.1.0"

__all__ = [
    "ExperimentBatch",
    "Run",
    "SchemaMismatch",
    "discover_batch",
    "render_goal_surface",
    "render_recovery",
    "render_summary",
]
