"""roe-report DIR --out DIR: render charts and the HTML summary."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .batch import SchemaMismatch, discover_batch
from .charts import render_goal_surface, render_recovery
from .html import render_summary


def build(batch_dir, out_dir) -> list[str]:
    batch = discover_batch(batch_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    charts: dict[str, str | None] = {}

    if batch.goal_runs():
        surface = render_goal_surface(batch, out / "goal_surface.svg")
        charts["residual surface"] = surface
        written.append("goal_surface.svg")
    else:
        charts["residual surface"] = None

    recovery = render_recovery(batch, out / "recovery.svg")
    charts["recovery"] = recovery
    written.append("recovery.svg")

    html = render_summary(batch, charts)
    (out / "index.html").write_text(html, encoding="utf-8", newline="\n")
    written.append("index.html")
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="roe-report",
        description="Render SVG charts and an HTML summary for a batch of "
                    "extraction runs.")
    parser.add_argument("batch_dir", help="directory containing run directories")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        written = build(args.batch_dir, args.out)
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name in written:
        print(f"wrote {Path(args.out) / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
