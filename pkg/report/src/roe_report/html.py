"""Self-contained HTML summary: charts inlined, one row per run."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .batch import ExperimentBatch, Run

_STYLE = """
body { font-family: -apple-system, 'Segoe UI', sans-serif; margin: 2rem;
       color: #1c1c1c; background: #fafafa; }
h1 { font-size: 1.4rem; } h2 { font-size: 1.1rem; margin-top: 2rem; }
table { border-collapse: collapse; width: 100%; background: #fff; }
th, td { border: 1px solid #ddd; padding: 0.4rem 0.6rem; font-size: 0.85rem;
         text-align: left; vertical-align: top; }
th { background: #f0f0f0; }
tr.failed td { background: #fdecea; }
code { font-family: Menlo, Consolas, monospace; font-size: 0.8rem; }
.placeholder { color: #888; font-style: italic; border: 1px dashed #bbb;
               padding: 1.5rem; background: #fff; }
.ok { color: #1b7f3b; font-weight: 600; } .bad { color: #b02a1d; font-weight: 600; }
"""


def _params_cell(run: Run) -> str:
    params = run.certificate.get("params") or {}
    if run.config and not params:
        params = {"strategy": run.config.get("strategy")}
    return escape(", ".join(f"{k}={v}" for k, v in sorted(params.items())))


def _expansion_cell(run: Run) -> str:
    profile = run.certificate.get("expansion") or {}
    if not profile:
        return "&mdash;"
    pairs = sorted(profile.items(), key=lambda kv: float(kv[0]))
    return "<code>" + escape(
        " ".join(f"{r}&rarr;{s:g}" if isinstance(s, (int, float)) else f"{r}&rarr;{s}"
                 for r, s in pairs)) + "</code>"


def _run_row(run: Run) -> str:
    if run.failed:
        failure = run.certificate.get("failure") or {}
        failures = run.certificate.get("failures") or []
        detail = escape("; ".join(failures)) or "extraction failed"
        witness = escape(str(failure.get("witness", "")))
        stage = escape(str(failure.get("stage", "?")))
        return (f'<tr class="failed"><td>{escape(run.name)}</td>'
                f'<td>{_params_cell(run)}</td>'
                f'<td colspan="4"><span class="bad">failed</span> '
                f'at stage <code>{stage}</code>: {detail}'
                f'<br/>witness: <code>{witness}</code></td></tr>')
    cert = run.certificate
    residual = cert.get("goal_residual")
    closeness = cert.get("closeness_h_f")
    truth = run.truth
    truth_cell = (f"{truth['closeness_h_truth']:g} (radius {truth.get('radius', 0):g})"
                  if truth else "&mdash;")
    verified = ('<span class="ok">yes</span>' if cert.get("verified")
                else '<span class="bad">no</span>')
    return (f"<tr><td>{escape(run.name)}</td>"
            f"<td>{_params_cell(run)}</td>"
            f"<td>{residual:g}</td>"
            f"<td>{closeness:g} / {truth_cell}</td>"
            f"<td>{_expansion_cell(run)}</td>"
            f"<td>{verified}</td></tr>")


def render_summary(batch: ExperimentBatch, charts: dict[str, str | None]) -> str:
    """Build the summary page; ``charts`` maps title -> inline SVG or None."""
    rows = "\n".join(_run_row(run) for run in batch.runs)
    chart_sections = []
    for title, svg in charts.items():
        if svg is None:
            body = f'<div class="placeholder">{escape(title)}: not rendered</div>'
        else:
            body = svg
        chart_sections.append(f"<h2>{escape(title)}</h2>\n{body}")
    failures = batch.failures()
    counts = (f"{len(batch.runs)} run(s), {len(batch.goal_runs())} with "
              f"residual sweeps, {len(failures)} failed")
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8"/>
<title>experiment batch report</title>
<style>{_STYLE}</style>
</head>
<body>
<h1>Experiment batch: <code>{escape(batch.root)}</code></h1>
<p>{counts}</p>
<h2>Certificates</h2>
<table>
<tr><th>run</th><th>params</th><th>residual</th>
<th>closeness h&rarr;f_raw / truth</th><th>expansion</th><th>verified</th></tr>
{rows}
</table>
{chr(10).join(chart_sections)}
</body>
</html>
"""
