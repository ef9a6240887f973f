"""Chart rendering: residual heatmaps and recovery scatter.

One heatmap panel per run with a residual sweep, cells colored by
residual and the delta = 0.5 feasibility frontier drawn as a heavy
outline around the feasible cells. A single grid cell renders as a
single rectangle, never interpolated.
"""

from __future__ import annotations

from .batch import ExperimentBatch, Run, SchemaMismatch
from .svg import Svg, fmt, heat_color

CELL = 44
MARGIN_LEFT = 64
MARGIN_TOP = 46
MARGIN_BOTTOM = 34
PANEL_GAP = 26
FRONTIER_DELTA = 0.5


def _panel_geometry(run: Run):
    eps_values = sorted({row.eps for row in run.goal_rows}, reverse=True)
    m_values = sorted({row.m for row in run.goal_rows})
    return eps_values, m_values


def _draw_panel(svg: Svg, run: Run, x0: int, y0: int) -> tuple[int, int]:
    eps_values, m_values = _panel_geometry(run)
    table = {(row.eps, row.m): row.residual for row in run.goal_rows}
    width = len(m_values) * CELL
    height = len(eps_values) * CELL
    svg.text(x0, y0 - 28, run.name, size=13, fill="#111")
    svg.text(x0, y0 - 12, f"frontier: residual < {FRONTIER_DELTA}",
             size=10, fill="#666")

    def feasible(i, j):
        key = (eps_values[i], m_values[j])
        return key in table and table[key] < FRONTIER_DELTA

    for i, eps in enumerate(eps_values):
        for j, m in enumerate(m_values):
            x, y = x0 + j * CELL, y0 + i * CELL
            residual = table.get((eps, m))
            if residual is None:
                svg.rect(x, y, CELL, CELL, "#eeeeee", stroke="#cccccc")
                continue
            svg.rect(x, y, CELL, CELL, heat_color(residual), stroke="#bbbbbb",
                     stroke_width=0.5)
            svg.text(x + CELL / 2, y + CELL / 2 + 4, fmt(round(residual, 3)),
                     size=10, anchor="middle",
                     fill="#111" if residual < 0.55 else "#ffffff")
    # frontier: heavy segments between feasible cells and everything else
    for i in range(len(eps_values)):
        for j in range(len(m_values)):
            if not feasible(i, j):
                continue
            x, y = x0 + j * CELL, y0 + i * CELL
            if i == 0 or not feasible(i - 1, j):
                svg.line(x, y, x + CELL, y, "#1a6091", width=3)
            if i == len(eps_values) - 1 or not feasible(i + 1, j):
                svg.line(x, y + CELL, x + CELL, y + CELL, "#1a6091", width=3)
            if j == 0 or not feasible(i, j - 1):
                svg.line(x, y, x, y + CELL, "#1a6091", width=3)
            if j == len(m_values) - 1 or not feasible(i, j + 1):
                svg.line(x + CELL, y, x + CELL, y + CELL, "#1a6091", width=3)
    for i, eps in enumerate(eps_values):
        svg.text(x0 - 8, y0 + i * CELL + CELL / 2 + 4, f"eps={fmt(eps)}",
                 size=10, anchor="end", fill="#333")
    for j, m in enumerate(m_values):
        svg.text(x0 + j * CELL + CELL / 2, y0 + height + 14, f"m={fmt(m)}",
                 size=10, anchor="middle", fill="#333")
    return width, height


def render_goal_surface(batch: ExperimentBatch, out_path) -> str:
    """Write the residual heatmap SVG; needs at least one sweep in the batch."""
    runs = batch.goal_runs()
    if not runs:
        raise SchemaMismatch("batch contains no residual sweep (goal.csv)")
    panel_sizes = []
    for run in runs:
        eps_values, m_values = _panel_geometry(run)
        panel_sizes.append((len(m_values) * CELL, len(eps_values) * CELL))
    width = MARGIN_LEFT + max(w for w, _ in panel_sizes) + 24
    height = MARGIN_TOP
    for _, h in panel_sizes:
        height += h + MARGIN_BOTTOM + PANEL_GAP
    svg = Svg(width, height)
    y = MARGIN_TOP
    for run in runs:
        _, h = _draw_panel(svg, run, MARGIN_LEFT, y)
        y += h + MARGIN_BOTTOM + PANEL_GAP
    content = svg.render()
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
    return content


def render_recovery(batch: ExperimentBatch, out_path) -> str:
    """Write the recovery scatter: closeness to the truth vs perturbation radius.

    One point per run carrying a truth comparison, labelled by seed, with
    a polyline through the per-radius means; an empty batch produces an
    empty chart with a visible warning.
    """
    runs = batch.truth_runs()
    width, height = 480, 320
    svg = Svg(width, height)
    svg.text(56, 24, "recovery: closeness(h, truth) vs perturbation radius",
             size=13, fill="#111")
    if not runs:
        svg.text(width / 2, height / 2, "no runs with a truth comparison",
                 size=14, anchor="middle", fill="#a33")
        content = svg.render()
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        return content

    points = []
    for run in runs:
        truth = run.truth
        points.append((float(truth.get("radius", 0.0)),
                       float(truth["closeness_h_truth"]),
                       truth.get("seed", 0)))
    points.sort()
    x_max = max(p[0] for p in points) or 1.0
    y_max = max(p[1] for p in points) or 1.0
    plot_x0, plot_y0, plot_w, plot_h = 56, 40, width - 80, height - 96

    def sx(r):
        return plot_x0 + (r / x_max) * plot_w

    def sy(c):
        return plot_y0 + plot_h - (c / y_max) * plot_h

    svg.line(plot_x0, plot_y0 + plot_h, plot_x0 + plot_w, plot_y0 + plot_h,
             "#333")
    svg.line(plot_x0, plot_y0, plot_x0, plot_y0 + plot_h, "#333")
    for frac in (0.0, 0.5, 1.0):
        svg.text(sx(frac * x_max), plot_y0 + plot_h + 16, fmt(frac * x_max),
                 size=10, anchor="middle", fill="#333")
        svg.text(plot_x0 - 6, sy(frac * y_max) + 4, fmt(frac * y_max),
                 size=10, anchor="end", fill="#333")
    svg.text(plot_x0 + plot_w / 2, height - 8, "perturbation radius",
             size=11, anchor="middle", fill="#333")

    by_radius: dict[float, list[float]] = {}
    for r, c, _ in points:
        by_radius.setdefault(r, []).append(c)
    means = [(r, sum(cs) / len(cs)) for r, cs in sorted(by_radius.items())]
    if len(means) > 1:
        svg.polyline([(sx(r), sy(c)) for r, c in means], "#1a6091")
    for r, c, seed in points:
        svg.circle(sx(r), sy(c), 4, "#d94801", stroke="#7f2704")
        svg.text(sx(r) + 6, sy(c) - 6, f"s{seed}", size=9, fill="#666")
    content = svg.render()
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
    return content
