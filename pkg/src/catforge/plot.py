"""Static SVG charts of items and simulation results.

Each chart function returns a :class:`Chart`, which holds both the SVG
markup and the numeric table the SVG was drawn from. :meth:`Chart.write`
saves the two side by side (``name.svg`` and ``name.csv``). Output is a pure
function of the input, so charts are byte-for-byte reproducible.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import irt

THETA_RANGE = irt.THETA_BOUNDS
CURVE_POINTS = 241

COLORS = {
    "icc": "#1f77b4",
    "iic": "#d62728",
    "theta_hat": "#1f77b4",
    "true_theta": "#555555",
    "info": "#2ca02c",
    "var": "#9467bd",
    "see": "#ff7f0e",
    "exposure": "#1f77b4",
}


def _f(x: float) -> str:
    return f"{x:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not hi > lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return ticks


def _tick_label(t: float) -> str:
    return f"{t:g}" if abs(t) >= 1e-3 or t == 0 else f"{t:.1e}"


def _range(values, pad: float = 0.05) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if hi == lo:
        return lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


@dataclass
class _Panel:
    x0: float
    y0: float
    width: float
    height: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]

    def px(self, x: float) -> float:
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * self.width

    def py(self, y: float) -> float:
        lo, hi = self.ylim
        return self.y0 + self.height - (y - lo) / (hi - lo) * self.height


@dataclass
class _Canvas:
    width: int
    height: int
    title: str
    parts: list[str] = field(default_factory=list)

    def add(self, element: str) -> None:
        self.parts.append(element)

    def text(self, x, y, s, anchor="middle", size=11, cls="label", rotate=None):
        transform = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
        self.add(
            f'<text class="{cls}" x="{_f(x)}" y="{_f(y)}" font-size="{size}" '
            f'text-anchor="{anchor}"{transform}>{escape(s)}</text>'
        )

    def axes(self, panel: _Panel, xlabel: str, ylabel: str, right_ylim=None, right_label=None):
        p = panel
        self.add(
            f'<rect class="frame" x="{_f(p.x0)}" y="{_f(p.y0)}" width="{_f(p.width)}" '
            f'height="{_f(p.height)}" fill="none" stroke="#000" stroke-width="1"/>'
        )
        for t in _nice_ticks(*p.xlim):
            x = p.px(t)
            self.add(f'<line class="tick" x1="{_f(x)}" y1="{_f(p.y0 + p.height)}" x2="{_f(x)}" '
                     f'y2="{_f(p.y0 + p.height + 4)}" stroke="#000"/>')
            self.text(x, p.y0 + p.height + 16, _tick_label(t), size=10, cls="tick-label")
        for t in _nice_ticks(*p.ylim):
            y = p.py(t)
            self.add(f'<line class="tick" x1="{_f(p.x0 - 4)}" y1="{_f(y)}" x2="{_f(p.x0)}" '
                     f'y2="{_f(y)}" stroke="#000"/>')
            self.text(p.x0 - 7, y + 3, _tick_label(t), anchor="end", size=10, cls="tick-label")
        if right_ylim is not None:
            rp = _Panel(p.x0, p.y0, p.width, p.height, p.xlim, right_ylim)
            for t in _nice_ticks(*right_ylim):
                y = rp.py(t)
                right = p.x0 + p.width
                self.add(f'<line class="tick" x1="{_f(right)}" y1="{_f(y)}" x2="{_f(right + 4)}" '
                         f'y2="{_f(y)}" stroke="#000"/>')
                self.text(right + 7, y + 3, _tick_label(t), anchor="start", size=10, cls="tick-label")
            self.text(p.x0 + p.width + 45, p.y0 + p.height / 2, right_label or "", rotate=90)
        self.text(p.x0 + p.width / 2, p.y0 + p.height + 32, xlabel)
        self.text(p.x0 - 42, p.y0 + p.height / 2, ylabel, rotate=-90)

    def polyline(self, panel: _Panel, xs, ys, series: str, dashed=False):
        pts = " ".join(
            f"{_f(panel.px(x))},{_f(panel.py(y))}" for x, y in zip(xs, ys) if math.isfinite(y)
        )
        dash = ' stroke-dasharray="6 4"' if dashed else ""
        self.add(
            f'<polyline class="series" data-series="{series}" points="{pts}" fill="none" '
            f'stroke="{COLORS.get(series, "#000")}" stroke-width="1.8"{dash}/>'
        )

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif">\n'
            f"<title>{escape(self.title)}</title>\n"
            f'<rect class="background" x="0" y="0" width="{self.width}" height="{self.height}" fill="#fff"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


@dataclass
class Chart:
    """An SVG chart and the table of values it plots."""

    svg: str
    columns: list[str]
    rows: list[list]

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in row])
        return buf.getvalue()

    def write(self, path) -> tuple[Path, Path]:
        """Write ``path`` (SVG) and its ``.csv`` sidecar; returns both paths."""
        svg_path = Path(path)
        csv_path = svg_path.with_suffix(".csv")
        svg_path.write_text(self.svg, encoding="utf-8")
        csv_path.write_text(self.csv_text(), encoding="utf-8")
        return svg_path, csv_path


def item_curve(item, ptype: str = "both", theta_range=THETA_RANGE, points: int = CURVE_POINTS) -> Chart:
    """Characteristic curve (``"icc"``), information curve (``"iic"``) or both.

    The point of maximum information is marked with a circle on the
    information curve (on the characteristic curve when only that is drawn).
    """
    if ptype not in ("icc", "iic", "both"):
        raise ValueError(f"ptype must be 'icc', 'iic' or 'both', got {ptype!r}")
    a, b, c, d = irt._unpack(item)
    params = np.array([[a, b, c, d]])
    thetas = np.linspace(theta_range[0], theta_range[1], points)
    prob = irt.icc_batch(thetas[:, None], params)[:, 0]
    info = irt.inf_batch(thetas[:, None], params)[:, 0]
    peak = irt.max_info((a, b, c, d))

    title = f"Item a={a:.3g} b={b:.3g} c={c:.3g} d={d:.3g}"
    canvas = _Canvas(640, 400, title)
    canvas.text(320, 22, title, size=13, cls="title")
    xlim = (float(theta_range[0]), float(theta_range[1]))
    info_lim = (0.0, max(float(info.max()), irt.inf(peak, (a, b, c, d))) * 1.05 or 1.0)
    prob_panel = _Panel(70, 40, 500, 300, xlim, (0.0, 1.0))
    info_panel = _Panel(70, 40, 500, 300, xlim, info_lim)

    columns = ["theta"]
    rows_cols = [thetas]
    if ptype == "iic":
        canvas.axes(info_panel, "θ", "Information")
    elif ptype == "icc":
        canvas.axes(prob_panel, "θ", "P(correct)")
    else:
        canvas.axes(prob_panel, "θ", "P(correct)", right_ylim=info_lim, right_label="Information")
    if ptype in ("icc", "both"):
        canvas.polyline(prob_panel, thetas, prob, "icc")
        columns.append("icc")
        rows_cols.append(prob)
    if ptype in ("iic", "both"):
        canvas.polyline(info_panel, thetas, info, "iic")
        columns.append("iic")
        rows_cols.append(info)
    if ptype == "icc":
        mx, my = prob_panel.px(peak), prob_panel.py(irt.icc(peak, (a, b, c, d)))
    else:
        mx, my = info_panel.px(peak), info_panel.py(irt.inf(peak, (a, b, c, d)))
    canvas.add(f'<circle class="marker" data-series="max_info" cx="{_f(mx)}" cy="{_f(my)}" r="4" fill="#000"/>')
    canvas.text(mx, my - 9, f"θ*={peak:.3f}", size=10, cls="marker-label")

    rows = [[float(v) for v in row] for row in zip(*rows_cols)]
    return Chart(canvas.render(), columns, rows)


PROGRESS_TRACES = ("info", "var", "see")
_TRACE_LABELS = {"theta_hat": "θ̂", "info": "Test information", "var": "Variance", "see": "SEE"}


def test_progress(
    estimates: Sequence[float],
    info: Sequence[float] = (),
    var: Sequence[float] = (),
    see: Sequence[float] = (),
    true_theta: float | None = None,
    traces: Sequence[str] = PROGRESS_TRACES,
    title: str = "Test progress",
) -> Chart:
    """Estimates and the selected measurement traces against the item number.

    ``estimates`` holds the initial estimate followed by one estimate per
    item; ``info``, ``var`` and ``see`` hold one value per item. The true
    proficiency, when given, is drawn as a dashed horizontal reference.
    """
    unknown = set(traces) - set(PROGRESS_TRACES)
    if unknown:
        raise ValueError(f"unknown traces {sorted(unknown)}, expected a subset of {PROGRESS_TRACES}")
    if not len(estimates):
        raise ValueError("nothing to plot: no estimates")
    n_items = len(estimates) - 1
    series = {"info": list(info), "var": list(var), "see": list(see)}
    for name in traces:
        if len(series[name]) != n_items:
            raise ValueError(f"trace {name!r} needs {n_items} values, got {len(series[name])}")
    traces = [t for t in PROGRESS_TRACES if t in traces]

    panel_h, gap, top = 150, 60, 40
    height = top + (1 + len(traces)) * (panel_h + gap)
    canvas = _Canvas(640, height, title)
    canvas.text(320, 22, title, size=13, cls="title")
    steps = list(range(n_items + 1))
    xlim = (0.0, float(max(n_items, 1)))

    yvals = list(estimates) + ([true_theta] if true_theta is not None else [])
    panel = _Panel(80, top, 500, panel_h, xlim, _range(yvals))
    canvas.axes(panel, "Items administered", _TRACE_LABELS["theta_hat"])
    canvas.polyline(panel, steps, estimates, "theta_hat")
    if true_theta is not None:
        canvas.polyline(panel, xlim, (true_theta, true_theta), "true_theta", dashed=True)

    for k, name in enumerate(traces, start=1):
        ys = series[name]
        panel = _Panel(80, top + k * (panel_h + gap), 500, panel_h, xlim, _range(ys))
        canvas.axes(panel, "Items administered", _TRACE_LABELS[name])
        canvas.polyline(panel, steps[1:], ys, name)

    columns = ["step", "theta_hat"] + list(traces) + (["true_theta"] if true_theta is not None else [])
    rows = []
    for s in steps:
        row = [s, float(estimates[s])]
        row += [None if s == 0 else float(series[t][s - 1]) for t in traces]
        if true_theta is not None:
            row.append(float(true_theta))
        rows.append(row)
    return Chart(canvas.render(), columns, rows)


test_progress.__test__ = False

_PAR_COLUMN = {"a": 0, "b": 1, "c": 2, "d": 3}


def item_exposure(items, rates: Sequence[float], par: str | None = None, ptype: str = "bar") -> Chart:
    """Exposure rate of every item, optionally sorted by one item parameter.

    With ``par`` the items are ordered by that parameter; the line style then
    uses the parameter value as the horizontal axis, the bar style uses
    the rank. Without ``par`` items keep bank order.
    """
    if ptype not in ("bar", "line"):
        raise ValueError(f"ptype must be 'bar' or 'line', got {ptype!r}")
    if par is not None and par not in _PAR_COLUMN:
        raise ValueError(f"par must be one of a, b, c, d, got {par!r}")
    params = irt.as_params(items)
    rates = np.asarray(rates, dtype=float)
    if len(params) == 0:
        raise ValueError("nothing to plot: the bank is empty")
    if len(rates) != len(params):
        raise ValueError(f"{len(rates)} exposure rates for {len(params)} items")

    if par is None:
        order = np.arange(len(params))
        xs = order.astype(float)
        xlabel = "Item"
    else:
        order = np.argsort(params[:, _PAR_COLUMN[par]], kind="stable")
        xs = params[order, _PAR_COLUMN[par]] if ptype == "line" else np.arange(len(params), dtype=float)
        xlabel = par if ptype == "line" else f"Items sorted by {par}"
    ys = rates[order]

    title = "Item exposure rates"
    canvas = _Canvas(640, 400, title)
    canvas.text(320, 22, title, size=13, cls="title")
    if ptype == "bar":
        xlim = (-0.5, len(params) - 0.5)
    else:
        xlim = _range(xs, pad=0.02)
    panel = _Panel(70, 40, 520, 300, xlim, (0.0, max(1e-9, float(ys.max())) * 1.05))
    canvas.axes(panel, xlabel, "Exposure rate")
    if ptype == "line":
        canvas.polyline(panel, xs, ys, "exposure")
    else:
        w = panel.width / len(params)
        for x, y in zip(xs, ys):
            top = panel.py(y)
            canvas.add(
                f'<rect class="bar" data-series="exposure" x="{_f(panel.px(x) - w * 0.4)}" y="{_f(top)}" '
                f'width="{_f(w * 0.8)}" height="{_f(panel.y0 + panel.height - top)}" fill="{COLORS["exposure"]}"/>'
            )

    columns = ["item_index"] + ([par] if par else []) + ["x", "r"]
    rows = []
    for i, x, y in zip(order, xs, ys):
        row = [int(i)] + ([float(params[i, _PAR_COLUMN[par]])] if par else []) + [float(x), float(y)]
        rows.append(row)
    return Chart(canvas.render(), columns, rows)
