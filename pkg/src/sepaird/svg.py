"""Dependency-free SVG charts for aggregation tables.

All coordinates are emitted with fixed decimal formatting and nothing
time- or environment-dependent is written, so identical input always
yields identical bytes.
"""

from __future__ import annotations

from typing import Sequence

from .montecarlo import SCENARIO_FIELDS, BoxStats, DatasetError, QuantileRow

_WIDTH = 860
_HEIGHT = 520
_MARGIN_LEFT = 72
_MARGIN_RIGHT = 260
_MARGIN_TOP = 48
_MARGIN_BOTTOM = 56

_PALETTE = (
    "#1f6fb4",
    "#d1495b",
    "#2e8b57",
    "#b8860b",
    "#6a4fa3",
    "#0f8b8d",
    "#c2571a",
    "#5b5b5b",
)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _fmt_tick(x: float) -> str:
    return f"{x:.6g}"


def _scenario_labels(scenarios: Sequence) -> list:
    """Compact legend labels from the fields that actually vary."""
    varying = [
        name
        for name in SCENARIO_FIELDS
        if len({getattr(s, name) for s in scenarios}) > 1
    ]
    if not varying:
        return ["all scenarios"] * len(scenarios)
    labels = []
    for s in scenarios:
        parts = []
        for name in varying:
            value = getattr(s, name)
            if isinstance(value, bool):
                parts.append(f"{name}={'on' if value else 'off'}")
            else:
                parts.append(f"{name}={value:g}")
        labels.append(" ".join(parts))
    return labels


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _Canvas:
    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        if x_hi <= x_lo:
            x_hi = x_lo + 1.0
        if y_hi <= y_lo:
            pad = abs(y_lo) * 0.1 + 1.0
            y_lo, y_hi = y_lo - pad, y_lo + pad
        self.x_lo, self.x_hi = x_lo, x_hi
        self.y_lo, self.y_hi = y_lo, y_hi
        self.plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
        self.plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def x(self, v: float) -> float:
        return _MARGIN_LEFT + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.plot_w

    def y(self, v: float) -> float:
        return _MARGIN_TOP + (self.y_hi - v) / (self.y_hi - self.y_lo) * self.plot_h


def _ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _frame(parts, canvas, title, x_label, y_label, x_tick_pairs, y_values):
    parts.append(
        f'<rect x="{_fmt(_MARGIN_LEFT)}" y="{_fmt(_MARGIN_TOP)}" '
        f'width="{_fmt(canvas.plot_w)}" height="{_fmt(canvas.plot_h)}" '
        'fill="none" stroke="#222222" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{_fmt(_MARGIN_LEFT + canvas.plot_w / 2)}" y="{_fmt(_MARGIN_TOP - 16)}" '
        f'text-anchor="middle" font-size="15">{_escape(title)}</text>'
    )
    bottom = _MARGIN_TOP + canvas.plot_h
    for value, label in x_tick_pairs:
        px = canvas.x(value)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(bottom)}" x2="{_fmt(px)}" '
            f'y2="{_fmt(bottom + 5)}" stroke="#222222" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{_fmt(bottom + 18)}" text-anchor="middle" '
            f'font-size="11">{_escape(label)}</text>'
        )
    for value in y_values:
        py = canvas.y(value)
        parts.append(
            f'<line x1="{_fmt(_MARGIN_LEFT - 5)}" y1="{_fmt(py)}" '
            f'x2="{_fmt(_MARGIN_LEFT)}" y2="{_fmt(py)}" stroke="#222222" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(_MARGIN_LEFT - 8)}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-size="11">{_escape(_fmt_tick(value))}</text>'
        )
        parts.append(
            f'<line x1="{_fmt(_MARGIN_LEFT)}" y1="{_fmt(py)}" '
            f'x2="{_fmt(_MARGIN_LEFT + canvas.plot_w)}" y2="{_fmt(py)}" '
            'stroke="#dddddd" stroke-width="0.5"/>'
        )
    parts.append(
        f'<text x="{_fmt(_MARGIN_LEFT + canvas.plot_w / 2)}" y="{_fmt(bottom + 40)}" '
        f'text-anchor="middle" font-size="13">{_escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="18" y="{_fmt(_MARGIN_TOP + canvas.plot_h / 2)}" text-anchor="middle" '
        f'font-size="13" transform="rotate(-90 18 {_fmt(_MARGIN_TOP + canvas.plot_h / 2)})">'
        f"{_escape(y_label)}</text>"
    )


def _legend(parts, scenarios, labels):
    x0 = _WIDTH - _MARGIN_RIGHT + 18
    for i, label in enumerate(labels):
        y0 = _MARGIN_TOP + 10 + i * 18
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0 - 9)}" width="12" height="12" '
            f'fill="{color}"/>'
        )
        parts.append(
            f'<text x="{_fmt(x0 + 18)}" y="{_fmt(y0 + 1)}" font-size="11">'
            f"{_escape(label)}</text>"
        )
    _ = scenarios


def _document(parts_body) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif">\n'
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(parts_body) + "\n</svg>\n"


def render_quantile_lines(rows: Sequence[QuantileRow], metric: str) -> str:
    """Layered quantile curves: one path per (scenario, quantile).

    The median is drawn solid and heavier; other quantiles dashed.
    """
    if not rows:
        raise DatasetError("no data")
    scenarios = []
    for row in rows:
        if row.scenario not in scenarios:
            scenarios.append(row.scenario)
    steps = [row.step for row in rows]
    values = [row.value for row in rows]
    canvas = _Canvas(min(steps), max(steps), min(values), max(values))
    parts = []
    x_ticks = [(t, _fmt_tick(t)) for t in _ticks(canvas.x_lo, canvas.x_hi)]
    _frame(parts, canvas, metric, "step", metric, x_ticks, _ticks(canvas.y_lo, canvas.y_hi))
    series: dict = {}
    for row in rows:
        series.setdefault((scenarios.index(row.scenario), row.quantile), []).append(
            (row.step, row.value)
        )
    for (scenario_idx, quantile) in sorted(series):
        points = sorted(series[(scenario_idx, quantile)])
        color = _PALETTE[scenario_idx % len(_PALETTE)]
        coords = " ".join(f"{_fmt(canvas.x(s))},{_fmt(canvas.y(v))}" for s, v in points)
        if abs(quantile - 0.5) < 1e-9:
            style = f'stroke="{color}" stroke-width="2" fill="none"'
        else:
            style = f'stroke="{color}" stroke-width="1" fill="none" stroke-dasharray="4 3" opacity="0.7"'
        parts.append(f'<polyline points="{coords}" {style}/>')
    _legend(parts, scenarios, _scenario_labels(scenarios))
    return _document(parts)


def render_notched_boxes(rows: Sequence[BoxStats], metric: str, step=None) -> str:
    """One notched box per scenario with whiskers and outlier dots."""
    if not rows:
        raise DatasetError("no data")
    scenarios = [row.scenario for row in rows]
    labels = _scenario_labels(scenarios)
    lows = [min((row.whisker_low, *row.outliers)) for row in rows]
    highs = [max((row.whisker_high, *row.outliers)) for row in rows]
    canvas = _Canvas(0.0, float(len(rows)), min(lows), max(highs))
    title = metric if step is None else f"{metric} at step {step}"
    parts = []
    x_ticks = [(i + 0.5, f"S{i + 1}") for i in range(len(rows))]
    _frame(parts, canvas, title, "scenario", metric, x_ticks, _ticks(canvas.y_lo, canvas.y_hi))
    half = 0.28
    notch_half = 0.14
    for i, row in enumerate(rows):
        color = _PALETTE[i % len(_PALETTE)]
        cx = canvas.x(i + 0.5)
        x_l = canvas.x(i + 0.5 - half)
        x_r = canvas.x(i + 0.5 + half)
        x_nl = canvas.x(i + 0.5 - notch_half)
        x_nr = canvas.x(i + 0.5 + notch_half)
        y_q1 = canvas.y(row.q1)
        y_q3 = canvas.y(row.q3)
        y_med = canvas.y(row.median)
        y_nlo = canvas.y(max(row.notch_low, row.q1))
        y_nhi = canvas.y(min(row.notch_high, row.q3))
        y_wlo = canvas.y(row.whisker_low)
        y_whi = canvas.y(row.whisker_high)
        points = [
            (x_l, y_q1),
            (x_r, y_q1),
            (x_r, y_nlo),
            (x_nr, y_med),
            (x_r, y_nhi),
            (x_r, y_q3),
            (x_l, y_q3),
            (x_l, y_nhi),
            (x_nl, y_med),
            (x_l, y_nlo),
        ]
        path = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in points)
        parts.append(
            f'<polygon points="{path}" fill="{color}" fill-opacity="0.35" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<line x1="{_fmt(x_nl)}" y1="{_fmt(y_med)}" x2="{_fmt(x_nr)}" '
            f'y2="{_fmt(y_med)}" stroke="{color}" stroke-width="2"/>'
        )
        for y_box, y_whisker in ((y_q3, y_whi), (y_q1, y_wlo)):
            parts.append(
                f'<line x1="{_fmt(cx)}" y1="{_fmt(y_box)}" x2="{_fmt(cx)}" '
                f'y2="{_fmt(y_whisker)}" stroke="{color}" stroke-width="1"/>'
            )
            parts.append(
                f'<line x1="{_fmt(cx - 12)}" y1="{_fmt(y_whisker)}" '
                f'x2="{_fmt(cx + 12)}" y2="{_fmt(y_whisker)}" '
                f'stroke="{color}" stroke-width="1"/>'
            )
        for value in row.outliers:
            parts.append(
                f'<circle cx="{_fmt(cx)}" cy="{_fmt(canvas.y(value))}" r="2.5" '
                f'fill="none" stroke="{color}" stroke-width="1"/>'
            )
    _legend(parts, scenarios, [f"S{i + 1}: {label}" for i, label in enumerate(labels)])
    return _document(parts)
