"""Rendering of attributions, curves, and bands to SVG 1.1 and CSV.

SVG is the only graphic format (deterministic, diffable, no raster
dependencies).  Documents are assembled through ElementTree, so every
emitted file is well-formed XML by construction.  Numeric labels follow
the 2-decimal percent convention; CSV cells carry 12 significant digits.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .game import PRC_SLICE, ROC_SLICE, PayoffTable
from .shapley import Attribution, CurveAttribution
from .uncertainty import BandedSeries, McAttribution

EFFICIENCY_TOL = 1e-9
GAP_TOL = 1e-9

# Categorical palette assigned by feature index (wraps after ten).
PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc949", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)
POSITIVE_COLOR = "#59a14f"
NEGATIVE_COLOR = "#e15759"
ANCHOR_COLOR = "#79706e"
REFERENCE_COLOR = "#555555"


def color_for(index: int) -> str:
    return PALETTE[index % len(PALETTE)]


def percent(value: float) -> str:
    return f"{100.0 * value:.2f}%"


# ----------------------------------------------------------------------
# CSV
# ----------------------------------------------------------------------

def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(format_cell(cell) for cell in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def attribution_rows(attr: Attribution):
    header = ["feature", "phi", "percent"]
    rows = [
        (name, float(attr.values[i]), f"{100.0 * attr.values[i]:.2f}")
        for i, name in enumerate(attr.feature_names)
    ]
    return header, rows


def curve_attribution_rows(ca: CurveAttribution):
    x_name = "fpr" if ca.kind == ROC_SLICE else "recall"
    header = [x_name, *ca.feature_names, "reference", "baseline"]
    rows = []
    for j, q in enumerate(ca.abscissae):
        rows.append(
            (float(q), *(float(v) for v in ca.values[:, j]),
             float(ca.reference[j]), float(ca.baselines[j]))
        )
    return header, rows


def banded_rows(b: BandedSeries, x_name: str = "fpr"):
    header = [x_name, "mean", "std"]
    rows = [
        (float(x), float(m), float(s))
        for x, m, s in zip(b.abscissae, b.mean, b.std)
    ]
    return header, rows


def mc_attribution_rows(mca: McAttribution):
    header = ["feature", "mean_phi", "std_phi"]
    rows = [
        (name, float(mca.mean[i]), float(mca.std[i]))
        for i, name in enumerate(mca.feature_names)
    ]
    return header, rows


def payoff_rows(table: PayoffTable):
    header = ["coalition_mask", "members", "payoff"]
    return header, table.rows()


def curve_rows(x: np.ndarray, y: np.ndarray, x_name: str, y_name: str):
    header = [x_name, y_name]
    rows = [(float(a), float(b)) for a, b in zip(x, y)]
    return header, rows


# ----------------------------------------------------------------------
# Plot documents
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray
    color: str
    dash: str | None = None


@dataclass(frozen=True, eq=False)
class Band:
    x: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    color: str
    opacity: float = 0.25


@dataclass(frozen=True, eq=False)
class PlotDocument:
    """Line/band chart over a numeric x axis.

    Series values may contain NaN to mark gaps; they are never emitted as
    coordinates.  Infinite values are rejected outright.
    """

    title: str
    x_label: str
    y_label: str
    series: tuple[Series, ...]
    bands: tuple[Band, ...] = ()
    width: int = 640
    height: int = 420

    def __post_init__(self):
        for s in self.series:
            if np.isinf(s.x).any() or np.isinf(s.y).any() or np.isnan(s.x).any():
                raise DataError(f"series {s.name!r} has non-plottable coordinates")
        for b in self.bands:
            for arr in (b.x, b.lo, b.hi):
                if not np.isfinite(arr).all():
                    raise DataError("band coordinates must be finite")

    def data_ranges(self):
        xs, ys = [], []
        for s in self.series:
            xs.append(s.x)
            finite = s.y[np.isfinite(s.y)]
            if finite.size:
                ys.append(finite)
        for b in self.bands:
            xs.append(b.x)
            ys.extend([b.lo, b.hi])
        x_all = np.concatenate(xs) if xs else np.array([0.0, 1.0])
        y_all = np.concatenate(ys) if ys else np.array([0.0, 1.0])
        return (
            _padded(float(x_all.min()), float(x_all.max())),
            _padded(float(y_all.min()), float(y_all.max())),
        )

    def to_svg(self) -> str:
        return _render_plot(self)


@dataclass(frozen=True)
class WhiskerBar:
    name: str
    value: float
    err: float
    color: str


@dataclass(frozen=True, eq=False)
class WhiskerChart:
    """Categorical bar chart with ±err whisker lines (Monte-Carlo bars)."""

    title: str
    y_label: str
    bars: tuple[WhiskerBar, ...]
    width: int = 640
    height: int = 420

    def __post_init__(self):
        for b in self.bars:
            if not (np.isfinite(b.value) and np.isfinite(b.err) and b.err >= 0):
                raise DataError(f"bar {b.name!r} has invalid value/err")

    def to_svg(self) -> str:
        return _render_whiskers(self)


@dataclass(frozen=True)
class WaterfallSpec:
    """Baseline → per-feature contributions → total, ordered by |φ| desc."""

    baseline_label: str
    baseline: float
    bars: tuple[tuple[str, float], ...]
    total_label: str
    total: float

    def __post_init__(self):
        drift = abs(self.baseline + sum(v for _, v in self.bars) - self.total)
        if drift > EFFICIENCY_TOL:
            raise DataError("waterfall does not add up: baseline + bars != total")
        magnitudes = [abs(v) for _, v in self.bars]
        if any(a < b for a, b in zip(magnitudes, magnitudes[1:])):
            raise DataError("waterfall bars must be ordered by decreasing |φ|")


def waterfall(attr: Attribution) -> WaterfallSpec:
    """Waterfall layout of an attribution, bars sorted by decreasing |φ|."""
    order = sorted(
        range(attr.n), key=lambda i: -abs(float(attr.values[i]))
    )
    bars = tuple(
        (attr.feature_names[i], float(attr.values[i])) for i in order
    )
    return WaterfallSpec(
        "random baseline", attr.baseline, bars, attr.target.describe(), attr.total
    )


def contribution_curves(ca: CurveAttribution) -> PlotDocument:
    """One series per feature plus the combined (reference − baseline) envelope."""
    x_label = "false positive rate" if ca.kind == ROC_SLICE else "recall"
    series = [
        Series(name, ca.abscissae, ca.values[i], color_for(i))
        for i, name in enumerate(ca.feature_names)
    ]
    series.append(
        Series(
            "combined", ca.abscissae, ca.reference - ca.baselines,
            REFERENCE_COLOR, dash="6 3",
        )
    )
    return PlotDocument(
        "Per-feature contribution curves", x_label, "Shapley contribution",
        tuple(series),
    )


def relative_contributions(ca: CurveAttribution) -> PlotDocument:
    """φ_i / Σφ_j per grid point; points with |Σφ| < 1e-9 become gaps."""
    x_label = "false positive rate" if ca.kind == ROC_SLICE else "recall"
    denom = ca.values.sum(axis=0)
    safe = np.where(np.abs(denom) < GAP_TOL, np.nan, denom)
    series = tuple(
        Series(name, ca.abscissae, ca.values[i] / safe, color_for(i))
        for i, name in enumerate(ca.feature_names)
    )
    return PlotDocument(
        "Relative contributions", x_label, "share of combined contribution", series
    )


def banded_plot(
    b: BandedSeries,
    title: str = "Monte-Carlo band",
    x_label: str = "false positive rate",
    y_label: str = "true positive rate",
    clip: tuple[float, float] | None = (0.0, 1.0),
    color: str = PALETTE[0],
) -> PlotDocument:
    """Mean line with a mean±std band, clipped to the metric's valid range."""
    lo = b.mean - b.std
    hi = b.mean + b.std
    if clip is not None:
        lo = np.clip(lo, clip[0], clip[1])
        hi = np.clip(hi, clip[0], clip[1])
    return PlotDocument(
        title, x_label, y_label,
        (Series("mean", b.abscissae, b.mean, color),),
        (Band(b.abscissae, lo, hi, color),),
    )


def attribution_whiskers(
    mca: McAttribution, title: str = "Monte-Carlo attribution"
) -> WhiskerChart:
    bars = tuple(
        WhiskerBar(name, float(mca.mean[i]), float(mca.std[i]), color_for(i))
        for i, name in enumerate(mca.feature_names)
    )
    return WhiskerChart(title, "Shapley contribution", bars)


# ----------------------------------------------------------------------
# SVG assembly
# ----------------------------------------------------------------------

MARGIN = {"left": 64, "right": 24, "top": 36, "bottom": 46}
LEGEND_LINE = 16
FONT = "ui-sans-serif, sans-serif"


def _padded(lo: float, hi: float, frac: float = 0.05):
    if hi <= lo:
        pad = max(abs(lo), 1.0) * frac
        return lo - pad, hi + pad
    pad = (hi - lo) * frac
    return lo - pad, hi + pad


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.3g}"


def _svg_root(width: int, height: int) -> ET.Element:
    return ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "version": "1.1",
            "width": str(width),
            "height": str(height),
            "viewBox": f"0 0 {width} {height}",
        },
    )


def _text(parent, x, y, content, size=11, anchor="middle", **extra):
    attrs = {
        "x": _fmt(x),
        "y": _fmt(y),
        "font-family": FONT,
        "font-size": str(size),
        "text-anchor": anchor,
        "fill": "#222222",
    }
    attrs.update(extra)
    el = ET.SubElement(parent, "text", attrs)
    el.text = content
    return el


def _line(parent, x1, y1, x2, y2, stroke="#222222", width=1.0, dash=None):
    attrs = {
        "x1": _fmt(x1), "y1": _fmt(y1), "x2": _fmt(x2), "y2": _fmt(y2),
        "stroke": stroke, "stroke-width": str(width),
    }
    if dash:
        attrs["stroke-dasharray"] = dash
    ET.SubElement(parent, "line", attrs)


class _Frame:
    """Maps data coordinates into the plot rectangle of an SVG canvas."""

    def __init__(self, width, height, x_range, y_range):
        self.px0 = MARGIN["left"]
        self.px1 = width - MARGIN["right"]
        self.py0 = MARGIN["top"]
        self.py1 = height - MARGIN["bottom"]
        self.x_range = x_range
        self.y_range = y_range

    def x(self, v: float) -> float:
        lo, hi = self.x_range
        return self.px0 + (v - lo) / (hi - lo) * (self.px1 - self.px0)

    def y(self, v: float) -> float:
        lo, hi = self.y_range
        return self.py1 - (v - lo) / (hi - lo) * (self.py1 - self.py0)


def _axes(root, frame, title, x_label, y_label):
    _line(root, frame.px0, frame.py1, frame.px1, frame.py1)
    _line(root, frame.px0, frame.py0, frame.px0, frame.py1)
    for t in np.linspace(*frame.x_range, 5):
        px = frame.x(t)
        _line(root, px, frame.py1, px, frame.py1 + 4)
        _text(root, px, frame.py1 + 16, _tick_label(t), size=10)
    for t in np.linspace(*frame.y_range, 5):
        py = frame.y(t)
        _line(root, frame.px0 - 4, py, frame.px0, py)
        _text(root, frame.px0 - 8, py + 3, _tick_label(t), size=10, anchor="end")
    _text(root, (frame.px0 + frame.px1) / 2, frame.py1 + 34, x_label, size=12)
    ylab = _text(root, 16, (frame.py0 + frame.py1) / 2, y_label, size=12)
    ylab.set(
        "transform", f"rotate(-90 {_fmt(16)} {_fmt((frame.py0 + frame.py1) / 2)})"
    )
    _text(root, (frame.px0 + frame.px1) / 2, MARGIN["top"] - 14, title, size=13,
          **{"font-weight": "bold"})


def _polyline_runs(x: np.ndarray, y: np.ndarray):
    """Split a series at NaNs into runs of finite points."""
    run_x, run_y = [], []
    for xi, yi in zip(x, y):
        if np.isfinite(yi):
            run_x.append(xi)
            run_y.append(yi)
        elif run_x:
            yield run_x, run_y
            run_x, run_y = [], []
    if run_x:
        yield run_x, run_y


def _render_plot(doc: PlotDocument) -> str:
    x_range, y_range = doc.data_ranges()
    frame = _Frame(doc.width, doc.height, x_range, y_range)
    root = _svg_root(doc.width, doc.height)
    for band in doc.bands:
        pts = [(frame.x(x), frame.y(h)) for x, h in zip(band.x, band.hi)]
        pts += [(frame.x(x), frame.y(l)) for x, l in zip(band.x[::-1], band.lo[::-1])]
        ET.SubElement(root, "polygon", {
            "points": " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pts),
            "fill": band.color,
            "fill-opacity": str(band.opacity),
            "stroke": "none",
        })
    for s in doc.series:
        for run_x, run_y in _polyline_runs(s.x, s.y):
            attrs = {
                "points": " ".join(
                    f"{_fmt(frame.x(xi))},{_fmt(frame.y(yi))}"
                    for xi, yi in zip(run_x, run_y)
                ),
                "fill": "none",
                "stroke": s.color,
                "stroke-width": "1.6",
            }
            if s.dash:
                attrs["stroke-dasharray"] = s.dash
            if len(run_x) == 1:
                # A lone point renders invisibly as a polyline; use a dot.
                ET.SubElement(root, "circle", {
                    "cx": _fmt(frame.x(run_x[0])), "cy": _fmt(frame.y(run_y[0])),
                    "r": "2.5", "fill": s.color,
                })
            else:
                ET.SubElement(root, "polyline", attrs)
    _axes(root, frame, doc.title, doc.x_label, doc.y_label)
    for k, s in enumerate(doc.series):
        ly = MARGIN["top"] + 6 + k * LEGEND_LINE
        lx = frame.px1 - 128
        _line(root, lx, ly, lx + 18, ly, stroke=s.color, width=2.0, dash=s.dash)
        _text(root, lx + 24, ly + 4, s.name, size=10, anchor="start")
    return ET.tostring(root, encoding="unicode")


def _render_whiskers(chart: WhiskerChart) -> str:
    values = [b.value for b in chart.bars]
    spans = [b.value - b.err for b in chart.bars] + [b.value + b.err for b in chart.bars]
    lo, hi = _padded(min(0.0, *spans), max(0.0, *spans))
    frame = _Frame(chart.width, chart.height, (0.0, 1.0), (lo, hi))
    root = _svg_root(chart.width, chart.height)
    k = len(chart.bars)
    slot = (frame.px1 - frame.px0) / max(k, 1)
    bar_w = slot * 0.55
    y_zero = frame.y(0.0)
    for i, bar in enumerate(chart.bars):
        cx = frame.px0 + (i + 0.5) * slot
        top = frame.y(max(bar.value, 0.0))
        bottom = frame.y(min(bar.value, 0.0))
        ET.SubElement(root, "rect", {
            "x": _fmt(cx - bar_w / 2), "y": _fmt(top),
            "width": _fmt(bar_w), "height": _fmt(max(bottom - top, 0.0)),
            "fill": bar.color, "fill-opacity": "0.85",
        })
        _line(root, cx, frame.y(bar.value - bar.err), cx,
              frame.y(bar.value + bar.err), stroke="#333333", width=1.4)
        cap = bar_w * 0.25
        for v in (bar.value - bar.err, bar.value + bar.err):
            _line(root, cx - cap, frame.y(v), cx + cap, frame.y(v),
                  stroke="#333333", width=1.4)
        _text(root, cx, frame.py1 + 16, bar.name, size=10)
        _text(root, cx, frame.y(bar.value + bar.err) - 6, percent(bar.value), size=10)
    _line(root, frame.px0, y_zero, frame.px1, y_zero, stroke="#999999", width=0.8)
    _line(root, frame.px0, frame.py0, frame.px0, frame.py1)
    for t in np.linspace(lo, hi, 5):
        py = frame.y(t)
        _line(root, frame.px0 - 4, py, frame.px0, py)
        _text(root, frame.px0 - 8, py + 3, _tick_label(t), size=10, anchor="end")
    ylab = _text(root, 16, (frame.py0 + frame.py1) / 2, chart.y_label, size=12)
    ylab.set(
        "transform",
        f"rotate(-90 {_fmt(16)} {_fmt((frame.py0 + frame.py1) / 2)})",
    )
    _text(root, (frame.px0 + frame.px1) / 2, MARGIN["top"] - 14, chart.title,
          size=13, **{"font-weight": "bold"})
    return ET.tostring(root, encoding="unicode")


def render_waterfall(wf: WaterfallSpec, width: int = 640, height: int = 420) -> str:
    """Waterfall chart: anchored baseline/total columns, floating φ bars."""
    # Re-assert the additivity invariant at render time.
    drift = abs(wf.baseline + sum(v for _, v in wf.bars) - wf.total)
    if drift > EFFICIENCY_TOL:
        raise DataError("waterfall does not add up: baseline + bars != total")
    levels = [wf.baseline]
    for _, v in wf.bars:
        levels.append(levels[-1] + v)
    lo = min(0.0, min(levels))
    hi = max(0.0, max(levels))
    lo, hi = _padded(lo, hi, 0.12)
    frame = _Frame(width, height, (0.0, 1.0), (lo, hi))
    root = _svg_root(width, height)
    columns = [(wf.baseline_label, 0.0, wf.baseline, ANCHOR_COLOR, wf.baseline)]
    running = wf.baseline
    for name, v in wf.bars:
        color = POSITIVE_COLOR if v >= 0 else NEGATIVE_COLOR
        columns.append((name, running, running + v, color, v))
        running += v
    columns.append((wf.total_label, 0.0, wf.total, ANCHOR_COLOR, wf.total))
    slot = (frame.px1 - frame.px0) / len(columns)
    bar_w = slot * 0.6
    for i, (name, y0, y1, color, value) in enumerate(columns):
        cx = frame.px0 + (i + 0.5) * slot
        top = frame.y(max(y0, y1))
        bottom = frame.y(min(y0, y1))
        ET.SubElement(root, "rect", {
            "x": _fmt(cx - bar_w / 2), "y": _fmt(top),
            "width": _fmt(bar_w), "height": _fmt(max(bottom - top, 0.5)),
            "fill": color, "fill-opacity": "0.9",
        })
        anchored = i == 0 or i == len(columns) - 1
        label = percent(value) if anchored else f"{100.0 * value:+.2f}%"
        _text(root, cx, top - 6, label, size=10)
        _text(root, cx, frame.py1 + 16, name, size=10)
        if i + 1 < len(columns):
            # Connector at the running level across to the next column.
            _line(root, cx + bar_w / 2, frame.y(y1),
                  cx + slot - bar_w / 2, frame.y(y1),
                  stroke="#aaaaaa", width=0.8, dash="3 2")
    _line(root, frame.px0, frame.y(0.0), frame.px1, frame.y(0.0),
          stroke="#999999", width=0.8)
    _line(root, frame.px0, frame.py0, frame.px0, frame.py1)
    for t in np.linspace(lo, hi, 5):
        py = frame.y(t)
        _line(root, frame.px0 - 4, py, frame.px0, py)
        _text(root, frame.px0 - 8, py + 3, _tick_label(t), size=10, anchor="end")
    _text(root, (frame.px0 + frame.px1) / 2, MARGIN["top"] - 14,
          f"{wf.total_label}: {percent(wf.total)}", size=13,
          **{"font-weight": "bold"})
    return ET.tostring(root, encoding="unicode")


def write_svg(path: str | Path, svg: str) -> None:
    Path(path).write_text(svg + "\n")
