"""Result persistence: CSV tables, JSON summaries and plain SVG line plots."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = ["dump_json", "ensemble_csv", "svg_plot", "write_text"]

SUMMARY_SCHEMA = 1

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _clean(obj):
    """Make numpy scalars/arrays and non-finite floats JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def ensemble_csv(rows) -> str:
    """One row per drive setting: Delta and R_dd peak, FWHM and FWHM/peak (MHz)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["omega_plus_MHz", "omega_minus_MHz", "delta_peak_MHz", "delta_fwhm_MHz", "delta_ratio",
         "rdd_peak_MHz", "rdd_fwhm_MHz", "rdd_ratio"]
    )

    def f(x):
        return "" if x is None else repr(float(x))

    for r in rows:
        w.writerow(
            [f(r.omega_plus), f(r.omega_minus), f(r.delta.peak), f(r.delta.fwhm), f(r.delta.fwhm_over_peak),
             f(r.rdd.peak), f(r.rdd.fwhm), f(r.rdd.fwhm_over_peak)]
        )
    return buf.getvalue()


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(round(v, 12))
        v += step
    return out


def svg_plot(
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    width: int = 640,
    height: int = 400,
) -> str:
    """Line plot of one or more series against a shared x axis."""
    x = np.asarray(x, float)
    ys = {k: np.asarray(v, float) for k, v in series.items()}
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    allv = np.concatenate([v[np.isfinite(v)] for v in ys.values()]) if ys else np.zeros(1)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(allv.min()), float(allv.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{mt + ph}" x2="{sx(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{mt + ph + 18}" font-size="11" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{sy(t):.2f}" x2="{ml}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{sy(t) + 4:.2f}" font-size="11" text-anchor="end">{t:g}</text>')
    for i, (name, y) in enumerate(ys.items()):
        ok = np.isfinite(y)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[ok], y[ok]))
        c = _COLOURS[i % len(_COLOURS)]
        out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        out.append(f'<text x="{ml + pw - 5}" y="{mt + 15 + 14 * i}" font-size="11" text-anchor="end" fill="{c}">{_esc(name)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" font-size="12" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="15" y="{mt + ph / 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 15 {mt + ph / 2})">{_esc(ylabel)}</text>'
    )
    out.append(f'<text x="{ml + pw / 2}" y="22" font-size="14" text-anchor="middle">{_esc(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
