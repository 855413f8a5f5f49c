"""Trace CSV files and log-gap SVG plots."""

import csv
import math
import os
from xml.sax.saxutils import escape

from .errors import ArgumentError

CSV_HEADER = ("k", "f_value", "gap", "grad_norm_y", "restarted")
GAP_FLOOR = 1e-16
PALETTE = ("#d62728", "#1f77b4", "#e377c2", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _num(v):
    return format(v, ".17g")


def write_csv(trace, path):
    """One row per iteration; gaps are left empty when ``f*`` is unknown."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in trace.records:
                w.writerow((r.k, _num(r.f_value), "" if r.gap is None else _num(r.gap),
                            _num(r.grad_norm_y), int(r.restarted)))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write trace CSV: {exc.strerror}", path) from exc


def read_csv(path):
    """Inverse of ``write_csv``: a list of dicts with parsed values."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "k": int(row["k"]),
                "f_value": float(row["f_value"]),
                "gap": None if row["gap"] == "" else float(row["gap"]),
                "grad_norm_y": float(row["grad_norm_y"]),
                "restarted": row["restarted"] == "1",
            })
    return rows


def render_svg(traces, path, title=None, width=800, height=480):
    """Plot ``log10(gap)`` against iteration, one polyline per named trace.

    ``traces`` is a list of ``(label, RunTrace)`` pairs. Gaps below
    ``1e-16`` (including zero and tiny negative values) sit on the floor.
    """
    if not traces:
        raise ArgumentError("need at least one trace to plot")
    series = []
    for label, tr in traces:
        pts = [(r.k, r.gap) for r in tr.records if r.gap is not None]
        if pts:
            series.append((label, pts))
    if not series:
        raise ArgumentError("no trace carries gap values")

    left, right, top, bottom = 70, 170, 40, 50
    pw, ph = width - left - right, height - top - bottom
    k_max = max(max(k for k, _ in pts) for _, pts in series) or 1
    logs = [math.log10(max(g, GAP_FLOOR)) for _, pts in series for _, g in pts]
    y_lo, y_hi = math.floor(min(logs)), math.ceil(max(logs))
    if y_hi == y_lo:
        y_hi += 1

    def sx(k):
        return left + pw * k / k_max

    def sy(v):
        return top + ph * (y_hi - v) / (y_hi - y_lo)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{left + pw / 2}" y="{top - 15}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{escape(title)}</text>')
    step = max(1, (y_hi - y_lo) // 8)
    for v in range(y_lo, y_hi + 1, step):
        y = sy(v)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">1e{v}</text>')
    for i in range(6):
        k = k_max * i / 5
        x = sx(k)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{int(round(k))}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">iteration k</text>')
    out.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 15 {top + ph / 2})">f(x_k) - f*</text>')

    for i, (label, pts) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(k):.2f},{sy(math.log10(max(g, GAP_FLOOR))):.2f}" for k, g in pts)
        dash = ' stroke-dasharray="6,4"' if i % 3 == 1 else (' stroke-dasharray="2,3"' if i % 3 == 2 else "")
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
                   f'points="{coords}"/>')
        ly = top + 20 + 20 * i
        out.append(f'<g class="legend"><line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 45}" '
                   f'y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>'
                   f'<text x="{left + pw + 50}" y="{ly + 4}" font-family="sans-serif" '
                   f'font-size="12">{escape(label)}</text></g>')
    out.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write SVG: {exc.strerror}", path) from exc


def ensure_dir(path):
    if path:
        os.makedirs(path, exist_ok=True)
