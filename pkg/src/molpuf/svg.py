"""Minimal self-contained SVG plots: time traces and histograms."""

from __future__ import annotations

from dataclasses import dataclass
from html import escape
from typing import Sequence

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class Frame:
    """Maps data coordinates into a pixel rectangle."""
    x: float
    y: float
    w: float
    h: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]

    def px(self, xs):
        x0, x1 = self.xlim
        span = (x1 - x0) or 1.0
        return self.x + (np.asarray(xs, dtype=float) - x0) / span * self.w

    def py(self, ys):
        y0, y1 = self.ylim
        span = (y1 - y0) or 1.0
        return self.y + self.h - (np.asarray(ys, dtype=float) - y0) / span * self.h


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _polyline(frame: Frame, xs, ys, color: str, width: float = 1.5, dash: str = "") -> str:
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(frame.px(xs), frame.py(ys)))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{extra} '
            f'points="{pts}"/>')


def _axes(frame: Frame, xlabel: str = "", ylabel: str = "", ticks: int = 5, font: int = 11) -> list[str]:
    out = [f'<rect x="{frame.x}" y="{frame.y}" width="{frame.w}" height="{frame.h}" '
           f'fill="none" stroke="#333"/>']
    for v in np.linspace(*frame.xlim, ticks):
        px = float(frame.px(v))
        out.append(f'<line x1="{px:.2f}" y1="{frame.y + frame.h}" x2="{px:.2f}" '
                   f'y2="{frame.y + frame.h + 4}" stroke="#333"/>')
        out.append(f'<text x="{px:.2f}" y="{frame.y + frame.h + 16}" font-size="{font}" '
                   f'text-anchor="middle">{_fmt(v)}</text>')
    for v in np.linspace(*frame.ylim, ticks):
        py = float(frame.py(v))
        out.append(f'<line x1="{frame.x - 4}" y1="{py:.2f}" x2="{frame.x}" y2="{py:.2f}" stroke="#333"/>')
        out.append(f'<text x="{frame.x - 6}" y="{py + 4:.2f}" font-size="{font}" '
                   f'text-anchor="end">{_fmt(v)}</text>')
    if xlabel:
        out.append(f'<text x="{frame.x + frame.w / 2}" y="{frame.y + frame.h + 34}" '
                   f'font-size="{font + 1}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        cx, cy = frame.x - 46, frame.y + frame.h / 2
        out.append(f'<text x="{cx}" y="{cy}" font-size="{font + 1}" text-anchor="middle" '
                   f'transform="rotate(-90 {cx} {cy})">{escape(ylabel)}</text>')
    return out


def _document(body: list[str], width: int, height: int) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n' + "\n".join(body) + "\n</svg>\n")


def trace_plot(times, series: Sequence[tuple[str, np.ndarray]], threshold: float | None = None,
               inset: tuple[float, float] | None = None, title: str = "",
               note: str = "", width: int = 720, height: int = 440) -> str:
    """Concentration traces with an optional threshold line and zoomed inset."""
    t = np.asarray(times, dtype=float)
    ymax = max(float(np.max(y)) for _, y in series) if series else 1.0
    main = Frame(70, 40, width - 100, height - 100, (float(t[0]), float(t[-1])), (0.0, max(ymax, 1e-12) * 1.05))
    body = [f'<text x="{width / 2}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>']
    body += _axes(main, "time (s)", "concentration (nM)")
    for i, (label, y) in enumerate(series):
        body.append(_polyline(main, t, y, COLORS[i % len(COLORS)]))
        body.append(f'<text x="{main.x + 10}" y="{main.y + 16 + 15 * i}" font-size="12" '
                    f'fill="{COLORS[i % len(COLORS)]}">{escape(label)}</text>')
    if threshold is not None:
        body.append(_polyline(main, main.xlim, [threshold, threshold], "#777", 1, "5,4"))
    if note:
        body.append(f'<text x="{main.x + main.w - 10}" y="{main.y + main.h - 12}" font-size="14" '
                    f'text-anchor="end" font-weight="bold">{escape(note)}</text>')
    if inset is not None and series:
        lo, hi = inset
        mask = (t >= lo) & (t <= hi)
        if mask.sum() >= 2:
            ys = np.concatenate([y[mask] for _, y in series])
            if threshold is not None:
                ys = np.append(ys, threshold)
            pad = (ys.max() - ys.min()) * 0.1 or 1.0
            box = Frame(main.x + main.w * 0.55, main.y + main.h * 0.35, main.w * 0.4, main.h * 0.45,
                        (lo, hi), (float(ys.min() - pad), float(ys.max() + pad)))
            body.append(f'<rect x="{box.x}" y="{box.y}" width="{box.w}" height="{box.h}" fill="white"/>')
            body += _axes(box, ticks=3, font=9)
            for i, (_, y) in enumerate(series):
                body.append(_polyline(box, t[mask], y[mask], COLORS[i % len(COLORS)], 1.2))
            if threshold is not None:
                body.append(_polyline(box, box.xlim, [threshold, threshold], "#777", 1, "5,4"))
    return _document(body, width, height)


def histogram_plot(groups: Sequence[tuple[str, np.ndarray]], bins: int = 20,
                   fits: Sequence[tuple[float, float]] = (), title: str = "",
                   xlabel: str = "Hamming distance (fraction of L)",
                   width: int = 720, height: int = 440) -> str:
    """Density histograms of one or more sample groups, with optional normal fits."""
    allv = np.concatenate([np.asarray(v, dtype=float) for _, v in groups])
    lo, hi = float(allv.min()), float(allv.max())
    if hi == lo:
        lo, hi = lo - 0.05, hi + 0.05
    edges = np.linspace(lo, hi, bins + 1)
    dens = [np.histogram(np.asarray(v, dtype=float), edges, density=True)[0] for _, v in groups]
    grid = np.linspace(lo, hi, 200)
    curves = []
    for mean, std in fits:
        if std > 0:
            curves.append(np.exp(-0.5 * ((grid - mean) / std) ** 2) / (std * np.sqrt(2 * np.pi)))
    ymax = max([float(d.max()) for d in dens] + [float(c.max()) for c in curves] + [1e-12])
    fr = Frame(70, 40, width - 100, height - 100, (lo, hi), (0.0, ymax * 1.05))
    body = [f'<text x="{width / 2}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>']
    body += _axes(fr, xlabel, "density")
    for g, ((label, _), d) in enumerate(zip(groups, dens)):
        color = COLORS[g % len(COLORS)]
        for k, v in enumerate(d):
            x0, x1 = float(fr.px(edges[k])), float(fr.px(edges[k + 1]))
            y = float(fr.py(v))
            body.append(f'<rect x="{x0:.2f}" y="{y:.2f}" width="{max(x1 - x0, 0.5):.2f}" '
                        f'height="{fr.y + fr.h - y:.2f}" fill="{color}" fill-opacity="0.45" stroke="{color}"/>')
        body.append(f'<text x="{fr.x + 10}" y="{fr.y + 16 + 15 * g}" font-size="12" '
                    f'fill="{color}">{escape(label)}</text>')
    for c in curves:
        body.append(_polyline(fr, grid, c, "#000", 1.5))
    return _document(body, width, height)
