"""Minimal SVG line plot of an amplitude spectrum with peak markers."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import DataIOError

WIDTH, HEIGHT = 720, 360
MARGIN = dict(left=60, right=20, top=30, bottom=45)


def _ticks(lo, hi, n=5):
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw)) if raw > 0 else 1.0
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    return np.arange(np.ceil(lo / step) * step, hi + 1e-12, step)


def spectrum_svg(spectrum, peaks=(), *, omega_max=None, title="", max_labels=8) -> str:
    omega = spectrum.angular_frequencies
    amp = spectrum.amplitudes
    if omega_max is None:
        labeled = [p.omega for p in peaks if getattr(p, "labeled", False)]
        omega_max = 1.25 * max(labeled) if labeled else omega[-1]
    keep = omega <= omega_max
    omega, amp = omega[keep], amp[keep]
    y_max = float(amp.max()) * 1.1 if amp.size and amp.max() > 0 else 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(w):
        return MARGIN["left"] + pw * w / omega_max

    def sy(a):
        return MARGIN["top"] + ph * (1 - a / y_max)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="11">',
           '<rect width="100%" height="100%" fill="white"/>']
    x0, y0 = MARGIN["left"], MARGIN["top"] + ph
    out.append(f'<path d="M{x0},{MARGIN["top"]} V{y0} H{x0 + pw}" stroke="black" fill="none"/>')
    for w in _ticks(0, omega_max):
        out.append(f'<line x1="{sx(w):.1f}" y1="{y0}" x2="{sx(w):.1f}" y2="{y0 + 4}" stroke="black"/>'
                   f'<text x="{sx(w):.1f}" y="{y0 + 16}" text-anchor="middle">{w:g}</text>')
    for a in _ticks(0, y_max):
        out.append(f'<line x1="{x0 - 4}" y1="{sy(a):.1f}" x2="{x0}" y2="{sy(a):.1f}" stroke="black"/>'
                   f'<text x="{x0 - 6}" y="{sy(a) + 4:.1f}" text-anchor="end">{a:.3g}</text>')
    pts = " ".join(f"{sx(w):.2f},{sy(a):.2f}" for w, a in zip(omega, amp))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1"/>')
    shown = 0
    for p in peaks:
        if p.omega > omega_max:
            continue
        out.append(f'<circle cx="{sx(p.omega):.1f}" cy="{sy(p.amplitude):.1f}" r="3" fill="#d62728"/>')
        if getattr(p, "labeled", False) and shown < max_labels:
            out.append(f'<text x="{sx(p.omega):.1f}" y="{sy(p.amplitude) - 6:.1f}" '
                       f'text-anchor="middle">{escape(p.label_text())}</text>')
            shown += 1
    out.append(f'<text x="{x0 + pw / 2}" y="{HEIGHT - 8}" text-anchor="middle">angular frequency</text>')
    out.append(f'<text x="14" y="{MARGIN["top"] + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {MARGIN["top"] + ph / 2})">amplitude</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
