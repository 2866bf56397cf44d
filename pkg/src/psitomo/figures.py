"""Deterministic SVG renderers for sweep results.

Pure string assembly: identical inputs give byte-identical files, which the
reproducibility checks rely on.
"""

from __future__ import annotations

import numpy as np

from .states import PureState, bloch_vector

# Five-stop blue-to-yellow ramp, interpolated linearly in RGB.
_RAMP = (
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
)


def _ramp_color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    pos = t * (len(_RAMP) - 1)
    i = min(int(pos), len(_RAMP) - 2)
    frac = pos - i
    r, g, b = (
        round(_RAMP[i][c] + frac * (_RAMP[i + 1][c] - _RAMP[i][c])) for c in range(3)
    )
    return f"#{r:02x}{g:02x}{b:02x}"


def _svg_document(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def bloch_figure(states: list[PureState], fidelities, mean: float, std: float) -> str:
    """Orthographic Bloch-sphere scatter, one marker per state, colored by fidelity.

    The view looks down the +x axis: markers sit at (y, z); back-hemisphere
    points are drawn first so the near side overplots them.
    """
    fids = np.asarray(fidelities, dtype=float)
    if len(states) != fids.size:
        raise ValueError("need one fidelity per state")
    size, radius = 480, 190
    cx, cy = size // 2, size // 2 + 10
    lo, hi = (float(fids.min()), float(fids.max())) if fids.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0

    body = [
        f'<circle cx="{cx}" cy="{cy}" r="{radius}" fill="none" '
        'stroke="#888888" stroke-width="1"/>',
        f'<ellipse cx="{cx}" cy="{cy}" rx="{radius}" ry="{radius / 4:.1f}" '
        'fill="none" stroke="#cccccc" stroke-width="1"/>',
        f'<text x="16" y="28" font-family="monospace" font-size="15">'
        f"mean F = {mean:.4f}, sd = {std:.4f}, n = {len(states)}</text>",
    ]
    order = []
    for i, psi in enumerate(states):
        x, y, z = bloch_vector(psi)
        order.append((x, i, y, z))
    order.sort(key=lambda item: (item[0], item[1]))
    for x, i, y, z in order:
        px = cx + y * radius
        py = cy - z * radius
        color = _ramp_color((float(fids[i]) - lo) / span)
        body.append(
            f'<circle class="pt" cx="{px:.2f}" cy="{py:.2f}" r="3" '
            f'fill="{color}" fill-opacity="0.85"/>'
        )
    body.append(
        f'<text x="16" y="{size - 14}" font-family="monospace" font-size="13">'
        f"color: F in [{lo:.4f}, {hi:.4f}]</text>"
    )
    return _svg_document(size, size, body)


def histogram_figure(fidelities, bins: int = 20) -> str:
    """Bar histogram of batch fidelities over [min F, 1] with summary text."""
    fids = np.asarray(fidelities, dtype=float)
    if fids.size == 0:
        raise ValueError("need at least one fidelity")
    lo = float(fids.min())
    if lo >= 1.0:
        lo = 1.0 - 1e-9
    edges = np.linspace(lo, 1.0, bins + 1)
    counts, _ = np.histogram(fids, bins=edges)
    peak = max(int(counts.max()), 1)

    width, height = 560, 360
    left, right, top, bottom = 56, 16, 48, 48
    plot_w = width - left - right
    plot_h = height - top - bottom
    bar_w = plot_w / bins

    body = [
        f'<text x="{left}" y="26" font-family="monospace" font-size="15">'
        f"mean F = {float(fids.mean()):.4f}, sd = {float(fids.std()):.4f}, "
        f"n = {fids.size}</text>",
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="#333333" stroke-width="1"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" '
        'stroke="#333333" stroke-width="1"/>',
    ]
    for i, count in enumerate(counts):
        h = plot_h * (int(count) / peak)
        x = left + i * bar_w
        y = top + plot_h - h
        body.append(
            f'<rect class="bar" x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
            f'height="{h:.2f}" fill="#4472a8" stroke="white" stroke-width="0.5"/>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        value = lo + frac * (1.0 - lo)
        x = left + frac * plot_w
        body.append(
            f'<text x="{x:.2f}" y="{top + plot_h + 18}" font-family="monospace" '
            f'font-size="11" text-anchor="middle">{value:.4f}</text>'
        )
    body.append(
        f'<text x="{left - 8}" y="{top + 4}" font-family="monospace" '
        f'font-size="11" text-anchor="end">{peak}</text>'
    )
    body.append(
        f'<text x="{left - 8}" y="{top + plot_h + 4}" font-family="monospace" '
        f'font-size="11" text-anchor="end">0</text>'
    )
    return _svg_document(width, height, body)
