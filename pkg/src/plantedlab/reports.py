"""Report writers: canonical JSON, the fixed-column CSV, simple SVG line
charts, and run manifests.  All writes are atomic (temp file + rename) and
byte-deterministic for fixed inputs.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile

from .errors import OutputUnwritable

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "experiment_id", "model", "params", "D", "method", "value", "stderr",
    "typeI", "typeI_lo", "typeI_hi", "typeII", "typeII_hi", "seed",
]

SVG_WIDTH = 960
SVG_HEIGHT = 540


def canonical_json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=1) + "\n").encode("utf-8")


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_plab_")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {path}: {exc}") from exc


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def format_params(params: dict) -> str:
    """Canonical 'k=v;k=v' rendering of a model-parameter dict."""
    items = []
    for k in sorted(params):
        v = params[k]
        if isinstance(v, (list, tuple)):
            v = ",".join(_fmt(x) for x in v)
        items.append(f"{k}={_fmt(v)}")
    return ";".join(items)


def csv_bytes(rows: list[dict]) -> bytes:
    """Render rows with the fixed, versioned column set."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in CSV_COLUMNS))
    return ("\n".join(lines) + "\n").encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def manifest_bytes(config_text: str, seed: int, outputs: dict[str, bytes]) -> bytes:
    """Run manifest: config hash, seed, versions, and one entry per output."""
    import numpy
    import scipy

    from . import __version__

    doc = {
        "schema": "plantedlab.manifest.v1",
        "config_sha256": sha256_hex(config_text.encode("utf-8")),
        "seed": seed,
        "versions": {
            "plantedlab": __version__,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": [
            {"name": name, "sha256": sha256_hex(data), "bytes": len(data)}
            for name, data in sorted(outputs.items())
        ],
    }
    return canonical_json_bytes(doc)


# ---------------------------------------------------------------------------
# SVG line chart
# ---------------------------------------------------------------------------

def _scale(vals, lo, hi, out_lo, out_hi):
    if hi <= lo:
        hi = lo + 1.0
    return [out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo) for v in vals]


def _poly_points(xs, ys) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))


def svg_line_chart(x, series, x_label: str, y_label: str, title: str,
                   bands: dict | None = None) -> bytes:
    """Fixed-viewBox polyline chart with optional CI bands.

    series: {name: [y values]}; bands: {name: ([lo values], [hi values])}.
    Deterministic output for fixed inputs.
    """
    left, right, top, bottom = 70, 930, 60, 490
    ys_all = [v for vals in series.values() for v in vals]
    if bands:
        for lo, hi in bands.values():
            ys_all.extend(lo)
            ys_all.extend(hi)
    y_lo, y_hi = min(ys_all), max(ys_all)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = min(x), max(x)

    px = _scale(x, x_lo, x_hi, left, right)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{(left + right) / 2:.0f}" y="30" text-anchor="middle" '
        f'font-size="18">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{(left + right) / 2:.0f}" y="525" text-anchor="middle" '
        f'font-size="14">{x_label}</text>',
        f'<text x="20" y="{(top + bottom) / 2:.0f}" text-anchor="middle" '
        f'font-size="14" transform="rotate(-90 20 {(top + bottom) / 2:.0f})">'
        f'{y_label}</text>',
    ]
    # axis ticks
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        xp = left + frac * (right - left)
        yp = bottom - frac * (bottom - top)
        parts.append(f'<text x="{xp:.1f}" y="{bottom + 18}" text-anchor="middle" '
                     f'font-size="11">{xv:.4g}</text>')
        parts.append(f'<text x="{left - 8}" y="{yp + 4:.1f}" text-anchor="end" '
                     f'font-size="11">{yv:.4g}</text>')

    colors = ["#1b6ca8", "#c23b22", "#3a7d44", "#8856a7"]
    for idx, (name, (lo_vals, hi_vals)) in enumerate(sorted((bands or {}).items())):
        color = colors[idx % len(colors)]
        lo_y = _scale(lo_vals, y_lo, y_hi, bottom, top)
        hi_y = _scale(hi_vals, y_lo, y_hi, bottom, top)
        pts = _poly_points(px, hi_y) + " " + _poly_points(px[::-1], lo_y[::-1])
        parts.append(f'<polygon points="{pts}" fill="{color}" opacity="0.15"/>')
    for idx, (name, vals) in enumerate(sorted(series.items())):
        color = colors[idx % len(colors)]
        py = _scale(vals, y_lo, y_hi, bottom, top)
        parts.append(f'<polyline points="{_poly_points(px, py)}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')
        for xp, yp in zip(px, py):
            parts.append(f'<circle cx="{xp:.2f}" cy="{yp:.2f}" r="3" fill="{color}"/>')
        parts.append(f'<text x="{right - 6}" y="{top + 18 + 16 * idx}" '
                     f'text-anchor="end" font-size="12" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")
