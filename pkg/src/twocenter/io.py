"""CSV/JSON emission, run manifests and a minimal deterministic SVG scatter."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__


def fmt(v: float) -> str:
    # repr round-trips doubles exactly
    return repr(float(v))


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, (int, np.integer, str)) else fmt(c) for c in row])
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open() as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(c) for c in row] for row in r]
    return header, np.array(data, dtype=float).reshape(-1, len(header))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path: Path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir: Path, command: str, params: dict, files, started: str,
                   argv=None) -> Path:
    """Manifest listing every data file with its SHA-256."""
    out_dir = Path(out_dir)
    entry = {
        "command": command,
        "params": params,
        "argv": list(argv) if argv is not None else None,
        "code_version": __version__,
        "started": started,
        "finished": now_iso(),
        "outputs": [{"file": Path(f).name, "sha256": digest(f)} for f in files],
    }
    return write_json(out_dir / "manifest.json", entry)


def svg_scatter(path: Path, xs, ys, xlabel: str = "y", ylabel: str = "py",
                size: int = 600, title: str = "") -> Path:
    """Fixed-style scatter plot; identical inputs give identical bytes."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    pad = 50
    if xs.size:
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
    else:
        x0 = y0 = -1.0
        x1 = y1 = 1.0
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    w = size - 2 * pad

    def px(v):
        return pad + (v - x0) / (x1 - x0) * w

    def py(v):
        return size - pad - (v - y0) / (y1 - y0) * w

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{w}" height="{w}" fill="none" stroke="black"/>',
        f'<text x="{size / 2:.1f}" y="{size - 12}" text-anchor="middle" font-size="14">{xlabel}</text>',
        f'<text x="14" y="{size / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 14 {size / 2:.1f})">{ylabel}</text>',
        f'<text x="{pad}" y="{pad - 30}" font-size="11">[{x0:.4g}, {x1:.4g}] x [{y0:.4g}, {y1:.4g}]</text>',
    ]
    if title:
        parts.append(f'<text x="{size / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    parts.append('<g fill="black">')
    for a, b in zip(xs, ys):
        parts.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="0.7"/>')
    parts.append("</g></svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path
