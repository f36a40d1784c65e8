"""CSV/JSON output bundles with a checksummed manifest, plus small SVG charts.

Floats are written as the shortest decimal string that round-trips
(Python ``repr``), so identical runs give identical bytes.
"""
from __future__ import annotations

import hashlib
import html
import json
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

MANIFEST_NAME = "manifest.json"


def fmt(x) -> str:
    return repr(float(x))


def csv_text(header, rows, comment=None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def manifest_comment(command: str, config: dict) -> str:
    return f"manifest: {MANIFEST_NAME} command={command} config_sha256={config_digest(config)}"


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0+unknown"


def _versions():
    out = {}
    for pkg in ("numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


@dataclass
class OutputBundle:
    out_dir: Path
    command: str
    config: dict
    files: dict = field(default_factory=dict)  # name -> sha256
    extra: dict = field(default_factory=dict)

    def add(self, name: str, content) -> Path:
        data = content.encode() if isinstance(content, str) else content
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()
        return path

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "files": [{"name": n, "sha256": h} for n, h in sorted(self.files.items())],
            "tool_version": tool_version(),
            "versions": _versions(),
            "float_format": "shortest round-trip decimal (Python repr)",
            **self.extra,
        }

    def write_manifest(self) -> Path:
        path = self.out_dir / MANIFEST_NAME
        path.write_text(json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")
        return path


def read_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text())


def verify_bundle(out_dir) -> list[str]:
    """Problems found when checking every manifest entry; empty means intact."""
    out_dir = Path(out_dir)
    try:
        manifest = read_manifest(out_dir)
    except (OSError, json.JSONDecodeError) as exc:
        return [f"cannot read manifest: {exc}"]
    problems = []
    for entry in manifest.get("files", []):
        path = out_dir / entry["name"]
        if not path.is_file():
            problems.append(f"missing file {entry['name']}")
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        if digest != entry["sha256"]:
            problems.append(f"checksum mismatch for {entry['name']}")
    return problems


# -- SVG --------------------------------------------------------------------

_W, _H, _PAD = 720, 360, 50
_COLORS = ("#c0392b", "#2c6fbb", "#27ae60", "#8e44ad", "#d35400", "#16a085")


def _frame(title, xlabel, ylabel, x0, x1, y0, y1):
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" '
        'fill="none" stroke="#333"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="13">{html.escape(title)}</text>',
        f'<text x="{_W / 2}" y="{_H - 10}" text-anchor="middle">{html.escape(xlabel)}</text>',
        f'<text x="14" y="{_H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {_H / 2})">{html.escape(ylabel)}</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 14}" text-anchor="middle">{x0:.4g}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 14}" text-anchor="middle">{x1:.4g}</text>',
        f'<text x="{_PAD - 4}" y="{_H - _PAD}" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{_PAD - 4}" y="{_PAD + 4}" text-anchor="end">{y1:.4g}</text>',
    ]
    return parts


def _scale(v, lo, hi, a, b):
    span = (hi - lo) or 1.0
    return a + (np.asarray(v, dtype=float) - lo) / span * (b - a)


def line_chart_svg(x, series: dict, title="", xlabel="t (ns)", ylabel="", ylim=None) -> str:
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    lo, hi = ylim if ylim else (min(np.nanmin(v) for v in ys.values()),
                                max(np.nanmax(v) for v in ys.values()))
    parts = _frame(title, xlabel, ylabel, x[0], x[-1], lo, hi)
    px = _scale(x, x[0], x[-1], _PAD, _W - _PAD)
    for i, (name, y) in enumerate(ys.items()):
        py = _scale(y, lo, hi, _H - _PAD, _PAD)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py) if np.isfinite(b))
        color = _COLORS[i % len(_COLORS)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        parts.append(f'<text x="{_W - _PAD - 4}" y="{_PAD + 14 + 13 * i}" text-anchor="end" '
                     f'fill="{color}">{html.escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _color(v, vmin, vmax):
    # blue (vmin) -> white -> red (vmax)
    if not np.isfinite(v):
        return "#888888"
    u = min(max((v - vmin) / ((vmax - vmin) or 1.0), 0.0), 1.0)
    if u < 0.5:
        w = u / 0.5
        r, g, b = int(40 + 215 * w), int(80 + 175 * w), 255
    else:
        w = (u - 0.5) / 0.5
        r, g, b = 255, int(255 - 200 * w), int(255 - 215 * w)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(times, axis_values, z, title="", ylabel="", vmin=-1.0, vmax=1.0,
                max_columns=400) -> str:
    """Time along x, sweep axis along y, colour = value."""
    times = np.asarray(times, dtype=float)
    z = np.asarray(z, dtype=float)
    step = max(1, int(np.ceil(times.size / max_columns)))
    cols = np.arange(0, times.size, step)
    n_rows = z.shape[0]
    av = np.asarray(axis_values, dtype=float)
    parts = _frame(title, "t (ns)", ylabel, times[0], times[-1], av[0], av[-1])
    cw = (_W - 2 * _PAD) / cols.size
    rh = (_H - 2 * _PAD) / n_rows
    for i in range(n_rows):
        y = _H - _PAD - (i + 1) * rh
        for j, c in enumerate(cols):
            parts.append(f'<rect x="{_PAD + j * cw:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                         f'height="{rh + 0.05:.2f}" fill="{_color(z[i, c], vmin, vmax)}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
