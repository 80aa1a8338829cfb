"""Emitters and readers for CSV, NDJSON, JSON and SVG outputs.

Every file starts with a header record (command, parameters, seed).  Floats
are written with repr, so reading a file back gives identical values.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape

import numpy as np

HEADER_PREFIX = "# bead-atlas "
SVG_NS = "http://www.w3.org/2000/svg"


def atomic_write(path, data) -> None:
    """Write to a temp file in the target directory, then rename over path."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, allow_nan=True)


# --- CSV ---------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header: dict, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(HEADER_PREFIX + dumps(header) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_csv(path, header: dict, columns, rows) -> None:
    atomic_write(path, csv_text(header, columns, rows))


def _parse_cell(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path):
    """Returns (header, columns, rows) with numeric cells parsed."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith(HEADER_PREFIX):
            raise ValueError(f"{path}: missing header line")
        header = json.loads(first[len(HEADER_PREFIX):])
        r = csv.reader(fh)
        columns = next(r)
        rows = [[_parse_cell(c) for c in row] for row in r]
    return header, columns, rows


# --- NDJSON / JSON ------------------------------------------------------------

def ndjson_text(header: dict, records) -> str:
    lines = [dumps({"header": header})]
    lines += [dumps(rec) for rec in records]
    return "\n".join(lines) + "\n"


def write_ndjson(path, header: dict, records) -> None:
    atomic_write(path, ndjson_text(header, records))


def read_ndjson(path):
    """Returns (header, records)."""
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or "header" not in lines[0]:
        raise ValueError(f"{path}: missing header record")
    return lines[0]["header"], lines[1:]


def write_json(path, header: dict, body: dict) -> None:
    atomic_write(path, json.dumps(_jsonable({"header": header, **body}), sort_keys=True,
                                  indent=2, allow_nan=True) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return doc.pop("header"), doc


# --- SVG -----------------------------------------------------------------------

def _svg(header: dict, body: list, size: int) -> str:
    pad = 10
    out = [f'<svg xmlns="{SVG_NS}" width="{size + 2 * pad}" height="{size + 2 * pad}" '
           f'viewBox="{-pad} {-pad} {size + 2 * pad} {size + 2 * pad}">',
           f"<metadata>{escape(dumps(header))}</metadata>"]
    out += body
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_svg(header: dict, points, size: int = 500, radius: float = 2.0, frame=True) -> str:
    """One circle per point; points are (x, y) in the unit square, y upwards."""
    body = []
    if frame:
        body.append(f'<rect class="frame" x="0" y="0" width="{size}" height="{size}" '
                    f'fill="none" stroke="#999"/>')
    for x, y in points:
        body.append(f'<circle class="bead" cx="{x * size:.3f}" cy="{(1 - y) * size:.3f}" '
                    f'r="{radius}"/>')
    return _svg(header, body, size)


def curves_svg(header: dict, curves, size: int = 500, y_range=(0.0, 1.0)) -> str:
    """Polylines (label, xs, ys) mapped to the unit square; y upwards."""
    lo, hi = y_range
    span = hi - lo if hi > lo else 1.0
    body = []
    for label, xs, ys in curves:
        pts = " ".join(f"{x * size:.3f},{(1 - (y - lo) / span) * size:.3f}" for x, y in zip(xs, ys))
        body.append(f'<polyline class="curve" data-label="{escape(str(label))}" points="{pts}" '
                    f'fill="none" stroke="black"/>')
    return _svg(header, body, size)


def heatmap_svg(header: dict, values, size: int = 500) -> str:
    """Grey-level cells of a node array (first axis x, second axis y upwards)."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(np.nanmin(v)), float(np.nanmax(v))
    span = hi - lo if hi > lo else 1.0
    nx, ny = v.shape
    w, h = size / nx, size / ny
    body = []
    for i in range(nx):
        for j in range(ny):
            g = int(round(255 * (v[i, j] - lo) / span))
            body.append(f'<rect class="cell" x="{i * w:.3f}" y="{size - (j + 1) * h:.3f}" '
                        f'width="{w:.3f}" height="{h:.3f}" fill="rgb({g},{g},{g})"/>')
    return _svg(header, body, size)


def read_svg(path):
    """Returns (header, root element)."""
    root = ET.parse(path).getroot()
    meta = root.find(f"{{{SVG_NS}}}metadata")
    header = json.loads(meta.text) if meta is not None and meta.text else {}
    return header, root


def svg_elements(root, tag: str, cls: str | None = None) -> list:
    return [e for e in root.iter(f"{{{SVG_NS}}}{tag}") if cls is None or e.get("class") == cls]
