"""Plain-text grid and point formats.

* ASCII obstacle masks: one line per row, ``#`` is an obstacle, ``.`` is
  free.  ``S`` and ``D`` mark free cells used as source/destination by the
  maze tools.  Blank lines and lines starting with ``;`` are ignored.
* PGM: ASCII ``P2`` is written; ``P2`` and binary ``P5`` are read.
* Point and polygon CSV: two columns ``x,y`` with an optional header line.
"""

import csv
import io

import numpy as np

from .errors import ConfigurationError
from .field import Terrain

MASK_CHARS = {"#": True, ".": False, "S": False, "D": False}


def parse_ascii_mask(text):
    """Return ``(obstacle_grid, markers)`` where markers maps 'S'/'D' to cells."""
    rows = [ln.rstrip("\n\r") for ln in text.splitlines()]
    rows = [r for r in rows if r.strip() and not r.startswith(";")]
    if not rows:
        raise ConfigurationError("empty obstacle mask")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigurationError("obstacle mask rows differ in length")
    grid = np.zeros((len(rows), width), dtype=bool)
    markers = {}
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch not in MASK_CHARS:
                raise ConfigurationError(f"unexpected character {ch!r} in mask at {(x, y)}")
            grid[y, x] = MASK_CHARS[ch]
            if ch in "SD":
                markers[ch] = (x, y)
    return grid, markers


def format_ascii_mask(obstacle, markers=None):
    markers = markers or {}
    inverse = {tuple(v): k for k, v in markers.items()}
    lines = []
    for y in range(obstacle.shape[0]):
        lines.append("".join(inverse.get((x, y), "#" if obstacle[y, x] else ".")
                             for x in range(obstacle.shape[1])))
    return "\n".join(lines) + "\n"


def read_ascii_mask(path):
    with open(path) as fh:
        return parse_ascii_mask(fh.read())


def _pgm_tokens(data):
    tokens = []
    for line in data.splitlines():
        line = line.split(b"#", 1)[0]
        tokens.extend(line.split())
    return tokens


def read_pgm(path):
    """Read a P2 or P5 PGM file into a float array of raw grey levels."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic == b"P2":
        tokens = _pgm_tokens(data[2:])
        w, h, _maxval = (int(t) for t in tokens[:3])
        vals = np.array([int(t) for t in tokens[3:3 + w * h]], dtype=np.float64)
        if vals.size != w * h:
            raise ConfigurationError(f"{path}: truncated PGM")
        return vals.reshape(h, w)
    if magic == b"P5":
        # header: magic, width, height, maxval, then one whitespace byte
        fields = []
        pos = 2
        while len(fields) < 3:
            while data[pos:pos + 1].isspace():
                pos += 1
            if data[pos:pos + 1] == b"#":
                pos = data.index(b"\n", pos) + 1
                continue
            start = pos
            while not data[pos:pos + 1].isspace():
                pos += 1
            fields.append(int(data[start:pos]))
        pos += 1
        w, h, maxval = fields
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        vals = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos)
        return vals.astype(np.float64).reshape(h, w)
    raise ConfigurationError(f"{path}: not a PGM file")


def format_pgm(values, maxval=255, normalize=True):
    """Format a grid as ASCII PGM text.

    With ``normalize`` the grid is scaled linearly so its max maps to
    ``maxval`` (an all-zero grid stays zero); otherwise values are rounded and
    clipped.
    """
    v = np.asarray(values, dtype=np.float64)
    if normalize:
        top = float(v.max()) if v.size else 0.0
        lo = min(float(v.min()), 0.0) if v.size else 0.0
        span = top - lo
        scaled = np.zeros_like(v) if span <= 0 else (v - lo) / span * maxval
    else:
        scaled = v
    ints = np.clip(np.rint(scaled), 0, maxval).astype(np.int64)
    out = io.StringIO()
    out.write(f"P2\n{v.shape[1]} {v.shape[0]}\n{maxval}\n")
    for row in ints:
        out.write(" ".join(str(int(x)) for x in row))
        out.write("\n")
    return out.getvalue()


def write_pgm(path, values, maxval=255, normalize=True):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_pgm(values, maxval, normalize))


def load_terrain(mask_path=None, elevation_path=None, width=None, height=None, cell_size=1.0):
    """Build a Terrain from an ASCII mask and/or a PGM elevation map."""
    obstacle = None
    markers = {}
    elevation = None
    if mask_path is not None:
        obstacle, markers = read_ascii_mask(mask_path)
    if elevation_path is not None:
        elevation = read_pgm(elevation_path)
    shape = None
    for grid in (obstacle, elevation):
        if grid is not None:
            if shape is not None and grid.shape != shape:
                raise ConfigurationError("mask and elevation sizes differ")
            shape = grid.shape
    if shape is None:
        if width is None or height is None:
            raise ConfigurationError("terrain needs a mask, an elevation map or explicit size")
        shape = (int(height), int(width))
    terrain = Terrain(shape[1], shape[0], elevation=elevation, obstacle=obstacle,
                      cell_size=cell_size)
    return terrain, markers


def read_points_csv(path):
    """Read ``x,y`` rows; a non-numeric first row is taken as a header."""
    with open(path, newline="") as fh:
        return parse_points_csv(fh.read())


def parse_points_csv(text):
    pts = []
    for i, row in enumerate(csv.reader(io.StringIO(text))):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        try:
            x, y = float(row[0]), float(row[1])
        except (ValueError, IndexError):
            if i == 0:
                continue
            raise ConfigurationError(f"bad point row {row!r}")
        pts.append((x, y))
    return np.array(pts, dtype=np.float64).reshape(-1, 2)


def format_points_csv(points):
    out = io.StringIO()
    out.write("x,y\n")
    for x, y in np.asarray(points, dtype=np.float64):
        out.write(f"{x!r},{y!r}\n")
    return out.getvalue()


def format_grid_csv(values):
    """Raw grid values as CSV, one row per grid row, full float precision."""
    out = io.StringIO()
    for row in np.asarray(values, dtype=np.float64):
        out.write(",".join(repr(float(v)) for v in row))
        out.write("\n")
    return out.getvalue()
