"""Deterministic SVG drawings of networks, labelings, layouts and polygons.

Every number is written with a fixed format and every element is emitted in
a fixed order with a stable id, so the same input always gives the same bytes.
"""

from xml.sax.saxutils import escape

import numpy as np

from .kernels import BOUNDARY, OBSTACLE, UNCLAIMED

PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")
OBSTACLE_FILL = "#3b3b3b"
UNCLAIMED_FILL = "#ffffff"
BOUNDARY_STROKE = "#000000"
TRAIL_STROKE = "#2e7d32"
OCCUPIED_STROKE = "#c62828"
IDLE_STROKE = "#9e9e9e"


def _n(v):
    """Fixed-precision number text; avoids '-0'."""
    s = f"{float(v):.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _doc(width, height, body, scale=1.0):
    w, h = width * scale, height * scale
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(w)}" height="{_n(h)}" '
            f'viewBox="0 0 {_n(width)} {_n(height)}">\n')
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + head + "".join(body) + "</svg>\n"


def _notice(text):
    body = [f'<text id="notice" x="10" y="20" font-family="sans-serif" font-size="12">'
            f'{escape(text)}</text>\n']
    return _doc(200, 40, body)


def palette_colour(k):
    return PALETTE[k % len(PALETTE)]


def _mask_path(mask):
    """Path data covering the True cells of ``mask``, one rectangle per row run."""
    parts = []
    for y, row in enumerate(np.asarray(mask, dtype=bool)):
        x = 0
        n = len(row)
        while x < n:
            if not row[x]:
                x += 1
                continue
            end = x
            while end < n and row[end]:
                end += 1
            # cells are centred on integer coordinates
            parts.append(f"M{_n(x - 0.5)} {_n(y - 0.5)}h{end - x}v1h{-(end - x)}z")
            x = end
    return "".join(parts)


def _grid_box(shape):
    h, w = shape
    return f'<g transform="translate(0.5 0.5)">\n', w, h


def render_network(network, terrain=None, scale=4.0):
    """Trails as stroked paths, one per root, over optional obstacle cells."""
    trails = [np.asarray(t, dtype=np.float64).reshape(-1, 2) for t in network.trails]
    if terrain is None and not any(len(t) for t in trails):
        return _notice("empty root network")
    if terrain is not None:
        w, h = terrain.width, terrain.height
    else:
        allp = np.vstack([t for t in trails if len(t)])
        w = int(np.ceil(allp[:, 0].max())) + 1
        h = int(np.ceil(allp[:, 1].max())) + 1
    open_, w, h = _grid_box((h, w))
    body = [open_]
    if terrain is not None and terrain.obstacle.any():
        body.append(f'<path id="obstacles" fill="{OBSTACLE_FILL}" '
                    f'd="{_mask_path(terrain.obstacle)}"/>\n')
    if not any(len(t) for t in trails):
        body.append("</g>\n")
        body.append('<text id="notice" x="2" y="10" font-size="6">empty root network</text>\n')
        return _doc(w, h, body, scale)
    for rid, t in zip(network.root_ids, trails):
        if len(t) == 0:
            continue
        d = "M" + "L".join(f"{_n(x)} {_n(y)}" for x, y in t)
        if len(t) == 1:
            d += "l0 0"
        body.append(f'<path id="root-{rid}" fill="none" stroke="{TRAIL_STROKE}" '
                    f'stroke-width="0.4" stroke-linecap="round" d="{d}"/>\n')
    body.append("</g>\n")
    return _doc(w, h, body, scale)


def _runs(flags):
    """(start, end) index pairs of the True runs in a 1-d bool array."""
    out = []
    k = 0
    n = len(flags)
    while k < n:
        if flags[k]:
            e = k
            while e < n and flags[e]:
                e += 1
            out.append((k, e))
            k = e
        else:
            k += 1
    return out


def _boundary_path(labels):
    """Where two regions meet.

    Cell edges between differently claimed neighbours become straight runs;
    boundary cells are joined centre to centre, with a dot for a lone one.
    """
    lab = np.asarray(labels)
    h, w = lab.shape
    claimed = lab >= 0
    parts = []
    # vertical edges at x + 0.5
    split = claimed[:, :-1] & claimed[:, 1:] & (lab[:, :-1] != lab[:, 1:])
    for x in range(w - 1):
        for a, e in _runs(split[:, x]):
            parts.append(f"M{_n(x + 0.5)} {_n(a - 0.5)}V{_n(e - 0.5)}")
    # horizontal edges at y + 0.5
    split = claimed[:-1, :] & claimed[1:, :] & (lab[:-1, :] != lab[1:, :])
    for y in range(h - 1):
        for a, e in _runs(split[y]):
            parts.append(f"M{_n(a - 0.5)} {_n(y + 0.5)}H{_n(e - 0.5)}")
    b = lab == BOUNDARY
    for y, x in np.argwhere(b):
        linked = False
        for dx, dy in ((1, 0), (0, 1), (1, 1), (-1, 1)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and b[ny, nx]:
                parts.append(f"M{x} {y}L{nx} {ny}")
                linked = True
        if not linked and not any(
                0 <= x + dx < w and 0 <= y + dy < h and b[y + dy, x + dx]
                for dx, dy in ((-1, 0), (0, -1), (-1, -1), (1, -1))):
            parts.append(f"M{x} {y}l0 0")
    return "".join(parts)


def render_labeling(labeling, scale=2.0):
    """Claimed regions as fills from the palette, region borders as one stroked path."""
    labels = np.asarray(labeling.labels)
    if labels.size == 0:
        return _notice("empty labeling")
    open_, w, h = _grid_box(labels.shape)
    body = [open_]
    if (labels == OBSTACLE).any():
        body.append(f'<path id="obstacles" fill="{OBSTACLE_FILL}" '
                    f'd="{_mask_path(labels == OBSTACLE)}"/>\n')
    if (labels == UNCLAIMED).any():
        body.append(f'<path id="unclaimed" fill="{UNCLAIMED_FILL}" '
                    f'd="{_mask_path(labels == UNCLAIMED)}"/>\n')
    top = int(labels.max())
    for k in range(top + 1):
        mask = labels == k
        if mask.any():
            body.append(f'<path id="region-{k}" fill="{palette_colour(k)}" '
                        f'd="{_mask_path(mask)}"/>\n')
    d = _boundary_path(labels)
    if d:
        body.append(f'<path id="boundary" fill="none" stroke="{BOUNDARY_STROKE}" '
                    f'stroke-width="0.5" stroke-linecap="round" d="{d}"/>\n')
    for k, (x, y) in enumerate(np.asarray(labeling.seeds).reshape(-1, 2)):
        body.append(f'<circle id="seed-{k}" cx="{_n(x)}" cy="{_n(y)}" r="1.5" fill="#000000"/>\n')
    body.append("</g>\n")
    if top < 0 and not d:
        body.append('<text id="notice" x="2" y="10" font-size="6">no claimed cells</text>\n')
    return _doc(w, h, body, scale)


def _layout_positions(layout):
    """Columns by hop count from the inputs; rows by declaration order."""
    depth = {}
    for label in layout.inputs:
        depth[f"in:{label}"] = 0
    order = list(layout.junctions)
    changed = True
    while changed:
        changed = False
        for ch in layout.channels.values():
            if ch.src in depth:
                d = depth[ch.src] + 1
                if ch.dst.startswith("out:"):
                    continue
                if depth.get(ch.dst, -1) < d and d <= len(order) + 1:
                    depth[ch.dst] = d
                    changed = True
    for j in order:
        depth.setdefault(j, 1)
    last = max([depth[j] for j in order], default=0) + 1
    for label in layout.outputs:
        depth[f"out:{label}"] = last
    columns = {}
    for node in [f"in:{l}" for l in layout.inputs] + order + [f"out:{l}" for l in layout.outputs]:
        columns.setdefault(depth[node], []).append(node)
    pos = {}
    for c, nodes in sorted(columns.items()):
        for r, node in enumerate(nodes):
            pos[node] = (60 + 120 * c, 40 + 60 * r)
    return pos, last


def render_layout(layout, result=None):
    """Channel graph; occupied channels and output bits come from ``result``."""
    if not layout.channels:
        return _notice("empty channel layout")
    pos, last = _layout_positions(layout)
    rows = max(sum(1 for p in pos.values() if p[0] == x) for x in {p[0] for p in pos.values()})
    width = 120 + 120 * last
    height = 40 + 60 * rows
    occupied = {c for _t, c, _r in result.occupancy} if result is not None else set()
    body = ['<g font-family="sans-serif" font-size="10">\n']
    for ch in layout.channels.values():
        (x1, y1), (x2, y2) = pos[ch.src], pos[ch.dst]
        colour = OCCUPIED_STROKE if ch.name in occupied else IDLE_STROKE
        body.append(f'<line id="channel-{escape(ch.name)}" x1="{_n(x1)}" y1="{_n(y1)}" '
                    f'x2="{_n(x2)}" y2="{_n(y2)}" stroke="{colour}" stroke-width="2"/>\n')
        mx, my = (x1 + x2) / 2, (y1 + y2) / 2 - 4
        body.append(f'<text x="{_n(mx)}" y="{_n(my)}" text-anchor="middle">'
                    f'{escape(ch.name)} ({_n(ch.length)})</text>\n')
    for node, (x, y) in pos.items():
        if node.startswith("in:") or node.startswith("out:"):
            kind, label = node.split(":", 1)
            text = label
            if kind == "in" and result is not None:
                fed = any(r.label == label for r in result.roots)
                text = f"{label}={int(fed)}"
            if kind == "out" and result is not None:
                text = f"{label}={int(bool(result.outputs.get(label, 0)))}"
            body.append(f'<rect id="{kind}-{escape(label)}" x="{_n(x - 18)}" y="{_n(y - 10)}" '
                        f'width="36" height="20" fill="#ffffff" stroke="#000000"/>\n')
            body.append(f'<text x="{_n(x)}" y="{_n(y + 4)}" text-anchor="middle">'
                        f'{escape(text)}</text>\n')
        else:
            shape = "#fff3e0" if layout.junctions[node] else "#e3f2fd"
            body.append(f'<circle id="junction-{escape(node)}" cx="{_n(x)}" cy="{_n(y)}" r="14" '
                        f'fill="{shape}" stroke="#000000"/>\n')
            body.append(f'<text x="{_n(x)}" y="{_n(y + 4)}" text-anchor="middle">'
                        f'{escape(node)}</text>\n')
    body.append("</g>\n")
    return _doc(width, height, body)


def render_polygons(polygons, points=(), paths=(), scale=None):
    """Filled polygons, stroked open paths and points, fitted to a 400 unit box.

    Used for inputs in arbitrary units: hull outlines, subdivision regions,
    spanning trees.
    """
    polys = [np.asarray(p, dtype=np.float64).reshape(-1, 2) for p in polygons]
    lines = [np.asarray(p, dtype=np.float64).reshape(-1, 2) for p in paths]
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    everything = [p for p in polys + lines if len(p)] + ([pts] if len(pts) else [])
    if not everything:
        return _notice("nothing to draw")
    allp = np.vstack(everything)
    lo = allp.min(axis=0)
    span = float(max(allp.max(axis=0) - lo)) or 1.0
    s = scale if scale is not None else 400.0 / span
    pad = 10.0
    w = (allp[:, 0].max() - lo[0]) * s + 2 * pad
    h = (allp[:, 1].max() - lo[1]) * s + 2 * pad

    def xy(p):
        return f"{_n((p[0] - lo[0]) * s + pad)} {_n((p[1] - lo[1]) * s + pad)}"

    body = []
    for k, p in enumerate(polys):
        if not len(p):
            continue
        d = "M" + "L".join(xy(v) for v in p) + "z"
        body.append(f'<path id="polygon-{k}" fill="{palette_colour(k)}" fill-opacity="0.6" '
                    f'stroke="#000000" stroke-width="1" d="{d}"/>\n')
    for k, p in enumerate(lines):
        if not len(p):
            continue
        d = "M" + "L".join(xy(v) for v in p) + ("l0 0" if len(p) == 1 else "")
        body.append(f'<path id="root-{k}" fill="none" stroke="{TRAIL_STROKE}" '
                    f'stroke-width="2" stroke-linecap="round" d="{d}"/>\n')
    for k, p in enumerate(pts):
        cx, cy = xy(p).split()
        body.append(f'<circle id="point-{k}" cx="{cx}" cy="{cy}" r="2" fill="#000000"/>\n')
    return _doc(w, h, body)


def render_svg(artifact, result=None, **kwargs):
    """Dispatch on the artifact type; ``result`` is a GateResult for layouts."""
    from .channelgates import ChannelLayout
    from .geomtasks.voronoi import Labeling
    from .grower import RootNetwork

    if isinstance(artifact, RootNetwork):
        return render_network(artifact, **kwargs)
    if isinstance(artifact, Labeling):
        return render_labeling(artifact, **kwargs)
    if isinstance(artifact, ChannelLayout):
        return render_layout(artifact, result)
    raise TypeError(f"cannot render {type(artifact).__name__}")
