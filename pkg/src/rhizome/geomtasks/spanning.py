"""Spanning a point set with a root network.

One root starts at the first point; every other point releases attractant.
A point is consumed once an apex comes within the capture radius, the field
is rebuilt from the points still unreached, and a new lateral root sprouts
from the network vertex where attractant is strongest.  Repeated, this
behaves like Prim's algorithm grown in space.
"""

from dataclasses import dataclass
import math

import numpy as np

from ..errors import ConfigurationError, DegenerateGeometryError
from ..field import Terrain, build_field, cell_of, gradient_at
from ..grower import ACTIVE, Apex, Fields, GrowthParams, RootNetwork, grow_step, make_rng
from ..oracle import exact_mst


def default_spanning_params(**overrides):
    p = dict(w_inertia=1.0, w_gradient=1.0, w_downhill=0.0, w_noise=0.0, w_align=0.0,
             speed=0.5, stall_limit=24)
    p.update(overrides)
    return GrowthParams(**p)


@dataclass
class SpanningResult:
    network: RootNetwork        # trails in the caller's coordinates
    spans_all: bool
    total_length: float
    mst_length: float
    mst_ratio: float
    order: list                 # point indices in capture order, starting with 0
    scale: float                # grid cells per input length unit


def _grid_map(pts, grid, margin):
    lo = pts.min(axis=0)
    extent = float(np.max(pts.max(axis=0) - lo))
    if extent == 0:
        raise DegenerateGeometryError("points coincide")
    scale = (grid - 1 - 2 * margin) / extent
    size = np.ceil((pts.max(axis=0) - lo) * scale).astype(int) + 2 * margin + 1
    return lo, scale, (int(size[0]), int(size[1]))


def approximate_spanning_tree(points, params=None, grid=96, margin=4, capture_radius=1.5,
                              steps=None, decay=0.05, D=0.2):
    """Grow a tree through ``points``; see the module docstring.

    Points are rescaled so their bounding box spans about ``grid`` cells.
    ``steps`` caps the total number of growth steps (default
    ``4 * grid * len(points)``); running out gives ``spans_all=False``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2:
        raise ConfigurationError("a spanning tree needs at least two points")
    mst = exact_mst(pts)  # also rejects duplicates
    params = params or default_spanning_params()
    lo, scale, (w, h) = _grid_map(pts, grid, margin)
    g = (pts - lo) * scale + margin
    cells = [cell_of(p) for p in g]
    if len(set(cells)) != len(cells):
        raise ConfigurationError("two points share a grid cell; raise the grid size")
    terrain = Terrain(w, h)
    if steps is None:
        steps = 4 * grid * len(pts)

    remaining = list(range(1, len(pts)))
    order = [0]
    rng = make_rng(params.rng_seed)
    apexes = []

    def field_for(idx):
        return build_field([cells[i] for i in idx], terrain, D=D, decay=decay,
                           max_iter=100 * (w + h))

    def sprout(fld):
        best = None
        for a in apexes:
            for k, v in enumerate(a.trail):
                c = fld.value_at(v, terrain)
                if best is None or c > best[0]:
                    best = (c, a, k, v)
        _, parent, k, v = best
        heading = gradient_at(fld, v, terrain)
        if not np.any(heading):
            heading = g[remaining[0]] - np.asarray(v)
        child = Apex(v, heading, speed=params.speed, root_id=len(apexes),
                     parent_id=parent.root_id, attach_index=k)
        apexes.append(child)
        return child

    fld = field_for(remaining)
    start = tuple(g[0])
    heading = gradient_at(fld, start, terrain)
    if not np.any(heading):
        heading = g[1] - g[0]
    first = Apex(start, heading, speed=params.speed, root_id=0)
    apexes.append(first)
    current = first
    used = 0
    while remaining and used < steps:
        grow_step([current], Fields(fld), terrain, params, rng)
        used += 1
        hit = None
        for i in remaining:
            if math.dist(current.pos, g[i]) <= capture_radius:
                hit = i
                break
        if hit is not None:
            current.trail.append((float(g[hit][0]), float(g[hit][1])))
            current.pos = current.trail[-1]
            current.state = "stopped"
            remaining.remove(hit)
            order.append(hit)
            if not remaining:
                break
            fld = field_for(remaining)
            current = sprout(fld)
        elif current.state != ACTIVE:
            current = sprout(fld)

    net = RootNetwork.from_apexes(apexes)
    net.trails = [(t - margin) / scale + lo for t in net.trails]
    total = net.total_length()
    return SpanningResult(net, not remaining, total, mst.length,
                          total / mst.length if mst.length > 0 else math.inf, order, scale)
