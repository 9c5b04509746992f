"""Maze solving by a single root following an attractant released at the exit."""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from ..errors import ConfigurationError
from ..field import Terrain, build_field, cell_of, gradient_at
from ..grower import ACTIVE, EXITED, Apex, Fields, GrowthParams, grow_step, make_rng
from ..metric import path_length


def default_maze_params(**overrides):
    p = dict(w_inertia=1.5, w_gradient=1.0, w_downhill=0.0, w_noise=0.0, w_align=0.0,
             speed=0.5, stall_limit=24)
    p.update(overrides)
    return GrowthParams(**p)


@dataclass
class MazeResult:
    solved: bool
    path: list = None            # cells from src to dst, loops erased
    length: float = math.inf     # chamfer length of ``path``
    trail: np.ndarray = None     # raw apex trail
    trail_length: float = 0.0
    steps: int = 0
    reason: str = ""
    field_converged: bool = True
    extra: dict = field(default_factory=dict)


def segment_cells(a, b):
    """Cells crossed by the segment ``a -> b`` in order (start cell excluded)."""
    x, y = a
    dx, dy = b[0] - a[0], b[1] - a[1]
    ix, iy = cell_of(a)
    end = cell_of(b)
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    tx = ((ix + 0.5 * sx) - x) / dx if dx else math.inf
    ty = ((iy + 0.5 * sy) - y) / dy if dy else math.inf
    tdx = 1.0 / abs(dx) if dx else math.inf
    tdy = 1.0 / abs(dy) if dy else math.inf
    out = []
    while (ix, iy) != end:
        if abs(tx - ty) <= 1e-12:
            ix += sx
            iy += sy
            tx += tdx
            ty += tdy
        elif tx < ty:
            ix += sx
            tx += tdx
        else:
            iy += sy
            ty += tdy
        out.append((ix, iy))
        if len(out) > 4 * (abs(dx) + abs(dy)) + 8:  # rounding guard
            break
    return out


def trail_cells(trail):
    cells = [cell_of(trail[0])]
    for a, b in zip(trail, trail[1:]):
        for c in segment_cells(a, b):
            if c != cells[-1]:
                cells.append(c)
    return cells


def erase_loops(cells):
    """Chronological loop erasure: keep the walk's simple path."""
    out = []
    where = {}
    for c in cells:
        if c in where:
            k = where[c]
            for dropped in out[k + 1:]:
                del where[dropped]
            del out[k + 1:]
        else:
            where[c] = len(out)
            out.append(c)
    return out


def solve_maze(terrain, src, dst, params=None, steps=None, decay=0.01, D=0.2):
    """Grow one non-branching root from ``src`` towards an attractant at ``dst``.

    Returns a MazeResult; if the root does not reach ``dst`` within the step
    budget (default ``8 * width * height``), ``solved`` is False and
    ``reason`` says why.
    """
    src = (int(src[0]), int(src[1]))
    dst = (int(dst[0]), int(dst[1]))
    for name, c in (("source", src), ("destination", dst)):
        if not terrain.is_passable(c):
            raise ConfigurationError(f"{name} cell {c} is not passable")
    params = params or default_maze_params()
    if steps is None:
        steps = 8 * terrain.width * terrain.height
    fld = build_field([dst], terrain, D=D, decay=decay, max_iter=100 * (terrain.width + terrain.height))
    result = MazeResult(False, field_converged=fld.converged)
    if src == dst:
        result.solved = True
        result.path = [src]
        result.length = 0.0
        result.trail = np.array([src], dtype=np.float64)
        return result
    g = gradient_at(fld, src, terrain)
    if fld.concentration[src[1], src[0]] <= 0 or not np.any(g):
        result.reason = "no attractant gradient at the source (destination unreachable)"
        result.trail = np.array([src], dtype=np.float64)
        return result
    # a lone root never branches
    params = replace(params, branch_rate=0.0)
    apex = Apex(src, g, speed=params.speed)
    apexes = [apex]
    rng = make_rng(params.rng_seed)
    fields = Fields(fld)
    exits = {dst}
    n = 0
    while n < steps and apex.state == ACTIVE:
        grow_step(apexes, fields, terrain, params, rng, exits)
        n += 1
    result.trail = np.array(apex.trail, dtype=np.float64)
    result.trail_length = float(np.sum(np.hypot(*np.diff(result.trail, axis=0).T)))
    result.steps = n
    if apex.state != EXITED:
        result.reason = "root stopped against a wall" if apex.state != ACTIVE else "step budget exhausted"
        return result
    cells = erase_loops(trail_cells(apex.trail))
    result.solved = True
    result.path = cells
    result.length = path_length(cells)
    return result


def generate_maze(size=21, seed=0):
    """Perfect maze on a ``size`` x ``size`` grid (odd size) by randomized DFS.

    Cells at odd coordinates are rooms; returns ``(Terrain, src, dst)`` with
    src and dst at opposite corner rooms.
    """
    if size < 3 or size % 2 == 0:
        raise ConfigurationError("maze size must be an odd integer >= 3")
    rng = np.random.default_rng(seed)
    obstacle = np.ones((size, size), dtype=bool)
    n = (size - 1) // 2
    seen = np.zeros((n, n), dtype=bool)
    stack = [(0, 0)]
    seen[0, 0] = True
    obstacle[1, 1] = False
    while stack:
        cx, cy = stack[-1]
        options = [(cx + dx, cy + dy) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                   if 0 <= cx + dx < n and 0 <= cy + dy < n and not seen[cy + dy, cx + dx]]
        if not options:
            stack.pop()
            continue
        nx, ny = options[int(rng.integers(len(options)))]
        seen[ny, nx] = True
        obstacle[2 * ny + 1, 2 * nx + 1] = False
        obstacle[cy + ny + 1, cx + nx + 1] = False
        stack.append((nx, ny))
    return Terrain(size, size, obstacle=obstacle), (1, 1), (size - 2, size - 2)


def corridor(length):
    """Straight one-cell corridor of ``length`` cells inside a solid block."""
    obstacle = np.ones((3, length + 2), dtype=bool)
    obstacle[1, 1:length + 1] = False
    return Terrain(length + 2, 3, obstacle=obstacle), (1, 1), (length, 1)
