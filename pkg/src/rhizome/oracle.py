"""Exact reference algorithms the growth solvers are scored against."""

from dataclasses import dataclass
from fractions import Fraction
import heapq
import math

import numpy as np

from .errors import ConfigurationError, DegenerateGeometryError
from .kernels import BOUNDARY, OBSTACLE
from .metric import NEIGHBOURS_8, legal_move

TIE_TOL = 1e-9


@dataclass
class ShortestPath:
    path: list          # list of (x, y) cells, None when unreachable
    length: float       # math.inf when unreachable

    @property
    def reachable(self):
        return self.path is not None


def _passable(terrain):
    return terrain if isinstance(terrain, np.ndarray) else terrain.passable


def dijkstra(terrain, src, dst):
    """Shortest 8-neighbour chamfer path between two cells, no corner cutting."""
    passable = _passable(terrain)
    h, w = passable.shape
    src = (int(src[0]), int(src[1]))
    dst = (int(dst[0]), int(dst[1]))
    for name, c in (("source", src), ("destination", dst)):
        if not (0 <= c[0] < w and 0 <= c[1] < h) or not passable[c[1], c[0]]:
            raise ConfigurationError(f"{name} cell {c} is not passable")
    dist = {src: 0.0}
    prev = {}
    pq = [(0.0, src)]
    done = set()
    while pq:
        d, cell = heapq.heappop(pq)
        if cell in done:
            continue
        done.add(cell)
        if cell == dst:
            break
        for dx, dy, wt in NEIGHBOURS_8:
            nb = (cell[0] + dx, cell[1] + dy)
            if nb in done or not legal_move(passable, cell, nb):
                continue
            nd = d + wt
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                prev[nb] = cell
                heapq.heappush(pq, (nd, nb))
    if dst not in done:
        return ShortestPath(None, math.inf)
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    path.reverse()
    return ShortestPath(path, dist[dst])


def chamfer_distances(terrain, src):
    """Chamfer distance from ``src`` to every cell (inf where unreachable)."""
    passable = _passable(terrain)
    h, w = passable.shape
    out = np.full((h, w), math.inf)
    out[src[1], src[0]] = 0.0
    pq = [(0.0, (int(src[0]), int(src[1])))]
    while pq:
        d, cell = heapq.heappop(pq)
        if d > out[cell[1], cell[0]]:
            continue
        for dx, dy, wt in NEIGHBOURS_8:
            nb = (cell[0] + dx, cell[1] + dy)
            if legal_move(passable, cell, nb) and d + wt < out[nb[1], nb[0]]:
                out[nb[1], nb[0]] = d + wt
                heapq.heappush(pq, (d + wt, nb))
    return out


def exact_voronoi_label(seeds, terrain):
    """Nearest-seed label per passable cell centre (Euclidean).

    Cells whose two nearest seeds are equidistant within ``TIE_TOL`` get
    ``BOUNDARY``; obstacle cells get ``OBSTACLE``.
    """
    passable = _passable(terrain)
    h, w = passable.shape
    seeds = np.asarray(seeds, dtype=np.float64).reshape(-1, 2)
    if len(seeds) == 0:
        raise ConfigurationError("at least one seed is required")
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    d = np.stack([np.hypot(xx - sx, yy - sy) for sx, sy in seeds])
    labels = np.argmin(d, axis=0).astype(np.int32)
    if len(seeds) > 1:
        part = np.partition(d, 1, axis=0)
        labels[part[1] - part[0] <= TIE_TOL] = BOUNDARY
    labels[~passable] = OBSTACLE
    return labels


@dataclass
class SpanningTree:
    edges: list      # (i, j) index pairs with i < j
    length: float


def _check_distinct(pts):
    seen = set()
    for p in map(tuple, pts):
        if p in seen:
            raise DegenerateGeometryError(f"duplicate point {p}")
        seen.add(p)


def exact_mst(points):
    """Euclidean minimum spanning tree by Kruskal over the complete graph."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2:
        raise ConfigurationError("a spanning tree needs at least two points")
    _check_distinct(pts)
    n = len(pts)
    edges = sorted((math.dist(pts[i], pts[j]), i, j) for i in range(n) for j in range(i + 1, n))
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    chosen = []
    total = 0.0
    for d, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((i, j))
            total += d
            if len(chosen) == n - 1:
                break
    return SpanningTree(chosen, total)


def tree_length(points, edges):
    pts = np.asarray(points, dtype=np.float64)
    return float(sum(math.dist(pts[i], pts[j]) for i, j in edges))


def orientation(a, b, c):
    """Exact sign of the cross product (b - a) x (c - a)."""
    ax, ay = Fraction(a[0]), Fraction(a[1])
    v = (Fraction(b[0]) - ax) * (Fraction(c[1]) - ay) - (Fraction(b[1]) - ay) * (Fraction(c[0]) - ax)
    return (v > 0) - (v < 0)


def convex_hull(points):
    """Counterclockwise convex hull (monotone chain), collinear points dropped."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=np.float64).reshape(-1, 2).tolist())))
    if len(pts) < 3:
        raise DegenerateGeometryError("a hull needs at least three distinct points")

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and orientation(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateGeometryError("all points are collinear")
    return np.array(hull, dtype=np.float64)


def polygon_area(poly):
    """Signed shoelace area (positive for counterclockwise)."""
    p = np.asarray(poly, dtype=np.float64)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def is_convex(poly, tol=1e-9):
    """True if every turn has the same sign and the boundary winds once.

    Turns are compared as sines of the turn angle, so ``tol`` is angular.
    Zero turns (collinear vertices) are allowed.
    """
    p = np.asarray(poly, dtype=np.float64).reshape(-1, 2)
    if len(p) < 3:
        return False
    e = np.roll(p, -1, axis=0) - p
    n = np.hypot(e[:, 0], e[:, 1])
    if np.any(n == 0):
        return False
    u = e / n[:, None]
    nxt = np.roll(u, -1, axis=0)
    sines = u[:, 0] * nxt[:, 1] - u[:, 1] * nxt[:, 0]
    cosines = np.sum(u * nxt, axis=1)
    if np.all(sines >= -tol):
        sign = 1
    elif np.all(sines <= tol):
        sign = -1
    else:
        return False
    turning = float(np.sum(np.arctan2(sines, cosines)))
    return abs(turning - sign * 2 * math.pi) < 1e-6
