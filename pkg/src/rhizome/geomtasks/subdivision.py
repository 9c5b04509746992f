"""Convex subdivision of a polygon by roots grown from its indentations.

A root starts at every reflex vertex and grows along the bisector of the
interior angle, all at the same speed.  A root stops when it reaches the
polygon boundary or the body of a root that got there first.  When two or
more tips reach the same point at the same moment none of them has right of
way, so each turns left (counterclockwise) in steps of ``angular_resolution``
until it faces a free direction and carries on from there.

Geometry is exact: ray directions are fixed rationals (the float unit
bisector converted without rounding) and every intersection is computed with
Fractions, so ties and face extraction are deterministic.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from ..errors import ConfigurationError, DegenerateGeometryError

MAX_TURNS_PER_RAY = 8


@dataclass
class Region:
    polygon: np.ndarray   # counterclockwise vertices
    area: float
    swept: bool           # bounded by at least one root


@dataclass
class _Ray:
    origin: tuple
    direction: tuple
    t0: Fraction
    root: int             # index of the reflex vertex the root started from
    turns: int = 0
    end: Fraction = None  # stopping parameter along direction, None while growing


def _F(p):
    return (Fraction(p[0]), Fraction(p[1]))


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def _orient(a, b, c):
    v = _cross(_sub(b, a), _sub(c, a))
    return (v > 0) - (v < 0)


def _on_segment(p, a, b):
    return (_orient(a, b, p) == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _segments_intersect(a, b, c, d):
    o1, o2, o3, o4 = _orient(a, b, c), _orient(a, b, d), _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and _on_segment(c, a, b)) or (o2 == 0 and _on_segment(d, a, b))
            or (o3 == 0 and _on_segment(a, c, d)) or (o4 == 0 and _on_segment(b, c, d)))


def signed_area(poly):
    s = Fraction(0)
    n = len(poly)
    for i in range(n):
        s += _cross(poly[i], poly[(i + 1) % n])
    return s / 2


def check_simple(poly):
    n = len(poly)
    if n < 3:
        raise ConfigurationError("a polygon needs at least three vertices")
    if len(set(poly)) != n:
        raise ConfigurationError("polygon repeats a vertex")
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = poly[j], poly[(j + 1) % n]
            if _segments_intersect(a, b, c, d):
                raise ConfigurationError(f"polygon edges {i} and {j} intersect")
    area = signed_area(poly)
    if area == 0:
        raise ConfigurationError("polygon has zero area")
    if area < 0:
        raise ConfigurationError("polygon vertices must be counterclockwise")


def _unit_rational(vx, vy):
    n = math.hypot(vx, vy)
    return (Fraction(vx / n), Fraction(vy / n))


def reflex_vertices(poly):
    n = len(poly)
    return [i for i in range(n) if _orient(poly[i - 1], poly[i], poly[(i + 1) % n]) < 0]


def _bisector(poly, i):
    n = len(poly)
    v = poly[i]
    a = _sub(poly[i - 1], v)
    b = _sub(poly[(i + 1) % n], v)
    fa = (float(a[0]), float(a[1]))
    fb = (float(b[0]), float(b[1]))
    na, nb = math.hypot(*fa), math.hypot(*fb)
    dx = -(fa[0] / na + fb[0] / nb)
    dy = -(fa[1] / na + fb[1] / nb)
    return _unit_rational(dx, dy)


def _ray_segment_hit(o, d, a, b):
    """Parameter ``s > 0`` where the ray ``o + s d`` meets segment ``ab``."""
    e = _sub(b, a)
    den = _cross(d, e)
    if den == 0:
        return None
    w = _sub(a, o)
    s = _cross(w, e) / den
    u = _cross(w, d) / den
    if s > 0 and 0 <= u <= 1:
        return s
    return None


def _ray_ray(ri, rj):
    """Meeting of two rays' lines: ``(s_i, s_j)`` or None."""
    den = _cross(ri.direction, rj.direction)
    if den == 0:
        return None
    w = _sub(rj.origin, ri.origin)
    si = _cross(w, rj.direction) / den
    sj = _cross(w, ri.direction) / den
    return si, sj


def _collinear_head_on(ri, rj):
    """Both growing towards each other on one line: meeting parameter of ri.

    With ``d_j = -lam * d_i`` and ``D`` the offset of rj's origin along
    ``d_i``, equal arrival times give ``s = (D - lam * (t0_i - t0_j)) / (1 + lam)``.
    """
    di, dj = ri.direction, rj.direction
    if _cross(di, dj) != 0 or _dot(di, dj) >= 0:
        return None
    w = _sub(rj.origin, ri.origin)
    if _cross(w, di) != 0:
        return None
    n2 = _dot(di, di)
    D = _dot(w, di) / n2
    if D <= 0:
        return None
    lam = -_dot(dj, di) / n2
    s = (D - lam * (ri.t0 - rj.t0)) / (1 + lam)
    if s <= 0 or s >= D:
        return None
    return s


def _point(ray, s):
    return (ray.origin[0] + s * ray.direction[0], ray.origin[1] + s * ray.direction[1])


def _next_event(i, rays, edges):
    """Earliest stop for growing ray ``i``: ``(time, point, kind)``.

    ``kind`` is "boundary", "trail" (an existing body is in the way) or "tie"
    (another tip arrives at the same point at the same time).  A body or
    the boundary takes precedence over a tie at the same instant.
    """
    ri = rays[i]
    cands = []
    for a, b in edges:
        s = _ray_segment_hit(ri.origin, ri.direction, a, b)
        if s is not None:
            cands.append((ri.t0 + s, 0, s))
    for j, rj in enumerate(rays):
        if j == i:
            continue
        hit = _ray_ray(ri, rj)
        if hit is None:
            s = _collinear_head_on(ri, rj) if rj.end is None else None
            if s is not None:
                cands.append((ri.t0 + s, 1, s))
            continue
        si, sj = hit
        if si <= 0 or sj < 0:
            continue
        if rj.end is not None and sj > rj.end:
            continue
        ti = ri.t0 + si
        tj = rj.t0 + sj
        if tj < ti:
            cands.append((ti, 0, si))
        elif tj == ti and rj.end is None:
            cands.append((ti, 1, si))
    if not cands:
        return None
    t, tie, s = min(cands)
    return t, _point(ri, s), "tie" if tie else "stop"


def _is_free(p, d, rays, edges):
    """Direction ``d`` from ``p`` does not run straight along a body."""
    for a, b in edges:
        # leaving through the boundary at p itself
        if _on_segment(p, a, b):
            other = b if a == p else a
            if _cross(_sub(other, p), d) == 0 and _dot(_sub(other, p), d) > 0:
                return False
    for r in rays:
        end = r.end
        if end is None:
            continue
        q = _point(r, end)
        for tip, tail in ((q, r.origin), (r.origin, q)):
            if tip == p and _cross(_sub(tail, p), d) == 0 and _dot(_sub(tail, p), d) > 0:
                return False
    return True


def _rotate(d, angle):
    fx, fy = float(d[0]), float(d[1])
    c, s = math.cos(angle), math.sin(angle)
    return _unit_rational(c * fx - s * fy, s * fx + c * fy)


def _point_in_polygon(p, poly):
    """Strict interior test (boundary counts as outside)."""
    n = len(poly)
    inside = False
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        if _on_segment(p, a, b):
            return False
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x > p[0]:
                inside = not inside
    return inside


def grow_roots(poly, angular_resolution=math.pi / 36):
    """Run the growth and return the list of finished root segments."""
    n = len(poly)
    edges = [(poly[k], poly[(k + 1) % n]) for k in range(n)]
    rays = [_Ray(poly[i], _bisector(poly, i), Fraction(0), i) for i in reflex_vertices(poly)]
    steps_limit = 64 * (len(rays) + 1)
    for _ in range(steps_limit):
        growing = [i for i, r in enumerate(rays) if r.end is None]
        if not growing:
            break
        events = {i: _next_event(i, rays, edges) for i in growing}
        missing = [i for i, e in events.items() if e is None]
        if missing:
            raise DegenerateGeometryError(f"root {rays[missing[0]].root} never meets the boundary")
        t = min(e[0] for e in events.values())
        firing = {i: e for i, e in events.items() if e[0] == t}
        turned = []
        for i, (_, p, kind) in sorted(firing.items()):
            ri = rays[i]
            ri.end = t - ri.t0
            if kind == "tie":
                turned.append((i, p))
        for i, p in turned:
            ri = rays[i]
            if ri.turns >= MAX_TURNS_PER_RAY:
                continue
            d = ri.direction
            steps = int(round(2 * math.pi / angular_resolution))
            for k in range(1, steps):
                cand = _rotate(ri.direction, k * angular_resolution)
                probe = _point(_Ray(p, cand, t, -1), Fraction(1, 10**9))
                if not _point_in_polygon(probe, poly):
                    continue
                if _is_free(p, cand, rays, edges):
                    d = cand
                    break
            else:
                continue
            rays.append(_Ray(p, d, t, ri.root, ri.turns + 1))
    else:
        raise DegenerateGeometryError("root growth did not settle")
    return [(r.origin, _point(r, r.end)) for r in rays if r.end and r.end > 0]


def _split_segments(segs):
    """Split segments at every mutual intersection; returns unique pieces."""
    pieces = set()
    for k, (a, b) in enumerate(segs):
        cuts = {a, b}
        for m, (c, d) in enumerate(segs):
            if m == k:
                continue
            for p in (c, d):
                if _on_segment(p, a, b):
                    cuts.add(p)
            e1, e2 = _sub(b, a), _sub(d, c)
            den = _cross(e1, e2)
            if den != 0:
                w = _sub(c, a)
                s = _cross(w, e2) / den
                u = _cross(w, e1) / den
                if 0 <= s <= 1 and 0 <= u <= 1:
                    cuts.add((a[0] + s * e1[0], a[1] + s * e1[1]))
        e = _sub(b, a)
        order = sorted(cuts, key=lambda p: _dot(_sub(p, a), e))
        for p, q in zip(order, order[1:]):
            if p != q:
                pieces.add((p, q) if p < q else (q, p))
    return pieces


def _faces(pieces):
    out = {}
    for p, q in pieces:
        out.setdefault(p, []).append(q)
        out.setdefault(q, []).append(p)
    for p, nbrs in out.items():
        nbrs.sort(key=lambda q: math.atan2(float(q[1] - p[1]), float(q[0] - p[0])))
    used = set()
    faces = []
    for p, q in sorted(pieces):
        for start in ((p, q), (q, p)):
            if start in used:
                continue
            face = []
            he = start
            while he not in used:
                used.add(he)
                u, v = he
                face.append(u)
                nbrs = out[v]
                k = nbrs.index(u)
                # next edge clockwise from the reverse edge keeps the face on the left
                w = nbrs[(k - 1) % len(nbrs)]
                he = (v, w)
            faces.append(face)
    return faces


def _drop_collinear(face):
    changed = True
    pts = list(face)
    while changed and len(pts) > 3:
        changed = False
        for k in range(len(pts)):
            a, b, c = pts[k - 1], pts[k], pts[(k + 1) % len(pts)]
            if _orient(a, b, c) == 0 and _dot(_sub(b, a), _sub(c, b)) > 0:
                del pts[k]
                changed = True
                break
    return pts


def subdivide_polygon(polygon, angular_resolution=math.pi / 36):
    """Split a simple counterclockwise polygon into the faces the roots cut out."""
    if not angular_resolution > 0:
        raise ConfigurationError("angular_resolution must be positive")
    poly = [_F(p) for p in np.asarray(polygon, dtype=np.float64).reshape(-1, 2).tolist()]
    check_simple(poly)
    roots = grow_roots(poly, angular_resolution)
    n = len(poly)
    boundary = [(poly[k], poly[(k + 1) % n]) for k in range(n)]
    pieces = _split_segments(boundary + roots)
    regions = []
    for face in _faces(pieces):
        area = signed_area(face)
        if area <= 0:
            continue
        swept = any(
            any(_on_segment(face[k], a, b) and _on_segment(face[(k + 1) % len(face)], a, b)
                for a, b in roots)
            for k in range(len(face)))
        pts = _drop_collinear(face)
        regions.append(Region(np.array([[float(x), float(y)] for x, y in pts]), float(area), swept))
    regions.sort(key=lambda r: (-r.area, tuple(r.polygon[0])))
    return regions
