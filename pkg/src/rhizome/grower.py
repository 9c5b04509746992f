"""Root-apex agents moving over a terrain.

Each active apex picks a new heading from a weighted sum of unit vectors
(inertia, attractant gradient, downhill, neighbour alignment, noise), then
tries to advance ``speed`` cells along it.  A move that would cross into a
blocked cell is cancelled and the heading is mirrored off the face it hit.
"""

import csv
from dataclasses import dataclass, field
import io
import math

import numpy as np

from .errors import ConfigurationError
from .field import build_field, cell_of, elevation_gradient_at, gradient_at

RNG_ALGORITHM = "PCG64"

ACTIVE = "active"
STOPPED = "stopped"
EXITED = "exited"


def make_rng(seed):
    """Seeded generator; ``seed`` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


def _unit(v):
    n = math.hypot(v[0], v[1])
    if n == 0.0 or not math.isfinite(n):
        return None
    return (v[0] / n, v[1] / n)


@dataclass
class Apex:
    pos: tuple
    heading: tuple
    speed: float = 1.0
    state: str = ACTIVE
    root_id: int = 0
    parent_id: int = None
    trail: list = field(default_factory=list)
    attach_index: int = None  # vertex of the parent trail this root grew from
    blocked: int = 0

    def __post_init__(self):
        self.pos = (float(self.pos[0]), float(self.pos[1]))
        h = _unit(self.heading)
        if h is None:
            raise ConfigurationError("apex heading must be non-zero")
        self.heading = h
        if not self.speed > 0:
            raise ConfigurationError("apex speed must be positive")
        if not self.trail:
            self.trail = [self.pos]

    @property
    def active(self):
        return self.state == ACTIVE


@dataclass
class GrowthParams:
    w_inertia: float = 1.0
    w_gradient: float = 1.0
    w_downhill: float = 0.0
    w_noise: float = 0.0
    w_align: float = 0.0
    branch_rate: float = 0.0
    branch_angle: float = math.pi / 4
    elevation_limit: float = math.inf
    align_radius: float = 3.0
    rng_seed: int = 0
    speed: float = 1.0
    min_width: int = 0
    stall_limit: int = 16

    def __post_init__(self):
        weights = (self.w_inertia, self.w_gradient, self.w_downhill, self.w_noise, self.w_align)
        if any(w < 0 for w in weights):
            raise ConfigurationError("growth weights must be non-negative")
        if not any(w > 0 for w in weights):
            raise ConfigurationError("at least one growth weight must be positive")
        if self.branch_rate < 0:
            raise ConfigurationError("branch_rate must be non-negative")
        if not self.speed > 0:
            raise ConfigurationError("speed must be positive")
        if self.align_radius < 0:
            raise ConfigurationError("align_radius must be non-negative")
        if self.stall_limit < 1:
            raise ConfigurationError("stall_limit must be at least 1")

    def config(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["rng_algorithm"] = RNG_ALGORITHM
        return d


@dataclass
class Fields:
    """Attractant and repellent fields steering the apexes (either may be None)."""

    attract: object = None
    repel: object = None


def narrow_mask(terrain, min_width):
    """Passable cells whose horizontal or vertical free run is below ``min_width``."""
    if min_width <= 1:
        return np.zeros(terrain.shape, dtype=bool)
    key = ("narrow", int(min_width))
    m = terrain._cache.get(key)
    if m is not None:
        return m

    def runs(p):
        out = np.zeros(p.shape, dtype=np.int64)
        for r, row in enumerate(p):
            x = 0
            n = len(row)
            while x < n:
                if not row[x]:
                    x += 1
                    continue
                end = x
                while end < n and row[end]:
                    end += 1
                out[r, x:end] = end - x
                x = end
        return out

    p = terrain.passable
    width = np.minimum(runs(p), runs(p.T).T)
    m = p & (width < min_width)
    m.setflags(write=False)
    terrain._cache[key] = m
    return m


class _Blocker:
    """Decides which cells an apex may enter."""

    def __init__(self, terrain, params):
        self.terrain = terrain
        self.limit = params.elevation_limit
        self.narrow = narrow_mask(terrain, params.min_width)

    def blocked(self, cell):
        ix, iy = cell
        t = self.terrain
        if not t.in_bounds(cell):
            return True
        if t.obstacle[iy, ix] or self.narrow[iy, ix]:
            return True
        return t.elevation[iy, ix] > self.limit


def trace_move(pos, delta, blocker):
    """Walk the cells crossed by ``pos -> pos + delta``.

    Returns ``None`` if the move is free, otherwise ``(flip_x, flip_y)`` naming
    the velocity components to mirror at the first blocked crossing.
    """
    x, y = pos
    dx, dy = delta
    ix, iy = cell_of(pos)
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    if dx != 0:
        tx = ((ix + 0.5 * sx) - x) / dx
        tdx = 1.0 / abs(dx)
    else:
        tx = tdx = math.inf
    if dy != 0:
        ty = ((iy + 0.5 * sy) - y) / dy
        tdy = 1.0 / abs(dy)
    else:
        ty = tdy = math.inf
    while True:
        t = min(tx, ty)
        if t > 1.0:
            return None
        if abs(tx - ty) <= 1e-12:
            side_x = blocker.blocked((ix + sx, iy))
            side_y = blocker.blocked((ix, iy + sy))
            diag = blocker.blocked((ix + sx, iy + sy))
            if side_x or side_y or diag:
                if side_x and not side_y:
                    return (True, False)
                if side_y and not side_x:
                    return (False, True)
                return (True, True)
            ix += sx
            iy += sy
            tx += tdx
            ty += tdy
        elif tx < ty:
            if blocker.blocked((ix + sx, iy)):
                return (True, False)
            ix += sx
            tx += tdx
        else:
            if blocker.blocked((ix, iy + sy)):
                return (False, True)
            iy += sy
            ty += tdy


def _neighbour_heading(apex, snapshot, radius):
    sx = sy = 0.0
    n = 0
    for other_id, pos, heading in snapshot:
        if other_id == apex.root_id:
            continue
        if math.hypot(pos[0] - apex.pos[0], pos[1] - apex.pos[1]) <= radius:
            sx += heading[0]
            sy += heading[1]
            n += 1
    if n == 0:
        return None
    return _unit((sx / n, sy / n))


def _steering(apex, fields, terrain):
    g = np.zeros(2)
    if fields is not None:
        if fields.attract is not None:
            g = g + gradient_at(fields.attract, apex.pos, terrain)
        if fields.repel is not None:
            g = g - gradient_at(fields.repel, apex.pos, terrain)
    return _unit(g)


def propose_heading(apex, fields, terrain, params, rng, snapshot=()):
    terms = [(params.w_inertia, apex.heading)]
    if params.w_gradient > 0:
        terms.append((params.w_gradient, _steering(apex, fields, terrain)))
    if params.w_downhill > 0:
        e = elevation_gradient_at(terrain, apex.pos)
        terms.append((params.w_downhill, _unit((-e[0], -e[1]))))
    if params.w_align > 0:
        terms.append((params.w_align, _neighbour_heading(apex, snapshot, params.align_radius)))
    if params.w_noise > 0:
        a = rng.uniform(0.0, 2.0 * math.pi)
        terms.append((params.w_noise, (math.cos(a), math.sin(a))))
    vx = vy = 0.0
    for w, v in terms:
        if w > 0 and v is not None:
            vx += w * v[0]
            vy += w * v[1]
    h = _unit((vx, vy))
    return apex.heading if h is None else h


def check_apex(apex, terrain, params=None):
    if not terrain.in_domain(apex.pos) or not terrain.is_passable(cell_of(apex.pos)):
        raise ConfigurationError(f"apex {apex.root_id} starts outside the passable domain")
    if params is not None and terrain.elevation[cell_of(apex.pos)[1], cell_of(apex.pos)[0]] > params.elevation_limit:
        raise ConfigurationError(f"apex {apex.root_id} starts above the elevation limit")


def grow_step(apexes, fields, terrain, params, rng, exits=None, next_id=None):
    """Advance every active apex by one step, in place.

    New branches are appended to ``apexes`` and first move on the next step.
    Returns the list for convenience.
    """
    blocker = _Blocker(terrain, params)
    snapshot = ()
    if params.w_align > 0:
        snapshot = [(a.root_id, a.pos, a.heading) for a in apexes if a.active]
    if next_id is None:
        next_id = max((a.root_id for a in apexes), default=-1) + 1
    born = []
    for apex in list(apexes):
        if not apex.active:
            continue
        heading = propose_heading(apex, fields, terrain, params, rng, snapshot)
        delta = (apex.speed * heading[0], apex.speed * heading[1])
        hit = trace_move(apex.pos, delta, blocker)
        if hit is None:
            apex.pos = (apex.pos[0] + delta[0], apex.pos[1] + delta[1])
            apex.heading = heading
            apex.trail.append(apex.pos)
            apex.blocked = 0
            if exits and cell_of(apex.pos) in exits:
                apex.state = EXITED
        else:
            fx, fy = hit
            apex.heading = (-heading[0] if fx else heading[0], -heading[1] if fy else heading[1])
            apex.blocked += 1
            if apex.blocked >= params.stall_limit:
                apex.state = STOPPED
        if apex.active and params.branch_rate > 0:
            if rng.random() < min(1.0, params.branch_rate * apex.speed):
                sign = 1.0 if rng.random() < 0.5 else -1.0
                a = sign * params.branch_angle
                c, s = math.cos(a), math.sin(a)
                h = apex.heading
                born.append(Apex(apex.pos, (c * h[0] - s * h[1], s * h[0] + c * h[1]),
                                 speed=apex.speed, root_id=next_id, parent_id=apex.root_id,
                                 attach_index=len(apex.trail) - 1))
                next_id += 1
    apexes.extend(born)
    return apexes


@dataclass
class RootNetwork:
    trails: list
    root_ids: list
    parent_ids: list
    attach_index: list
    states: list

    @classmethod
    def from_apexes(cls, apexes):
        apexes = sorted(apexes, key=lambda a: a.root_id)
        return cls([np.array(a.trail, dtype=np.float64).reshape(-1, 2) for a in apexes],
                   [a.root_id for a in apexes], [a.parent_id for a in apexes],
                   [a.attach_index for a in apexes], [a.state for a in apexes])

    @property
    def terminal(self):
        """Per trail: True if the apex stopped or exited before the budget ran out."""
        return [s != ACTIVE for s in self.states]

    def children(self, root_id):
        return [r for r, p in zip(self.root_ids, self.parent_ids) if p == root_id]

    def is_forest(self):
        parent = dict(zip(self.root_ids, self.parent_ids))
        for r in self.root_ids:
            seen = set()
            while r is not None:
                if r in seen or r not in parent:
                    return False
                seen.add(r)
                r = parent[r]
        return True

    def total_length(self):
        return float(sum(np.sum(np.hypot(*np.diff(t, axis=0).T)) for t in self.trails if len(t) > 1))

    def vertices(self):
        return np.concatenate(self.trails) if self.trails else np.zeros((0, 2))

    def to_csv(self):
        out = io.StringIO()
        out.write("root_id,parent_id,vertex_index,x,y\n")
        for rid, pid, trail in zip(self.root_ids, self.parent_ids, self.trails):
            p = "" if pid is None else str(pid)
            for k, (x, y) in enumerate(trail):
                out.write(f"{rid},{p},{k},{float(x)!r},{float(y)!r}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text):
        """Inverse of :meth:`to_csv`; states are not stored and read back as stopped."""
        rows = {}
        parents = {}
        for row in csv.DictReader(io.StringIO(text)):
            try:
                rid = int(row["root_id"])
                k = int(row["vertex_index"])
                xy = (float(row["x"]), float(row["y"]))
            except (KeyError, TypeError, ValueError):
                raise ConfigurationError(f"bad network row {row!r}") from None
            parents[rid] = int(row["parent_id"]) if row["parent_id"] else None
            rows.setdefault(rid, []).append((k, xy))
        ids = sorted(rows)
        trails = []
        for rid in ids:
            pts = [xy for _k, xy in sorted(rows[rid])]
            trails.append(np.array(pts, dtype=np.float64).reshape(-1, 2))
        return cls(trails, ids, [parents[r] for r in ids], [None] * len(ids),
                   [STOPPED] * len(ids))


@dataclass
class Scenario:
    """Everything a growth run needs.

    ``seeds`` holds ``(position, heading)`` pairs; ``attract``/``repel`` hold
    field sources in the form accepted by :func:`build_field`.
    """

    terrain: object
    seeds: list
    params: GrowthParams = field(default_factory=GrowthParams)
    steps: int = 500
    attract: list = field(default_factory=list)
    repel: list = field(default_factory=list)
    exits: list = field(default_factory=list)
    diffusion: float = 0.2
    decay: float = 0.05


def scenario_fields(sc):
    attract = build_field(sc.attract, sc.terrain, D=sc.diffusion, decay=sc.decay) if sc.attract else None
    repel = build_field(sc.repel, sc.terrain, D=sc.diffusion, decay=sc.decay) if sc.repel else None
    return Fields(attract, repel)


def run_growth(sc, fields=None):
    if sc.steps < 1:
        raise ConfigurationError("step budget must be at least 1")
    if fields is None:
        fields = scenario_fields(sc)
    apexes = []
    for k, (pos, heading) in enumerate(sc.seeds):
        a = Apex(pos, heading, speed=sc.params.speed, root_id=k)
        check_apex(a, sc.terrain, sc.params)
        apexes.append(a)
    rng = make_rng(sc.params.rng_seed)
    exits = {tuple(int(v) for v in e) for e in sc.exits}
    for _ in range(sc.steps):
        if not any(a.active for a in apexes):
            break
        grow_step(apexes, fields, sc.terrain, sc.params, rng, exits)
    return RootNetwork.from_apexes(apexes)
