"""Scalar concentration fields over a terrain grid.

Grids are numpy arrays indexed ``[y, x]``.  Continuous positions are given in
cell units as ``(x, y)`` with cell ``(i, j)`` centred on the integer point
``(i, j)``; a position belongs to cell ``(floor(x + 0.5), floor(y + 0.5))``.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import kernels
from .errors import ConfigurationError, DomainError

MAX_STABLE_D = 0.25
# With decay the checkerboard mode is amplified by |1 - 8D - decay|, so at the
# bound D = 0.25 any decay > 0 keeps the iterate oscillating.  Relaxation to a
# steady state defaults to a D that stays contractive for decay up to 0.4.
RELAX_D = 0.2


@dataclass
class Terrain:
    """Rectangular grid with per-cell elevation and impassable obstacles."""

    width: int
    height: int
    elevation: np.ndarray = None
    obstacle: np.ndarray = None
    cell_size: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if int(self.width) != self.width or int(self.height) != self.height:
            raise ConfigurationError("terrain dimensions must be integers")
        self.width = int(self.width)
        self.height = int(self.height)
        if self.width <= 0 or self.height <= 0:
            raise ConfigurationError("terrain dimensions must be positive")
        if not self.cell_size > 0:
            raise ConfigurationError("cell_size must be positive")
        shape = (self.height, self.width)
        if self.elevation is None:
            self.elevation = np.zeros(shape)
        if self.obstacle is None:
            self.obstacle = np.zeros(shape, dtype=bool)
        self.elevation = np.array(self.elevation, dtype=np.float64)
        self.obstacle = np.array(self.obstacle, dtype=bool)
        if self.elevation.shape != shape or self.obstacle.shape != shape:
            raise ConfigurationError(
                f"grids must be {shape}, got elevation {self.elevation.shape} "
                f"and obstacle {self.obstacle.shape}")
        if not np.all(np.isfinite(self.elevation)):
            raise ConfigurationError("elevation must be finite everywhere")
        self.elevation.setflags(write=False)
        self.obstacle.setflags(write=False)

    @classmethod
    def open(cls, width, height, **kwargs):
        return cls(width, height, **kwargs)

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def passable(self):
        p = self._cache.get("passable")
        if p is None:
            p = ~self.obstacle
            p.setflags(write=False)
            self._cache["passable"] = p
        return p

    def in_domain(self, pos):
        x, y = pos
        return -0.5 <= x < self.width - 0.5 and -0.5 <= y < self.height - 0.5

    def in_bounds(self, cell):
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_passable(self, cell):
        return self.in_bounds(cell) and not self.obstacle[cell[1], cell[0]]

    def elevation_gradients(self):
        g = self._cache.get("elevation_grad")
        if g is None:
            g = cell_gradients(self.elevation, self.passable)
            self._cache["elevation_grad"] = g
        return g


def cell_of(pos):
    """Grid cell ``(ix, iy)`` containing the continuous point ``pos``."""
    return (int(math.floor(pos[0] + 0.5)), int(math.floor(pos[1] + 0.5)))


@dataclass
class ScalarField:
    """Non-negative concentration grid plus the parameters that evolve it.

    ``sources`` holds ``((ix, iy), rate)`` pairs.  ``converged`` and
    ``iterations`` are filled in by :func:`build_field`.
    """

    concentration: np.ndarray
    D: float = MAX_STABLE_D
    decay: float = 0.0
    sources: tuple = ()
    converged: bool = True
    iterations: int = 0
    _grad: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.concentration = np.array(self.concentration, dtype=np.float64)
        self.concentration.setflags(write=False)
        self.sources = tuple(((int(c[0]), int(c[1])), float(r)) for c, r in self.sources)
        _check_params(self.D, self.decay, self.sources)

    @classmethod
    def zeros(cls, terrain, **kwargs):
        return cls(np.zeros(terrain.shape), **kwargs)

    @property
    def total_mass(self):
        return float(self.concentration.sum())

    def gradients(self, terrain):
        if self._grad is None:
            self._grad = cell_gradients(self.concentration, terrain.passable)
        return self._grad

    def value_at(self, pos, terrain):
        """Bilinear concentration at ``pos`` blended over passable cells."""
        return _blend(pos, terrain, (self.concentration,))[0]


def _check_params(D, decay, sources):
    if not 0.0 <= D <= MAX_STABLE_D:
        raise ConfigurationError(
            f"diffusion coefficient {D} outside the stable range [0, {MAX_STABLE_D}]")
    if decay < 0.0:
        raise ConfigurationError("decay must be non-negative")
    for cell, rate in sources:
        if rate < 0.0:
            raise ConfigurationError(f"negative emission {rate} at {cell}")


def _apply_sources(c, sources, terrain):
    for (ix, iy), rate in sources:
        if not terrain.in_bounds((ix, iy)):
            raise ConfigurationError(f"source {(ix, iy)} outside the terrain")
        if terrain.obstacle[iy, ix]:
            raise ConfigurationError(f"source {(ix, iy)} lies in an obstacle")
        c[iy, ix] += rate
    return c


def diffuse_step(fld, terrain):
    """Advance ``fld`` by one synchronous explicit diffusion/decay step.

    Uses the 5-point stencil ``c + D*(sum(nbrs) - deg*c) - decay*c`` over
    passable neighbours only (no-flux at obstacles and at the domain edge),
    clamps at zero, then adds each source's emission.
    """
    if fld.concentration.shape != terrain.shape:
        raise ConfigurationError("field and terrain shapes differ")
    c = kernels.diffuse(fld.concentration, terrain.passable, fld.D, fld.decay)
    c = _apply_sources(c, fld.sources, terrain)
    return replace(fld, concentration=c, _grad=None)


def build_field(sources, terrain, D=RELAX_D, decay=0.05, tol=1e-6, max_iter=None):
    """Iterate diffusion from zero until quasi-steady.

    ``sources`` is an iterable of cells or ``(cell, rate)`` pairs (bare cells
    emit at rate 1).  The field counts as converged once the max-norm change
    drops below ``tol`` and the support stopped growing, so a front still
    spreading into unreached cells is never mistaken for a steady state.
    ``max_iter`` defaults to ``50 * (width + height)``.  Choose
    ``8*D + decay < 2``; otherwise the clamped iterate oscillates and the
    cap is reached.  When the cap is hit
    the last iterate is returned with ``converged=False``.
    """
    srcs = []
    for s in sources:
        if len(s) == 2 and not np.isscalar(s[0]):
            srcs.append((tuple(s[0]), float(s[1])))
        else:
            srcs.append((tuple(s), 1.0))
    if max_iter is None:
        max_iter = 50 * (terrain.width + terrain.height)
    fld = ScalarField(np.zeros(terrain.shape), D=D, decay=decay, sources=srcs)
    _apply_sources(np.zeros(terrain.shape), fld.sources, terrain)  # validate early
    if not srcs:
        return replace(fld, converged=True, iterations=0)

    c = fld.concentration
    support = 0
    for it in range(1, max_iter + 1):
        nxt = kernels.diffuse(c, terrain.passable, D, decay)
        nxt = _apply_sources(nxt, fld.sources, terrain)
        change = float(np.max(np.abs(nxt - c)))
        new_support = int(np.count_nonzero(nxt))
        c = nxt
        if change < tol and new_support == support:
            return replace(fld, concentration=c, converged=True, iterations=it)
        support = new_support
    return replace(fld, concentration=c, converged=False, iterations=max_iter)


def cell_gradients(values, passable):
    """Per-cell finite-difference gradient ``(gx, gy)``.

    Central differences where both neighbours along an axis are passable,
    one-sided next to an obstacle or the domain edge, zero if boxed in.
    """
    v = np.asarray(values, dtype=np.float64)
    p = np.asarray(passable, dtype=bool)

    def axis_grad(v, p):
        h, w = v.shape
        g = np.zeros((h, w))
        if w < 2:
            return g
        left_ok = np.zeros((h, w), dtype=bool)
        left_ok[:, 1:] = p[:, :-1]
        right_ok = np.zeros((h, w), dtype=bool)
        right_ok[:, :-1] = p[:, 1:]
        left = np.zeros((h, w))
        left[:, 1:] = v[:, :-1]
        right = np.zeros((h, w))
        right[:, :-1] = v[:, 1:]
        both = left_ok & right_ok
        g = np.where(both, (right - left) / 2.0, g)
        g = np.where(right_ok & ~left_ok, right - v, g)
        g = np.where(left_ok & ~right_ok, v - left, g)
        return np.where(p, g, 0.0)

    gx = axis_grad(v, p)
    gy = axis_grad(v.T, p.T).T
    gx.setflags(write=False)
    gy.setflags(write=False)
    return gx, gy


def _blend(pos, terrain, arrays):
    """Bilinear blend of ``arrays`` at ``pos`` over passable corner cells."""
    x, y = float(pos[0]), float(pos[1])
    w, h = terrain.width, terrain.height
    px = min(max(x, 0.0), w - 1.0)
    py = min(max(y, 0.0), h - 1.0)
    x0 = min(int(math.floor(px)), max(w - 2, 0))
    y0 = min(int(math.floor(py)), max(h - 2, 0))
    fx = px - x0
    fy = py - y0
    obstacle = terrain.obstacle
    acc = [0.0] * len(arrays)
    total = 0.0
    for cx, cy, wt in ((x0, y0, (1 - fx) * (1 - fy)), (x0 + 1, y0, fx * (1 - fy)),
                       (x0, y0 + 1, (1 - fx) * fy), (x0 + 1, y0 + 1, fx * fy)):
        if wt <= 0.0 or cx >= w or cy >= h or obstacle[cy, cx]:
            continue
        total += wt
        for k, a in enumerate(arrays):
            acc[k] += wt * a[cy, cx]
    if total <= 0.0:
        ix, iy = cell_of((x, y))
        return [float(a[iy, ix]) for a in arrays]
    return [a / total for a in acc]


def check_position(pos, terrain):
    if not terrain.in_domain(pos):
        raise DomainError(f"position {tuple(pos)} outside the domain")
    ix, iy = cell_of(pos)
    if terrain.obstacle[iy, ix]:
        raise DomainError(f"position {tuple(pos)} lies in an obstacle")


def gradient_at(fld, pos, terrain):
    """Concentration gradient at a continuous position.

    Cell-centre finite differences (one-sided beside obstacles) blended
    bilinearly over the passable cells surrounding ``pos``; exact for fields
    that are linear or quadratic in the interior.
    """
    check_position(pos, terrain)
    gx, gy = fld.gradients(terrain)
    return np.array(_blend(pos, terrain, (gx, gy)))


def elevation_gradient_at(terrain, pos):
    gx, gy = terrain.elevation_gradients()
    return np.array(_blend(pos, terrain, (gx, gy)))
