"""Voronoi cells as the regions grown fronts claim before they collide."""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ConfigurationError, DomainError
from ..field import cell_of
from ..metric import NEIGHBOURS_8, legal_move
from ..kernels import BOUNDARY, OBSTACLE, UNCLAIMED


@dataclass
class Labeling:
    """Per-cell seed index, or BOUNDARY / UNCLAIMED / OBSTACLE.

    ``step`` records when each cell was settled (-1 if never).
    """

    labels: np.ndarray
    step: np.ndarray
    seeds: np.ndarray

    @property
    def claimed(self):
        return self.labels >= 0

    @property
    def boundary(self):
        return self.labels == BOUNDARY

    @property
    def unclaimed(self):
        return self.labels == UNCLAIMED

    def counts(self):
        return np.bincount(self.labels[self.claimed], minlength=len(self.seeds))


def seed_cells(seeds, terrain):
    pts = np.asarray(seeds, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise ConfigurationError("at least one seed is required")
    cells = []
    for p in pts:
        if not terrain.in_domain(p):
            raise DomainError(f"seed {tuple(p)} outside the domain")
        c = cell_of(p)
        if terrain.obstacle[c[1], c[0]]:
            raise ConfigurationError(f"seed {tuple(p)} lies in an obstacle")
        cells.append(c)
    if len(set(cells)) != len(cells):
        raise ConfigurationError("two seeds share a grid cell")
    return np.array(cells, dtype=np.int64)


def approximate_voronoi(seeds, terrain, max_steps=None):
    """Grow one front per seed in lock-step and keep whatever each claims.

    Fronts advance one chamfer unit per step.  Cells reached by two fronts in
    the same step become boundary; cells walled off from every seed stay
    unclaimed.  ``max_steps`` stops the growth early.

    A pocket that can only be entered through a boundary cell is as far from
    one colliding seed as from the other, so once growth has finished such
    pockets are marked boundary too.
    """
    cells = seed_cells(seeds, terrain)
    labels, _dist, step = kernels.front_propagate(
        terrain.passable, cells, np.arange(len(cells)),
        -1 if max_steps is None else int(max_steps))
    if max_steps is None:
        _fill_behind_collisions(labels, step, terrain.passable)
    return Labeling(labels, step, cells)


def _fill_behind_collisions(labels, step, passable):
    queue = deque((int(x), int(y)) for y, x in np.argwhere(labels == BOUNDARY))
    while queue:
        a = queue.popleft()
        for dx, dy, _w in NEIGHBOURS_8:
            b = (a[0] + dx, a[1] + dy)
            if legal_move(passable, a, b) and labels[b[1], b[0]] == UNCLAIMED:
                labels[b[1], b[0]] = BOUNDARY
                step[b[1], b[0]] = step[a[1], a[0]] + 1
                queue.append(b)


def agreement(labeling, reference):
    """Fraction of claimed cells whose label matches ``reference``."""
    mask = labeling.claimed
    n = int(mask.sum())
    if n == 0:
        return 0.0
    return float(np.count_nonzero(labeling.labels[mask] == reference[mask])) / n


def is_complete(labeling):
    """Every cell is claimed, boundary or obstacle."""
    lab = labeling.labels
    return bool(np.all((lab >= 0) | (lab == BOUNDARY) | (lab == OBSTACLE)))
