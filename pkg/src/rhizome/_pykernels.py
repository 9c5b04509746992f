"""Pure-Python/numpy implementations of the hot grid kernels.

These mirror ``_ckernels.pyx`` operation for operation so both backends give
bit-identical results.
"""

import heapq
import math

import numpy as np

UNCLAIMED = -1
BOUNDARY = -2
OBSTACLE = -3

_MOVES = (
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, math.sqrt(2.0)),
    (-1, 1, math.sqrt(2.0)),
    (1, -1, math.sqrt(2.0)),
    (-1, -1, math.sqrt(2.0)),
)


def diffuse(c, passable, D, decay):
    """One explicit 5-point diffusion/decay update with no-flux walls.

    Sources are not applied here.  Results below zero are clamped to zero.
    """
    c = np.asarray(c, dtype=np.float64)
    p = np.asarray(passable, dtype=bool)
    h, w = c.shape
    s = np.zeros((h, w))
    deg = np.zeros((h, w))
    # neighbour order: up, down, left, right (matches the C loop)
    up = np.zeros((h, w), dtype=bool)
    up[1:, :] = p[:-1, :]
    down = np.zeros((h, w), dtype=bool)
    down[:-1, :] = p[1:, :]
    left = np.zeros((h, w), dtype=bool)
    left[:, 1:] = p[:, :-1]
    right = np.zeros((h, w), dtype=bool)
    right[:, :-1] = p[:, 1:]

    shifted = np.zeros((h, w))
    shifted[1:, :] = c[:-1, :]
    s += np.where(up, shifted, 0.0)
    shifted = np.zeros((h, w))
    shifted[:-1, :] = c[1:, :]
    s += np.where(down, shifted, 0.0)
    shifted = np.zeros((h, w))
    shifted[:, 1:] = c[:, :-1]
    s += np.where(left, shifted, 0.0)
    shifted = np.zeros((h, w))
    shifted[:, :-1] = c[:, 1:]
    s += np.where(right, shifted, 0.0)
    deg = up.astype(np.float64) + down + left + right

    v = c + D * (s - deg * c) - decay * c
    out = np.where(v > 0.0, v, 0.0)
    out[~p] = 0.0
    return out


# worst-case ratio of an octile path to the straight line it follows
OCTILE_STRETCH = math.sqrt(4.0 - 2.0 * math.sqrt(2.0))


def _step_of(d):
    return int(math.ceil(d - 1e-9))


def front_propagate(passable, seed_xy, seed_labels, max_step=-1):
    """Synchronous multi-source front propagation on the 8-neighbour grid.

    Fronts move between 8-adjacent cells (no corner cutting).  A cell's
    distance is the larger of two lower bounds on its geodesic distance to
    the seed that reached it: the straight line to the seed, and the octile
    path length divided by its worst-case stretch.  The first is exact on
    open ground; the second takes over once a front has bent round
    obstacles.  Distances never decrease along a front.

    Each front advances one distance unit per step.  A cell reached within a
    step by exactly one front is claimed by it; a cell reached by two or more
    distinct fronts in the same step becomes boundary.  Boundary and claimed
    cells never change afterwards and boundary cells do not propagate.

    Returns ``(labels, dist, step)`` grids; ``labels`` uses UNCLAIMED,
    BOUNDARY and OBSTACLE for non-claimed cells.
    """
    p = np.asarray(passable, dtype=bool)
    h, w = p.shape
    labels = np.full((h, w), UNCLAIMED, dtype=np.int32)
    labels[~p] = OBSTACLE
    dist = np.full((h, w), np.inf)
    step = np.full((h, w), -1, dtype=np.int32)

    flat_p = p.ravel().tolist()
    flat_lab = labels.ravel().tolist()
    flat_dist = dist.ravel().tolist()
    flat_step = step.ravel().tolist()
    flat_path = [0.0] * (h * w)
    flat_src = [0] * (h * w)
    batch_src = {}
    batch_multi = set()

    seeds = np.asarray(seed_xy, dtype=np.int64).reshape(-1, 2).tolist()
    slabs = np.asarray(seed_labels, dtype=np.int64).reshape(-1).tolist()
    heap = [(0.0, y * w + x, i, 0.0) for i, (x, y) in enumerate(seeds)]
    heapq.heapify(heap)

    while heap:
        k = _step_of(heap[0][0])
        if max_step >= 0 and k > max_step:
            break
        touched = []
        batch_dist = {}
        batch_path = {}
        while heap and _step_of(heap[0][0]) == k:
            d, idx, src, path = heapq.heappop(heap)
            if flat_lab[idx] != UNCLAIMED:
                continue
            # heap order makes the first arrival the nearest one
            if idx not in batch_src:
                batch_src[idx] = src
                batch_dist[idx] = d
                batch_path[idx] = path
                touched.append(idx)
            elif slabs[batch_src[idx]] != slabs[src]:
                batch_multi.add(idx)
        for idx in touched:
            flat_step[idx] = k
            flat_dist[idx] = batch_dist[idx]
            flat_path[idx] = batch_path[idx]
            flat_src[idx] = batch_src[idx]
            flat_lab[idx] = BOUNDARY if idx in batch_multi else slabs[batch_src[idx]]
        for idx in touched:
            if flat_lab[idx] < 0:
                continue
            y, x = divmod(idx, w)
            d0 = flat_dist[idx]
            p0 = flat_path[idx]
            src = flat_src[idx]
            sx, sy = seeds[src]
            for dx, dy, wt in _MOVES:
                nx, ny = x + dx, y + dy
                if nx < 0 or nx >= w or ny < 0 or ny >= h:
                    continue
                nidx = ny * w + nx
                if not flat_p[nidx] or flat_lab[nidx] != UNCLAIMED:
                    continue
                if dx and dy and not (flat_p[y * w + nx] and flat_p[ny * w + x]):
                    continue
                path = p0 + wt
                d = math.sqrt(float((nx - sx) * (nx - sx) + (ny - sy) * (ny - sy)))
                bent = path / OCTILE_STRETCH
                if bent > d:
                    d = bent
                if d0 > d:
                    d = d0
                heapq.heappush(heap, (d, nidx, src, path))
        batch_src.clear()
        batch_multi.clear()

    labels = np.array(flat_lab, dtype=np.int32).reshape(h, w)
    dist = np.array(flat_dist, dtype=np.float64).reshape(h, w)
    step = np.array(flat_step, dtype=np.int32).reshape(h, w)
    return labels, dist, step
