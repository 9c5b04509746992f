# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, sqrt, INFINITY
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair
from libcpp.vector cimport vector

cnp.import_array()

cdef int UNCLAIMED = -1
cdef int BOUNDARY = -2
cdef int OBSTACLE = -3


def diffuse(c, passable, double D, double decay):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] pp = np.ascontiguousarray(passable, dtype=np.uint8)
    cdef Py_ssize_t h = cc.shape[0], w = cc.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((h, w), dtype=np.float64)
    cdef Py_ssize_t x, y
    cdef double s, deg, v, c0
    for y in range(h):
        for x in range(w):
            if not pp[y, x]:
                continue
            c0 = cc[y, x]
            s = 0.0
            deg = 0.0
            if y > 0 and pp[y - 1, x]:
                s = s + cc[y - 1, x]
                deg = deg + 1.0
            if y < h - 1 and pp[y + 1, x]:
                s = s + cc[y + 1, x]
                deg = deg + 1.0
            if x > 0 and pp[y, x - 1]:
                s = s + cc[y, x - 1]
                deg = deg + 1.0
            if x < w - 1 and pp[y, x + 1]:
                s = s + cc[y, x + 1]
                deg = deg + 1.0
            v = c0 + D * (s - deg * c0) - decay * c0
            out[y, x] = v if v > 0.0 else 0.0
    return out


cdef inline long _step_of(double d):
    return <long>ceil(d - 1e-9)


ctypedef pair[long, double] SrcPath
ctypedef pair[long, SrcPath] IdxSrc
ctypedef pair[double, IdxSrc] Entry


def front_propagate(passable, seed_xy, seed_labels, long max_step=-1):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] pp = np.ascontiguousarray(passable, dtype=np.uint8)
    cdef Py_ssize_t h = pp.shape[0], w = pp.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] labels = np.full((h, w), UNCLAIMED, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dist = np.full((h, w), np.inf, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] step = np.full((h, w), -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] seeds = np.ascontiguousarray(seed_xy, dtype=np.int64).reshape(-1, 2)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] slabs = np.ascontiguousarray(seed_labels, dtype=np.int64).reshape(-1)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] bsrc = np.full((h, w), -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] bmulti = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bdist = np.zeros((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bpath = np.zeros((h, w), dtype=np.float64)

    # max-heap of negated keys pops in the same (d, idx, src, path) order as heapq
    cdef priority_queue[Entry] heap
    cdef vector[long] touched
    cdef Py_ssize_t i, n = seeds.shape[0], j
    cdef long idx, nidx, src, k, x, y, nx, ny, dx, dy, sx, sy
    cdef double d, d0, p0, path, bent
    cdef int[8] mdx = [1, -1, 0, 0, 1, -1, 1, -1]
    cdef int[8] mdy = [0, 0, 1, -1, 1, 1, -1, -1]
    cdef double r2 = sqrt(2.0)
    cdef double stretch = sqrt(4.0 - 2.0 * sqrt(2.0))
    cdef double[8] mw = [1.0, 1.0, 1.0, 1.0, r2, r2, r2, r2]
    cdef Entry top

    for y in range(h):
        for x in range(w):
            if not pp[y, x]:
                labels[y, x] = OBSTACLE
    for i in range(n):
        heap.push(Entry(-0.0, IdxSrc(-(seeds[i, 1] * w + seeds[i, 0]), SrcPath(-i, -0.0))))

    while not heap.empty():
        k = _step_of(-heap.top().first)
        if max_step >= 0 and k > max_step:
            break
        touched.clear()
        while not heap.empty() and _step_of(-heap.top().first) == k:
            top = heap.top()
            heap.pop()
            d = -top.first
            idx = -top.second.first
            src = -top.second.second.first
            path = -top.second.second.second
            y = idx // w
            x = idx - y * w
            if labels[y, x] != UNCLAIMED:
                continue
            if bsrc[y, x] < 0:
                bsrc[y, x] = src
                bdist[y, x] = d
                bpath[y, x] = path
                touched.push_back(idx)
            elif slabs[bsrc[y, x]] != slabs[src]:
                bmulti[y, x] = 1
        for j in range(<Py_ssize_t>touched.size()):
            idx = touched[j]
            y = idx // w
            x = idx - y * w
            step[y, x] = k
            dist[y, x] = bdist[y, x]
            labels[y, x] = BOUNDARY if bmulti[y, x] else slabs[bsrc[y, x]]
        for j in range(<Py_ssize_t>touched.size()):
            idx = touched[j]
            y = idx // w
            x = idx - y * w
            if labels[y, x] < 0:
                continue
            d0 = dist[y, x]
            p0 = bpath[y, x]
            src = bsrc[y, x]
            sx = seeds[src, 0]
            sy = seeds[src, 1]
            for i in range(8):
                dx = mdx[i]
                dy = mdy[i]
                nx = x + dx
                ny = y + dy
                if nx < 0 or nx >= w or ny < 0 or ny >= h:
                    continue
                if not pp[ny, nx] or labels[ny, nx] != UNCLAIMED:
                    continue
                if dx != 0 and dy != 0 and not (pp[y, nx] and pp[ny, x]):
                    continue
                nidx = ny * w + nx
                path = p0 + mw[i]
                d = sqrt(<double>((nx - sx) * (nx - sx) + (ny - sy) * (ny - sy)))
                bent = path / stretch
                if bent > d:
                    d = bent
                if d0 > d:
                    d = d0
                heap.push(Entry(-d, IdxSrc(-nidx, SrcPath(-src, -path))))
    return labels, dist, step
