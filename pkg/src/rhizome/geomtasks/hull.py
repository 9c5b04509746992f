"""Concave hulls wrapped by a front closing in from outside.

Grid nodes farther than the wrap radius ``r`` from every data point are free
space a disc of radius ``r`` can occupy.  The free components touching the
grid border form the front; the union of ``r``-discs centred on front nodes
is everything the front can sweep, and the hull is what it leaves behind.
Its outline is the zero level of ``dist(node, front) - r``, traced by
marching squares.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree
from skimage import measure

from ..errors import ConfigurationError, DegenerateGeometryError
from ..oracle import convex_hull, polygon_area


@dataclass
class HullParams:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise ConfigurationError("alpha must be a positive finite number")

    @property
    def radius(self):
        return 1.0 / self.alpha


@dataclass
class HullResult:
    polygon: np.ndarray    # counterclockwise vertices, not repeated at the end
    area: float
    resolution: float      # grid spacing used
    radius: float


def _grid(pts, r, bounds, max_nodes):
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    diam = float(np.max(hi - lo))
    if bounds is None:
        pad = r + 0.1 * diam
        lo = lo - pad
        hi = hi + pad
    else:
        lo = np.array(bounds[:2], dtype=np.float64)
        hi = np.array(bounds[2:], dtype=np.float64)
        if np.any(pts < lo) or np.any(pts > hi):
            raise ConfigurationError("points lie outside the given bounds")
    span = float(np.max(hi - lo))
    res = max(diam / 100.0, span / max_nodes)
    nx = int(math.ceil((hi[0] - lo[0]) / res)) + 1
    ny = int(math.ceil((hi[1] - lo[1]) / res)) + 1
    return lo, res, nx, ny


def approximate_hull(points, hull, bounds=None, max_nodes=600):
    """Outline of the point set as wrapped by discs of radius ``1/alpha``.

    ``hull`` is a HullParams or a bare alpha.  ``bounds`` = (xmin, ymin,
    xmax, ymax) fixes the domain the front starts from; by default the
    domain is padded by the radius so the front always exists.
    """
    if not isinstance(hull, HullParams):
        hull = HullParams(float(hull))
    r = hull.radius
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 3:
        raise DegenerateGeometryError("a hull needs at least three points")
    convex_hull(pts)  # raises on collinear input
    lo, res, nx, ny = _grid(pts, r, bounds, max_nodes)

    yy, xx = np.mgrid[0:ny, 0:nx]
    nodes = np.c_[lo[0] + xx.ravel() * res, lo[1] + yy.ravel() * res]
    dist, _ = cKDTree(pts).query(nodes)
    free = (dist > r).reshape(ny, nx)
    comp, _n = ndimage.label(free)
    border = np.unique(np.concatenate([comp[0], comp[-1], comp[:, 0], comp[:, -1]]))
    border = border[border > 0]
    front = np.isin(comp, border)
    if not front.any():
        raise DegenerateGeometryError("wrap radius too large: the front vanished")

    # front stays front beyond the grid edge
    padded = np.pad(front, 1, constant_values=True)
    reach = ndimage.distance_transform_edt(~padded) * res - r
    # marching squares leaves sub-cell specks where the zero level just
    # grazes a data point; they carry no area and are dropped
    contours = [c for c in measure.find_contours(reach, 0.0)
                if len(c) > 3 and np.allclose(c[0], c[-1]) and abs(polygon_area(c)) > 4.0]
    if not contours:
        raise DegenerateGeometryError("the front swept every data point away")
    if len(contours) > 1:
        raise DegenerateGeometryError(
            f"hull splits into {len(contours)} pieces at radius {r}; use a smaller alpha")
    rc = contours[0][:-1]
    poly = np.c_[lo[0] + (rc[:, 1] - 1) * res, lo[1] + (rc[:, 0] - 1) * res]
    area = polygon_area(poly)
    if area < 0:
        poly = poly[::-1]
        area = -area
    return HullResult(poly, area, res, r)
