import heapq
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rhizome.errors import ConfigurationError, DomainError
from rhizome.field import (ScalarField, Terrain, build_field, diffuse_step,
                           gradient_at)


def open_terrain(w=9, h=9):
    return Terrain(w, h)


CHAMFER_STEPS = [(dx, dy, math.hypot(dx, dy)) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                 if dx or dy]


def chamfer_distance(w, h, start):
    """Dijkstra over the open 8-neighbour grid with weights 1 and sqrt(2)."""
    dist = np.full((h, w), np.inf)
    dist[start[1], start[0]] = 0.0
    pq = [(0.0, start)]
    while pq:
        d, (x, y) = heapq.heappop(pq)
        if d > dist[y, x]:
            continue
        for dx, dy, wt in CHAMFER_STEPS:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and d + wt < dist[ny, nx] - 1e-12:
                dist[ny, nx] = d + wt
                heapq.heappush(pq, (d + wt, (nx, ny)))
    return dist


def test_zero_field_is_fixed_point():
    t = open_terrain()
    f = ScalarField.zeros(t)
    assert np.all(diffuse_step(f, t).concentration == 0)


def test_unit_mass_single_step():
    t = open_terrain()
    c = np.zeros(t.shape)
    c[4, 4] = 1.0
    out = diffuse_step(ScalarField(c, D=0.25), t).concentration
    assert out[4, 4] == 0.0
    for y, x in ((3, 4), (5, 4), (4, 3), (4, 5)):
        assert out[y, x] == 0.25
    assert out.sum() == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), D=st.floats(0.0, 0.25))
def test_mass_conserved_without_decay(seed, D):
    rng = np.random.default_rng(seed)
    obstacle = rng.random((12, 15)) < 0.25
    t = Terrain(15, 12, obstacle=obstacle)
    c = rng.random(t.shape) * ~obstacle
    f = ScalarField(c, D=D)
    for _ in range(5):
        g = diffuse_step(f, t)
        assert abs(g.total_mass - f.total_mass) <= 1e-9 * f.total_mass
        f = g


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), D=st.floats(0.0, 0.25), decay=st.floats(0.0, 1.0))
def test_non_negative_and_obstacles_stay_empty(seed, D, decay):
    rng = np.random.default_rng(seed)
    obstacle = rng.random((10, 10)) < 0.3
    t = Terrain(10, 10, obstacle=obstacle)
    c = rng.random(t.shape) * ~obstacle
    free = list(zip(*np.nonzero(~obstacle)))
    y, x = free[0]
    f = ScalarField(c, D=D, decay=decay, sources=[((x, y), 0.5)])
    for _ in range(4):
        f = diffuse_step(f, t)
        assert np.all(f.concentration >= 0)
        assert np.all(f.concentration[obstacle] == 0)


def test_mirror_symmetry_of_centred_source():
    obstacle = np.zeros((21, 21), dtype=bool)
    obstacle[5:8, 3:6] = True
    obstacle[5:8, 15:18] = True  # mirror of the block above about x = 10
    obstacle[14, 8:13] = True
    t = Terrain(21, 21, obstacle=obstacle)
    f = build_field([(10, 10)], t, decay=0.05)
    c = f.concentration
    assert np.max(np.abs(c - c[:, ::-1])) <= 1e-9


def test_unstable_or_negative_parameters_rejected():
    t = open_terrain()
    with pytest.raises(ConfigurationError):
        ScalarField.zeros(t, D=0.3)
    with pytest.raises(ConfigurationError):
        ScalarField.zeros(t, sources=[((1, 1), -1.0)])
    with pytest.raises(ConfigurationError):
        build_field([(1, 1)], t, D=0.26)


def test_source_in_obstacle_rejected():
    obstacle = np.zeros((5, 5), dtype=bool)
    obstacle[2, 2] = True
    t = Terrain(5, 5, obstacle=obstacle)
    with pytest.raises(ConfigurationError):
        build_field([(2, 2)], t)


def test_build_field_without_sources_is_zero():
    t = open_terrain()
    f = build_field([], t)
    assert f.converged
    assert np.all(f.concentration == 0)


@pytest.mark.parametrize("w,h,src", [(17, 15, (4, 7)), (31, 31, (15, 15)), (25, 19, (3, 3))])
def test_single_source_decreases_along_shortest_paths(w, h, src):
    t = Terrain(w, h)
    f = build_field([src], t, decay=0.05, tol=1e-12, max_iter=20000)
    assert f.converged
    c = f.concentration
    dist = chamfer_distance(w, h, src)
    checked = 0
    for y in range(h):
        for x in range(w):
            for dx, dy, wt in CHAMFER_STEPS:
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and abs(dist[ny, nx] - dist[y, x] - wt) < 1e-9:
                    assert c[ny, nx] < c[y, x]
                    checked += 1
    assert checked > 400


def test_default_relaxation_converges_with_decay():
    f = build_field([(5, 5)], Terrain(11, 11), decay=0.05)
    assert f.converged


def test_walled_room_keeps_concentration_inside():
    obstacle = np.zeros((12, 12), dtype=bool)
    obstacle[2, 2:8] = obstacle[7, 2:8] = True
    obstacle[2:8, 2] = obstacle[2:8, 7] = True
    t = Terrain(12, 12, obstacle=obstacle)
    f = build_field([(4, 4)], t, decay=0.05)
    inside = np.zeros_like(obstacle)
    inside[3:7, 3:7] = True
    assert np.all(f.concentration[~inside] == 0)
    assert f.concentration[4, 4] > 0


def test_iteration_cap_flags_non_convergence():
    t = Terrain(30, 30)
    f = build_field([(1, 1)], t, decay=0.001, max_iter=10)
    assert not f.converged
    assert f.iterations == 10
    assert f.concentration[1, 1] > 0


def test_gradient_uniform_and_ramp():
    t = Terrain(8, 6)
    uniform = ScalarField(np.full(t.shape, 3.0))
    assert np.allclose(gradient_at(uniform, (3.3, 2.7), t), 0.0)
    xs = np.tile(np.arange(8, dtype=float), (6, 1))
    ramp = ScalarField(xs)
    for pos in ((1.0, 1.0), (3.25, 2.5), (5.9, 4.1), (0.2, 0.0)):
        assert np.allclose(gradient_at(ramp, pos, t), (1.0, 0.0), atol=1e-12)


def test_gradient_of_quadratic_bump_matches_analytic():
    t = Terrain(25, 25)
    yy, xx = np.mgrid[0:25, 0:25].astype(float)
    cx, cy = 12.0, 12.0
    bump = 400.0 - (xx - cx) ** 2 - 0.5 * (yy - cy) ** 2
    f = ScalarField(bump)
    rng = np.random.default_rng(3)
    n = 0
    while n < 200:
        x, y = rng.uniform(1.0, 23.0, size=2)
        if np.hypot(x - cx, y - cy) < 2.0:
            continue
        g = gradient_at(f, (x, y), t)
        exact = np.array([-2.0 * (x - cx), -(y - cy)])
        assert np.linalg.norm(g - exact) <= 0.05 * np.linalg.norm(exact)
        n += 1


def test_gradient_position_errors():
    obstacle = np.zeros((5, 5), dtype=bool)
    obstacle[2, 2] = True
    t = Terrain(5, 5, obstacle=obstacle)
    f = ScalarField.zeros(t)
    with pytest.raises(DomainError):
        gradient_at(f, (-1.0, 2.0), t)
    with pytest.raises(DomainError):
        gradient_at(f, (2.1, 1.8), t)


def test_one_sided_difference_beside_obstacle():
    obstacle = np.zeros((3, 5), dtype=bool)
    obstacle[:, 3] = True
    t = Terrain(5, 3, obstacle=obstacle)
    c = np.tile(np.array([0.0, 1.0, 3.0, 0.0, 0.0]), (3, 1))
    f = ScalarField(c * ~obstacle)
    g = gradient_at(f, (2.0, 1.0), t)
    assert g[0] == pytest.approx(2.0)  # backward difference only
