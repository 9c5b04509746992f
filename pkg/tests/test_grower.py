import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rhizome.errors import ConfigurationError
from rhizome.field import ScalarField, Terrain, cell_of
from rhizome.grower import (ACTIVE, Apex, Fields, GrowthParams, RootNetwork, Scenario, grow_step,
                            make_rng, narrow_mask, propose_heading, run_growth,
                            scenario_fields)
from rhizome.scenario import load_scenario

BALLISTIC = dict(w_inertia=1.0, w_gradient=0.0, w_downhill=0.0, w_noise=0.0, w_align=0.0)


def test_ballistic_trail_is_straight():
    t = Terrain(60, 60)
    sc = Scenario(t, [((5.0, 5.0), (3.0, 1.0))], GrowthParams(**BALLISTIC, speed=0.7), steps=40)
    trail = run_growth(sc).trails[0]
    d = trail - trail[0]
    cross = d[:, 0] * 1.0 - d[:, 1] * 3.0
    assert len(trail) == 41
    assert np.max(np.abs(cross)) < 1e-9


def test_gradient_only_heading_is_normalized_gradient():
    t = Terrain(10, 10)
    yy, xx = np.mgrid[0:10, 0:10].astype(float)
    attract = ScalarField(3.0 * xx + 4.0 * yy)
    params = GrowthParams(w_inertia=0.0, w_gradient=1.0)
    apex = Apex((4.2, 5.1), (-1.0, 0.0))
    h = propose_heading(apex, Fields(attract), t, params, make_rng(0))
    assert h == pytest.approx((0.6, 0.8), abs=1e-12)


def test_repellent_pushes_the_other_way():
    t = Terrain(10, 10)
    yy, xx = np.mgrid[0:10, 0:10].astype(float)
    params = GrowthParams(w_inertia=0.0, w_gradient=1.0)
    apex = Apex((4.0, 4.0), (0.0, 1.0))
    h = propose_heading(apex, Fields(repel=ScalarField(xx)), t, params, make_rng(0))
    assert h == pytest.approx((-1.0, 0.0))


def test_reflection_off_vertical_wall():
    obstacle = np.zeros((5, 8), dtype=bool)
    obstacle[:, 5] = True
    t = Terrain(8, 5, obstacle=obstacle)
    apex = Apex((4.0, 2.0), (1.0, 0.0))
    grow_step([apex], None, t, GrowthParams(**BALLISTIC), make_rng(0))
    assert apex.heading == (-1.0, 0.0)
    assert apex.pos == (4.0, 2.0)
    assert apex.trail == [(4.0, 2.0)]


def test_reflection_at_domain_edge_flips_normal_component_only():
    t = Terrain(6, 6)
    apex = Apex((5.2, 2.0), (0.6, 0.8))
    grow_step([apex], None, t, GrowthParams(**BALLISTIC), make_rng(0))
    assert apex.heading == pytest.approx((-0.6, 0.8))
    assert apex.pos == (5.2, 2.0)


def test_corner_cutting_is_blocked():
    obstacle = np.zeros((6, 6), dtype=bool)
    obstacle[2, 3] = True  # cell right of the apex cell
    t = Terrain(6, 6, obstacle=obstacle)
    s = 1 / math.sqrt(2)
    apex = Apex((2.3, 2.3), (s, -s))  # heads through the top-right corner
    grow_step([apex], None, t, GrowthParams(**BALLISTIC, speed=0.5), make_rng(0))
    assert apex.pos == (2.3, 2.3)
    assert apex.heading == pytest.approx((-s, -s))


def test_run_is_deterministic_for_a_seed():
    t = Terrain(30, 30)
    params = GrowthParams(w_inertia=1.0, w_gradient=0.0, w_noise=0.8, branch_rate=0.05, rng_seed=11)
    sc = Scenario(t, [((15.0, 15.0), (1.0, 0.0))], params, steps=120)
    a, b = run_growth(sc), run_growth(sc)
    assert a.to_csv() == b.to_csv()
    assert len(a.trails) > 1


def test_plateau_above_limit_is_never_entered():
    elevation = np.zeros((30, 30))
    elevation[10:20, 10:20] = 5.0
    t = Terrain(30, 30, elevation=elevation)
    params = GrowthParams(w_inertia=1.0, w_gradient=0.0, w_noise=1.0, elevation_limit=2.0,
                          branch_rate=0.02, rng_seed=4)
    seeds = [((2.0, 2.0), (1.0, 1.0)), ((27.0, 15.0), (-1.0, 0.0)), ((15.0, 27.0), (0.0, -1.0))]
    net = run_growth(Scenario(t, seeds, params, steps=200))
    for x, y in net.vertices():
        ix, iy = cell_of((x, y))
        assert elevation[iy, ix] <= 2.0


def test_narrow_corridor_cells_are_masked():
    obstacle = np.ones((9, 20), dtype=bool)
    obstacle[1:8, 1:8] = False   # room
    obstacle[4:6, 8:19] = False  # two-cell-wide corridor
    t = Terrain(20, 9, obstacle=obstacle)
    m = narrow_mask(t, 3)
    assert m[4, 12] and m[5, 12]
    assert not m[4, 4]
    params = GrowthParams(w_inertia=1.0, w_gradient=0.0, w_noise=1.0, min_width=3, rng_seed=2)
    net = run_growth(Scenario(t, [((4.0, 4.0), (1.0, 0.0))], params, steps=300))
    assert max(x for x, _ in net.vertices()) < 8.5


def test_apex_in_obstacle_rejected():
    obstacle = np.zeros((5, 5), dtype=bool)
    obstacle[2, 2] = True
    t = Terrain(5, 5, obstacle=obstacle)
    with pytest.raises(ConfigurationError):
        run_growth(Scenario(t, [((2.1, 1.9), (1.0, 0.0))], GrowthParams()))


def test_parameter_validation():
    with pytest.raises(ConfigurationError):
        GrowthParams(w_inertia=0, w_gradient=0)
    with pytest.raises(ConfigurationError):
        GrowthParams(branch_rate=-0.1)
    with pytest.raises(ConfigurationError):
        run_growth(Scenario(Terrain(5, 5), [((1.0, 1.0), (1.0, 0.0))], steps=0))


def test_exit_cell_ends_growth():
    t = Terrain(20, 5)
    sc = Scenario(t, [((1.0, 2.0), (1.0, 0.0))], GrowthParams(**BALLISTIC), steps=50,
                  exits=[(10, 2)])
    net = run_growth(sc)
    assert net.states == ["exited"]
    assert cell_of(net.trails[0][-1]) == (10, 2)


def test_stall_limit_stops_a_trapped_apex():
    obstacle = np.ones((5, 5), dtype=bool)
    obstacle[2, 2] = False
    t = Terrain(5, 5, obstacle=obstacle)
    params = GrowthParams(**BALLISTIC, stall_limit=5)
    net = run_growth(Scenario(t, [((2.0, 2.0), (1.0, 0.0))], params, steps=100))
    assert net.states == ["stopped"]


def _mean_pairwise_cosine(apexes):
    hs = np.array([a.heading for a in apexes])
    g = hs @ hs.T
    n = len(hs)
    return (g.sum() - n) / (n * (n - 1))


def test_alignment_raises_heading_coherence_in_wide_corridor():
    obstacle = np.zeros((24, 120), dtype=bool)
    obstacle[0, :] = obstacle[-1, :] = True
    t = Terrain(120, 24, obstacle=obstacle)
    scores = {0.0: [], 3.0: []}
    for seed in range(10):
        for w_align in scores:
            rng0 = np.random.default_rng(seed)
            params = GrowthParams(w_inertia=1.0, w_gradient=0.0, w_noise=0.6, w_align=w_align,
                                  align_radius=8.0, speed=0.5, rng_seed=seed)
            apexes = []
            for k in range(20):
                a = rng0.uniform(0, 2 * math.pi)
                apexes.append(Apex((rng0.uniform(20, 40), rng0.uniform(3, 20)),
                                   (math.cos(a), math.sin(a)), speed=0.5, root_id=k))
            rng = make_rng(seed)
            for _ in range(60):
                grow_step(apexes, None, t, params, rng)
            scores[w_align].append(_mean_pairwise_cosine(apexes))
    assert np.mean(scores[3.0]) > np.mean(scores[0.0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), noise=st.floats(0.0, 2.0), branch=st.floats(0.0, 0.2),
       speed=st.floats(0.1, 1.5), downhill=st.floats(0.0, 1.0))
def test_growth_invariants(seed, noise, branch, speed, downhill):
    rng = np.random.default_rng(seed)
    obstacle = rng.random((16, 16)) < 0.2
    obstacle[8, 8] = False
    elevation = rng.random((16, 16)) * 3
    elevation[8, 8] = 0.0
    t = Terrain(16, 16, obstacle=obstacle, elevation=elevation)
    src = tuple(int(v) for v in rng.integers(0, 16, size=2))
    attract = [((src[0], src[1]), 1.0)] if not obstacle[src[1], src[0]] else []
    params = GrowthParams(w_inertia=1.0, w_gradient=1.0, w_downhill=downhill, w_noise=noise,
                          branch_rate=branch, speed=speed, elevation_limit=2.5, rng_seed=seed)
    sc = Scenario(t, [((8.0, 8.0), (0.0, 1.0))], params, steps=60, attract=attract)
    fields = scenario_fields(sc)
    apexes = [Apex((8.0, 8.0), (0.0, 1.0), speed=speed)]
    g = make_rng(seed)
    for _ in range(60):
        grow_step(apexes, fields, t, params, g)
        for a in apexes:
            if a.state == ACTIVE:
                assert abs(math.hypot(*a.heading) - 1.0) <= 1e-9
    net = RootNetwork.from_apexes(apexes)
    assert net.is_forest()
    for trail in net.trails:
        for x, y in trail:
            assert t.in_domain((x, y))
            ix, iy = cell_of((x, y))
            assert not obstacle[iy, ix] and elevation[iy, ix] <= 2.5
        steps = np.hypot(*np.diff(trail, axis=0).T)
        assert np.all(np.abs(steps - speed) <= 1e-9)
    index = dict(zip(net.root_ids, range(len(net.trails))))
    for rid, pid, k, trail in zip(net.root_ids, net.parent_ids, net.attach_index, net.trails):
        if pid is not None:
            assert np.array_equal(trail[0], net.trails[index[pid]][k])


def test_scenario_file_round_trip(tmp_path):
    (tmp_path / "room.txt").write_text("##########\n#........#\n#........#\n##########\n")
    (tmp_path / "run.scn").write_text(
        "mask = room.txt\n"
        "steps = 30 ; budget\n"
        "seed = 1 1 1 0\n"
        "attract = 8 2 2.0\n"
        "w_noise = 0.5\n"
        "rng_seed = 9\n")
    sc = load_scenario(tmp_path / "run.scn")
    assert sc.terrain.shape == (4, 10)
    assert sc.attract == [((8, 2), 2.0)]
    assert sc.params.rng_seed == 9
    a, b = run_growth(sc), run_growth(sc)
    assert a.to_csv() == b.to_csv()
    (tmp_path / "bad.scn").write_text("mask = room.txt\nseed = 1 1\nbogus = 1\n")
    with pytest.raises(ConfigurationError):
        load_scenario(tmp_path / "bad.scn")
