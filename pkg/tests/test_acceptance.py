"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(and on stdout with ``-s``).
"""

import contextlib
import itertools
import json
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from rhizome.analog import (AmplifierConfig, MemristorState, imply_gate, memristor_step,
                            sum_amplifier, sweep_loop)
from rhizome.channelgates import builtin_layout, truth_table
from rhizome.cli import _commands, dispatch
from rhizome.field import Terrain
from rhizome.geomtasks import (approximate_spanning_tree, approximate_voronoi, generate_maze,
                               solve_maze, solve_ymaze, subdivide_polygon)
from rhizome.geomtasks.ymaze import default_ymaze_params
from rhizome.grower import make_rng
from rhizome.metric import legal_move
from rhizome.miner import (GATES, MaterialModel, classify_truth_table, complement_id, mine_gates,
                           table_of)
from rhizome.oracle import dijkstra, exact_mst, exact_voronoi_label, polygon_area, tree_length

ROWS = ((0, 0), (0, 1), (1, 0), (1, 1))


@contextlib.contextmanager
def criterion(n, text):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        line = f"criterion {n:02d} FAIL  {text}  ({type(exc).__name__})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"criterion {n:02d} PASS  {text}  [{time.perf_counter() - t0:.2f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)


# 1

def test_gate_tables_exact():
    with criterion(1, "humidity gate and half adder truth tables"):
        t0 = time.perf_counter()
        hum = dict(truth_table(builtin_layout("humidity")))
        ha = dict(truth_table(builtin_layout("half_adder")))
        for x, y in ROWS:
            assert hum[(x, y)] == {"p": int((not x) and y), "q": x}
            assert ha[(x, y)] == {"p": x ^ y, "q": x | y, "r": x & y}
        assert time.perf_counter() - t0 < 1.0


# 2

def test_ymaze_chemotaxis():
    with criterion(2, "Y-maze: attractant arm always chosen; neutral split in [0.40, 0.60]"):
        t0 = time.perf_counter()
        quiet = default_ymaze_params(w_noise=0.0)
        left = solve_ymaze(1.0, 0.0, trials=20, params=quiet, seed=1)
        assert left.choices == ["left"] * 20
        right = solve_ymaze(0.0, 1.0, trials=20, params=quiet, seed=1)
        assert right.choices == ["right"] * 20
        neutral = solve_ymaze(1.0, 1.0, trials=400, seed=2)
        assert 0.40 <= neutral.fraction_left <= 0.60
        assert time.perf_counter() - t0 < 30.0


# 3

def test_voronoi_fidelity():
    with criterion(3, "Voronoi: >= 95% agreement, claims final, 10 instances on 256x256"):
        terrain = Terrain(256, 256)
        free = np.argwhere(terrain.passable)
        for inst in range(10):
            t0 = time.perf_counter()
            rng = make_rng(1000 + inst)
            sites = free[rng.choice(len(free), 5, replace=False)][:, ::-1].astype(float)
            lab = approximate_voronoi(sites, terrain)
            ref = exact_voronoi_label(sites, terrain)
            mask = lab.claimed
            agree = np.count_nonzero(lab.labels[mask] == ref[mask]) / np.count_nonzero(mask)
            assert agree >= 0.95, (inst, agree)
            # a label set by step k is never revised later
            top = int(lab.step.max())
            for k in (top // 4, top // 2, 3 * top // 4):
                early = approximate_voronoi(sites, terrain, max_steps=k)
                done = early.labels >= 0
                assert np.array_equal(early.labels[done], lab.labels[done])
            assert time.perf_counter() - t0 < 10.0


# 4

def path_is_valid(terrain, path, src, dst):
    if not path or tuple(path[0]) != tuple(src) or tuple(path[-1]) != tuple(dst):
        return False
    return all(legal_move(terrain.passable, tuple(a), tuple(b))
               and max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1
               for a, b in zip(path, path[1:]))


def chamfer_length(path):
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(path, path[1:]))


def test_maze_solving():
    with criterion(4, "maze: valid paths, >= 90% solved, length <= 1.5x oracle, 20 mazes"):
        t0 = time.perf_counter()
        solved = 0
        for seed in range(20):
            terrain, src, dst = generate_maze(21, seed)
            res = solve_maze(terrain, src, dst)
            if not res.solved:
                continue
            solved += 1
            assert path_is_valid(terrain, res.path, src, dst), seed
            best = dijkstra(terrain, src, dst).length
            assert chamfer_length(res.path) == pytest.approx(res.length)
            assert res.length <= 1.5 * best + 1e-9, (seed, res.length, best)
        assert solved >= 18, solved
        assert time.perf_counter() - t0 < 60.0


# 5

def prufer_trees(n):
    """Every labelled tree on n nodes, via Pruefer sequences."""
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        edges = []
        for v in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            edges.append((leaf, v))
            degree[leaf] -= 1
            degree[v] -= 1
        u, w = [i for i in range(n) if degree[i] == 1]
        edges.append((u, w))
        yield edges


def test_spanning():
    with criterion(5, "spanning: >= 8/10 span all, finite ratio, exhaustive MST check n <= 7"):
        spans = 0
        for seed in range(10):
            pts = make_rng(seed).random((10, 2))
            res = approximate_spanning_tree(pts)
            spans += res.spans_all
            assert math.isfinite(res.mst_ratio)
        assert spans >= 8, spans
        for n in range(2, 8):
            pts = make_rng(50 + n).random((n, 2))
            mst = exact_mst(pts)
            best = min(tree_length(pts, t) for t in prufer_trees(n))
            assert mst.length == pytest.approx(best, rel=1e-12)
            assert tree_length(pts, mst.edges) == pytest.approx(mst.length, rel=1e-12)


# 6

L_SHAPE = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
PLUS = [(-0.5, -1.5), (0.5, -1.5), (0.5, -0.5), (1.5, -0.5), (1.5, 0.5), (0.5, 0.5),
        (0.5, 1.5), (-0.5, 1.5), (-0.5, 0.5), (-1.5, 0.5), (-1.5, -0.5), (-0.5, -0.5)]


def convex(poly, tol=1e-6):
    n = len(poly)
    for k in range(n):
        a, b, c = poly[k], poly[(k + 1) % n], poly[(k + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross < -tol:
            return False
    return True


def test_subdivision():
    with criterion(6, "subdivision: L gives 2, plus gives >= 5, convex, areas sum to 0.1%"):
        for poly, check in ((L_SHAPE, lambda n: n == 2), (PLUS, lambda n: n >= 5)):
            regions = subdivide_polygon(poly)
            assert check(len(regions)), len(regions)
            assert all(convex(r.polygon) for r in regions)
            total = sum(polygon_area(r.polygon) for r in regions)
            assert total == pytest.approx(polygon_area(poly), rel=1e-3)


# 7

def test_amplifier_math():
    with criterion(7, "amplifier: formula to 1e-12 on 100 configs, scaling, linearity"):
        rng = make_rng(7)
        for _ in range(100):
            r0, r1, r2 = 10 ** rng.uniform(2, 8, 3)
            v1, v2 = rng.uniform(-15, 15, 2)
            got = sum_amplifier(AmplifierConfig(r0, r1, r2, v1, v2))
            want = -(r0 / r1 * v1 + r0 / r2 * v2)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
            k = 10 ** rng.uniform(-3, 3)
            scaled = sum_amplifier(AmplifierConfig(k * r0, k * r1, k * r2, v1, v2))
            assert scaled == pytest.approx(got, rel=1e-12, abs=1e-12)
            s = rng.uniform(-4, 4)
            lin = sum_amplifier(AmplifierConfig(r0, r1, r2, s * v1, s * v2))
            assert lin == pytest.approx(s * got, rel=1e-9, abs=1e-9)
            split = (sum_amplifier(AmplifierConfig(r0, r1, r2, v1, 0.0))
                     + sum_amplifier(AmplifierConfig(r0, r1, r2, 0.0, v2)))
            assert split == pytest.approx(got, rel=1e-9, abs=1e-9)


# 8

def test_memristor_and_imply():
    with criterion(8, "memristor: retention over 1e4 pulses, IMPLY table, pinched loop"):
        rng = make_rng(8)
        start = MemristorState(w=0.42)
        s = start
        for v, dt in zip(rng.uniform(-1, 1, 10_000), rng.uniform(1e-6, 1.0, 10_000)):
            s = memristor_step(s, float(v), float(dt))
        assert s == start
        for p, q in ROWS:
            assert imply_gate(p, q) == int((not p) or q)
        _t, v, i, _w = sweep_loop(MemristorState(w=0.5, rate=0.5))
        zv = set(np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]) | set(np.nonzero(v == 0)[0])
        zi = set(np.nonzero(np.sign(i[:-1]) != np.sign(i[1:]))[0]) | set(np.nonzero(i == 0)[0])
        assert zv == zi


# 9

def test_miner_self_consistency():
    with criterion(9, "miner: 16128 total, constant-low, complement symmetry, bijection"):
        t0 = time.perf_counter()
        for seed in (0, 1, 42):
            m = MaterialModel.random(seed)
            plain = mine_gates(m).census
            assert plain.total == sum(plain.counts.values()) == 16128
            inv = mine_gates(m, invert_output=True).census
            assert all(inv.counts[complement_id(g)] == plain.counts[g] for g in GATES)
        low = mine_gates(MaterialModel.constant_low()).census
        assert low.counts[1] == 16128
        seen = set()
        for bits in itertools.product((0, 1), repeat=4):
            gid, _ = classify_truth_table(bits)
            assert table_of(gid) == bits
            seen.add(gid)
        assert seen == set(GATES)
        assert time.perf_counter() - t0 < 60.0


# 10

def test_cli_replay_reproducible(tmp_path):
    with criterion(10, "every CLI subcommand replays from its manifest byte for byte"):
        (tmp_path / "seeds.csv").write_text("x,y\n10,12\n50,40\n30,60\n")
        (tmp_path / "pts.csv").write_text("x,y\n0,0\n1,0\n1,1\n0,1\n0.5,0.4\n0.2,0.8\n")
        (tmp_path / "L.csv").write_text("x,y\n0,0\n2,0\n2,1\n1,1\n1,2\n0,2\n")
        (tmp_path / "n.net").write_text("R a m 1M\nR m g 2M\nR m b 470k\nV a 3\nV b 1\nGND g\n")
        (tmp_path / "sc.txt").write_text("width = 30\nheight = 20\nseed = 2 10\n"
                                         "attract = 25 10\nsteps = 40\n")
        runs = {
            "ymaze": ["--trials", "4"],
            "maze": [],
            "voronoi": ["--seeds", "seeds.csv", "--domain", "64x64"],
            "mst": ["--points", "pts.csv"],
            "hull": ["--points", "pts.csv", "--alpha", "1"],
            "subdivide": ["--polygon", "L.csv"],
            "gate": ["--layout", "half_adder", "--inputs", "1,1"],
            "truthtable": ["--layout", "humidity"],
            "amplifier": [],
            "netlist": ["--netlist", "n.net"],
            "memristor": [],
            "mine": ["--material-seed", "42"],
            "grow": ["--scenario", "sc.txt"],
        }
        cwd = os.getcwd()
        os.chdir(tmp_path)
        try:
            for name, extra in runs.items():
                assert dispatch([name, *extra, "--seed", "11", "--out", f"run/{name}"]) == 0, name
            assert dispatch(["render", "--input", "run/voronoi/labels.pgm",
                             "--out", "run/render"]) == 0
            assert set(runs) | {"render"} == set(_commands())
            for name in sorted(set(runs) | {"render"}):
                first = tmp_path / "run" / name
                again = tmp_path / "again" / name
                assert dispatch(["replay", str(first / "manifest.json"), "--out", str(again)]) == 0
                with open(first / "manifest.json") as fh:
                    outputs = json.load(fh)["outputs"]
                assert outputs, name
                for f in [*outputs, "manifest.json"]:
                    assert (first / f).read_bytes() == (again / f).read_bytes(), (name, f)
        finally:
            os.chdir(cwd)
