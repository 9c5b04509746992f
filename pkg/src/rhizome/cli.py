"""Command-line front end.

Every subcommand writes its outputs plus ``manifest.json`` into the output
directory (``--out``, else ``$RHIZOME_OUT``, else ``./rhizome-out``).  The
manifest lists the version, the seed, every effective parameter and the
SHA-256 of each input and output, so ``rhizome replay manifest.json`` can
re-run the command and confirm the outputs come back byte for byte.

Parameters are resolved in this order, later sources winning:

1. built-in defaults,
2. ``--config FILE``: flat ``key = value`` lines, ``#`` starts a comment,
3. ``--set key=value`` (repeatable),
4. dedicated flags such as ``--trials 40``.

Keys are the flag names with underscores (``c_left``, ``material_seed``).
Growth parameters use dotted keys (``growth.w_noise = 0.3``).  Unknown keys
are a usage error.

Exit codes: 0 success, 1 the computation rejected its input, 2 bad usage.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .errors import RhizomeError

MANIFEST = "manifest.json"
MANIFEST_FORMAT = "rhizome-manifest/1"


class UsageError(Exception):
    """Bad flags, keys or values; maps to exit code 2."""


# parameter declarations

def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    t = str(text).strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return float(t)


CONVERT = {"int": int, "float": _float, "str": str, "bool": _bool, "path": str}


@dataclass(frozen=True)
class Param:
    name: str
    kind: str           # int, float, str, bool or path (an input file)
    default: object
    help: str = ""


def _growth_params(factory):
    """Dotted growth keys with the defaults a task uses; rng_seed follows --seed."""
    cfg = factory().config()
    out = []
    for k, v in cfg.items():
        if k in ("rng_algorithm", "rng_seed"):
            continue
        kind = "int" if isinstance(v, int) and not isinstance(v, bool) else "float"
        out.append(Param(f"growth.{k}", kind, v, "growth parameter"))
    return out


def _growth(p, factory, seed):
    from .grower import GrowthParams

    base = factory().config()
    kw = {k: p.get(f"growth.{k}", base[k]) for k in GrowthParams.__dataclass_fields__}
    kw["rng_seed"] = seed
    return GrowthParams(**kw)


# output helpers

class Outputs:
    """Collects files written by a run, in order."""

    def __init__(self, directory):
        self.dir = directory
        self.files = {}

    def write(self, name, text):
        os.makedirs(self.dir, exist_ok=True)
        data = text.encode("utf-8")
        with open(os.path.join(self.dir, name), "wb") as fh:
            fh.write(data)
        self.files[name] = hashlib.sha256(data).hexdigest()


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _rows(header, rows):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return out.getvalue()


def _grid_size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"domain must look like WIDTHxHEIGHT, got {text!r}") from None
    if w < 1 or h < 1:
        raise UsageError("domain sides must be positive")
    return w, h


def _bits(text, n):
    try:
        bits = [int(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise UsageError(f"inputs must be comma-separated 0/1 values, got {text!r}") from None
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise UsageError(f"expected {n} comma-separated 0/1 values, got {text!r}")
    return bits


# subcommands; each returns the text printed on success

def run_ymaze(p, seed, out):
    from .geomtasks.ymaze import default_ymaze_params, solve_ymaze

    params = _growth(p, default_ymaze_params, seed)
    res = solve_ymaze(p["c_left"], p["c_right"], trials=p["trials"], params=params, seed=seed,
                      steps=p["steps"], decay=p["decay"], D=p["diffusion"])
    out.write("choices.csv", _rows(["trial", "choice"],
                                   [(k, c or "none") for k, c in enumerate(res.choices)]))
    counts = res.counts()
    out.write("summary.csv", _rows(["trials", "left", "right", "undecided", "fraction_left"],
                                   [(p["trials"], counts["left"], counts["right"], counts[None],
                                     res.fraction_left)]))
    return f"fraction_left={res.fraction_left!r} left={counts['left']} right={counts['right']}"


def run_maze(p, seed, out):
    from .geomtasks.maze import default_maze_params, generate_maze, solve_maze
    from .gridio import format_ascii_mask, format_points_csv, load_terrain
    from .grower import RootNetwork
    from .oracle import dijkstra
    from .render import render_network

    if p["maze"]:
        terrain, markers = load_terrain(p["maze"])
        if "S" not in markers or "D" not in markers:
            raise UsageError("maze file needs an S and a D marker")
        src, dst = markers["S"], markers["D"]
    else:
        terrain, src, dst = generate_maze(p["size"], seed)
        out.write("maze.txt", format_ascii_mask(terrain.obstacle, {"S": src, "D": dst}))
    steps = p["steps"] = p["steps"] or 8 * terrain.width * terrain.height
    res = solve_maze(terrain, src, dst, _growth(p, default_maze_params, seed), steps=steps,
                     decay=p["decay"], D=p["diffusion"])
    best = dijkstra(terrain, src, dst)
    oracle = best.length if best.reachable else math.inf
    ratio = res.length / oracle if res.solved and oracle > 0 else (1.0 if res.solved else math.inf)
    out.write("path.csv", format_points_csv(res.path or []))
    out.write("metrics.csv", _rows(
        ["solved", "length", "oracle_length", "ratio", "steps", "trail_length", "reason"],
        [(int(res.solved), float(res.length), float(oracle), float(ratio), res.steps,
          float(res.trail_length), res.reason)]))
    net = RootNetwork([res.trail], [0], [None], [None], ["exited" if res.solved else "stopped"])
    out.write("network.csv", net.to_csv())
    out.write("maze.svg", render_network(net, terrain))
    if res.solved:
        return f"solved length={res.length!r} oracle={oracle!r}"
    return f"not solved: {res.reason}"


def _labels_grid(labeling):
    """Labels as PGM grey levels: 0 obstacle, 1 boundary, 2 unclaimed, k+3 seed k."""
    from .kernels import BOUNDARY, OBSTACLE

    lab = np.asarray(labeling.labels, dtype=np.int64)
    g = lab + 3
    g[lab == OBSTACLE] = 0
    g[lab == BOUNDARY] = 1
    return g, max(255, int(g.max()))


def labeling_from_grid(grid):
    from .geomtasks.voronoi import Labeling
    from .kernels import BOUNDARY, OBSTACLE, UNCLAIMED

    g = np.rint(np.asarray(grid)).astype(np.int64)
    lab = (g - 3).astype(np.int32)
    lab[g == 0] = OBSTACLE
    lab[g == 1] = BOUNDARY
    lab[g == 2] = UNCLAIMED
    step = np.full(lab.shape, -1, dtype=np.int64)
    return Labeling(lab, step, np.zeros((0, 2), dtype=np.int64))


def run_voronoi(p, seed, out):
    from .field import Terrain
    from .geomtasks.voronoi import agreement, approximate_voronoi, is_complete
    from .gridio import format_pgm, format_points_csv, load_terrain, read_points_csv
    from .grower import make_rng
    from .oracle import exact_voronoi_label
    from .render import render_labeling

    w, h = _grid_size(p["domain"])
    if p["mask"]:
        terrain, _ = load_terrain(p["mask"])
    else:
        terrain = Terrain(w, h)
    if p["seeds"]:
        seeds = read_points_csv(p["seeds"])
    else:
        free = np.argwhere(terrain.passable)
        if p["sites"] > len(free):
            raise UsageError("more sites than free cells")
        pick = make_rng(seed).choice(len(free), size=p["sites"], replace=False)
        seeds = free[np.sort(pick)][:, ::-1].astype(np.float64)
        out.write("seeds.csv", format_points_csv(seeds))
    lab = approximate_voronoi(seeds, terrain, p["max_steps"] or None)
    ref = exact_voronoi_label(lab.seeds, terrain)
    grid, maxval = _labels_grid(lab)
    out.write("labels.pgm", format_pgm(grid, maxval=maxval, normalize=False))
    agree = agreement(lab, ref)
    out.write("agreement.csv", _rows(
        ["agreement", "claimed", "boundary", "unclaimed", "complete"],
        [(float(agree), int(lab.claimed.sum()), int(lab.boundary.sum()),
          int(lab.unclaimed.sum()), int(is_complete(lab)))]))
    out.write("voronoi.svg", render_labeling(lab))
    return f"agreement={agree!r} seeds={len(lab.seeds)}"


def _random_points(n, seed):
    from .grower import make_rng

    return make_rng(seed).random((n, 2))


def run_mst(p, seed, out):
    from .geomtasks.spanning import approximate_spanning_tree, default_spanning_params
    from .gridio import format_points_csv, read_points_csv
    from .render import render_polygons

    if p["points"]:
        pts = read_points_csv(p["points"])
    else:
        pts = _random_points(p["n"], seed)
        out.write("points.csv", format_points_csv(pts))
    p["steps"] = p["steps"] or 4 * p["grid"] * len(pts)
    res = approximate_spanning_tree(pts, _growth(p, default_spanning_params, seed), grid=p["grid"],
                                    steps=p["steps"], decay=p["decay"], D=p["diffusion"])
    out.write("network.csv", res.network.to_csv())
    out.write("metrics.csv", _rows(
        ["spans_all", "total_length", "mst_length", "mst_ratio", "order"],
        [(int(res.spans_all), float(res.total_length), float(res.mst_length),
          float(res.mst_ratio), " ".join(str(k) for k in res.order))]))
    out.write("mst.svg", render_polygons([], pts, res.network.trails))
    return f"spans_all={res.spans_all} mst_ratio={res.mst_ratio!r}"


def _bounds(text):
    if not text:
        return None
    try:
        b = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bounds must be xmin,ymin,xmax,ymax, got {text!r}") from None
    if len(b) != 4:
        raise UsageError(f"bounds must be xmin,ymin,xmax,ymax, got {text!r}")
    return b


def run_hull(p, seed, out):
    from .geomtasks.hull import approximate_hull
    from .gridio import format_points_csv, read_points_csv
    from .oracle import convex_hull, polygon_area
    from .render import render_polygons

    if p["points"]:
        pts = read_points_csv(p["points"])
    else:
        pts = _random_points(p["n"], seed)
        out.write("points.csv", format_points_csv(pts))
    h = approximate_hull(pts, p["alpha"], bounds=_bounds(p["bounds"]), max_nodes=p["max_nodes"])
    convex = polygon_area(convex_hull(pts))
    out.write("hull.csv", format_points_csv(h.polygon))
    out.write("metrics.csv", _rows(["area", "convex_area", "radius", "resolution"],
                                   [(float(h.area), float(convex), float(h.radius),
                                     float(h.resolution))]))
    out.write("hull.svg", render_polygons([h.polygon], pts))
    return f"area={h.area!r} convex_area={convex!r}"


def run_subdivide(p, seed, out):
    from .geomtasks.subdivision import subdivide_polygon
    from .gridio import read_points_csv
    from .oracle import is_convex
    from .render import render_polygons

    poly = read_points_csv(p["polygon"])
    regions = subdivide_polygon(poly, p["angular_resolution"])
    rows = []
    for k, r in enumerate(regions):
        rows.extend((k, i, float(x), float(y)) for i, (x, y) in enumerate(r.polygon))
    out.write("regions.csv", _rows(["region", "vertex", "x", "y"], rows))
    out.write("metrics.csv", _rows(["region", "area", "swept", "convex"],
                                   [(k, float(r.area), int(r.swept), int(is_convex(r.polygon)))
                                    for k, r in enumerate(regions)]))
    out.write("subdivide.svg", render_polygons([r.polygon for r in regions]))
    return f"regions={len(regions)}"


def _layout(p):
    from .channelgates import builtin_layout, load_layout

    if p["layout_file"]:
        return load_layout(p["layout_file"])
    return builtin_layout(p["layout"])


def run_gate(p, seed, out):
    from .channelgates import evaluate_layout
    from .render import render_layout

    layout = _layout(p)
    bits = _bits(p["inputs"], len(layout.inputs))
    res = evaluate_layout(layout, dict(zip(layout.inputs, map(bool, bits))))
    labels = layout.outputs
    out.write("gate.csv", _rows(["output", "bit"], [(k, int(res.outputs[k])) for k in labels]))
    out.write("roots.csv", _rows(["root", "input", "state", "exit", "path"],
                                 [(r.root, r.label, r.state, r.exit_label or "", " ".join(r.path))
                                  for r in res.roots]))
    out.write("gate.svg", render_layout(layout, res))
    return " ".join(f"{k}={int(res.outputs[k])}" for k in labels)


def run_truthtable(p, seed, out):
    from .channelgates import truth_table_csv

    text = truth_table_csv(_layout(p))
    out.write("truthtable.csv", text)
    return text.rstrip("\n")


def run_amplifier(p, seed, out):
    from .analog import AmplifierConfig, sum_amplifier

    cfg = AmplifierConfig(p["r0"], p["r1"], p["r2"], p["v1"], p["v2"])
    v0 = sum_amplifier(cfg)
    a, b = cfg.gains
    out.write("amplifier.csv", _rows(["r0", "r1", "r2", "v1", "v2", "a", "b", "v0"],
                                     [(cfg.R0, cfg.R1, cfg.R2, cfg.v1, cfg.v2, a, b, v0)]))
    return f"v0={v0!r}"


def run_netlist(p, seed, out):
    from .analog import load_netlist, solve_resistor_network

    net = load_netlist(p["netlist"])
    sol = solve_resistor_network(net)
    out.write("voltages.csv", sol.to_csv())
    out.write("currents.csv", _rows(["a", "b", "ohms", "amps"],
                                    [(a, b, float(r), float(c))
                                     for (a, b, r), c in zip(net.resistors, sol.currents)]))
    return " ".join(f"{n}={v!r}" for n, v in sol.voltages.items())


def run_memristor(p, seed, out):
    from .analog import MemristorState, imply_gate, nand_gate, sweep_loop

    state = MemristorState(p["w0"], p["r_on"], p["r_off"], p["v_t"], p["rate"])
    t, v, i, w = sweep_loop(state, p["amplitude"], p["frequency"], p["samples"])
    out.write("loop.csv", _rows(["t", "v", "i", "w"], zip(t.tolist(), v.tolist(), i.tolist(),
                                                         w.tolist())))
    rows = [(a, b, imply_gate(a, b), nand_gate(a, b)) for a in (0, 1) for b in (0, 1)]
    out.write("imply.csv", _rows(["p", "q", "imply", "nand"], rows))
    return f"w_final={float(w[-1])!r} imply={''.join(str(r[2]) for r in rows)}"


def run_mine(p, seed, out):
    from .miner import MaterialModel, MiningProtocol, census_report, mine_gates

    try:
        freqs = tuple(int(f) for f in str(p["frequencies"]).split(","))
    except ValueError:
        raise UsageError(f"frequencies must be comma-separated integers, got {p['frequencies']!r}") from None
    proto = MiningProtocol(frequencies=freqs, amplitude=p["amplitude"], window=p["window"],
                           threshold=p["threshold"], context_bits=p["context_bits"],
                           rng_seed=p["material_seed"])
    kind = p["material"]
    if kind == "random":
        material = MaterialModel.random(p["material_seed"])
    elif kind == "constant-low":
        material = MaterialModel.constant_low()
    elif kind == "planted":
        material = MaterialModel.planted_product()
    else:
        raise UsageError(f"material must be random, constant-low or planted, got {kind!r}")
    res = mine_gates(material, proto, invert_output=p["invert"])
    table, breakdown = census_report(res.census, res.breakdown)
    out.write("census.csv", table)
    out.write("breakdown.csv", breakdown)
    return f"total={res.census.total} xor={res.census.counts[7]}"


def run_render(p, seed, out):
    from .channelgates import evaluate_layout, load_layout
    from .gridio import read_pgm
    from .grower import RootNetwork
    from .render import render_labeling, render_layout, render_polygons

    path = p["input"]
    kind = p["kind"]
    if kind == "auto":
        ext = os.path.splitext(path)[1].lower()
        kind = {".csv": "network", ".pgm": "labels"}.get(ext, "layout")
    if kind == "network":
        with open(path) as fh:
            net = RootNetwork.from_csv(fh.read())
        # trail units are unknown here, so fit them to the drawing box
        svg = render_polygons([], (), net.trails)
    elif kind == "labels":
        svg = render_labeling(labeling_from_grid(read_pgm(path)))
    elif kind == "layout":
        layout = load_layout(path)
        res = None
        if p["inputs"]:
            bits = _bits(p["inputs"], len(layout.inputs))
            res = evaluate_layout(layout, dict(zip(layout.inputs, map(bool, bits))))
        svg = render_layout(layout, res)
    else:
        raise UsageError(f"kind must be auto, network, labels or layout, got {kind!r}")
    name = os.path.splitext(os.path.basename(path))[0] + ".svg"
    out.write(name, svg)
    return f"wrote {name}"


def run_grow(p, seed, out):
    from .grower import run_growth
    from .render import render_network
    from .scenario import load_scenario

    sc = load_scenario(p["scenario"])
    if p["steps"]:
        sc = replace(sc, steps=p["steps"])
    p["steps"] = sc.steps
    net = run_growth(sc)
    out.write("network.csv", net.to_csv())
    out.write("network.svg", render_network(net, sc.terrain))
    return f"roots={len(net.root_ids)} length={net.total_length()!r}"


def _ymaze_factory():
    from .geomtasks.ymaze import default_ymaze_params
    return default_ymaze_params()


def _maze_factory():
    from .geomtasks.maze import default_maze_params
    return default_maze_params()


def _spanning_factory():
    from .geomtasks.spanning import default_spanning_params
    return default_spanning_params()


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    params: tuple
    run: object


def _commands():
    from .analog import R_CAPH, R_CONTROL, R_GRAPHENE, MemristorState
    from .miner import MiningProtocol

    mem = MemristorState()
    proto = MiningProtocol()
    layout = (Param("layout", "str", "humidity", "built-in layout: humidity, gravity, half_adder"),
              Param("layout_file", "path", "", "layout text file (overrides --layout)"))
    cmds = [
        Command("ymaze", "root choice between two arms of a Y-maze", (
            Param("c_left", "float", 1.0, "attractant strength in the left arm"),
            Param("c_right", "float", 0.0, "attractant strength in the right arm"),
            Param("trials", "int", 20, "independent trials"),
            Param("steps", "int", 800, "growth steps per trial"),
            Param("decay", "float", 0.01, "attractant decay rate"),
            Param("diffusion", "float", 0.2, "attractant diffusion coefficient"),
        ) + tuple(_growth_params(_ymaze_factory)), run_ymaze),
        Command("maze", "grow a root through a maze", (
            Param("maze", "path", "", "ASCII maze with S and D markers (default: generated)"),
            Param("size", "int", 21, "side of the generated maze (odd)"),
            Param("steps", "int", 0, "step budget, 0 for 8 per cell"),
            Param("decay", "float", 0.01, "attractant decay rate"),
            Param("diffusion", "float", 0.2, "attractant diffusion coefficient"),
        ) + tuple(_growth_params(_maze_factory)), run_maze),
        Command("voronoi", "Voronoi cells from colliding fronts", (
            Param("seeds", "path", "", "CSV of seed points (default: random sites)"),
            Param("sites", "int", 5, "number of random sites when no seeds file is given"),
            Param("domain", "str", "256x256", "open domain size WIDTHxHEIGHT"),
            Param("mask", "path", "", "ASCII obstacle mask (overrides --domain)"),
            Param("max_steps", "int", 0, "stop fronts after this many steps, 0 for never"),
        ), run_voronoi),
        Command("mst", "spanning tree grown through a point set", (
            Param("points", "path", "", "CSV of points (default: random in the unit square)"),
            Param("n", "int", 10, "number of random points"),
            Param("grid", "int", 96, "grid cells across the point set"),
            Param("steps", "int", 0, "step budget, 0 for 4 * grid * points"),
            Param("decay", "float", 0.05, "attractant decay rate"),
            Param("diffusion", "float", 0.2, "attractant diffusion coefficient"),
        ) + tuple(_growth_params(_spanning_factory)), run_mst),
        Command("hull", "concave hull of a point set", (
            Param("points", "path", "", "CSV of points (default: random in the unit square)"),
            Param("n", "int", 30, "number of random points"),
            Param("alpha", "float", 1.0, "inverse of the wrapping disc radius"),
            Param("bounds", "str", "", "domain xmin,ymin,xmax,ymax (default: padded box)"),
            Param("max_nodes", "int", 600, "grid nodes along the longer side"),
        ), run_hull),
        Command("subdivide", "split a polygon into convex regions", (
            Param("polygon", "path", "", "CSV of counterclockwise polygon vertices"),
            Param("angular_resolution", "float", math.pi / 36, "turning step in radians"),
        ), run_subdivide),
        Command("gate", "evaluate a channel layout for one input row", layout + (
            Param("inputs", "str", "1,1", "comma-separated input bits in layout input order"),
        ), run_gate),
        Command("truthtable", "full truth table of a two-input layout", layout, run_truthtable),
        Command("amplifier", "inverting summing amplifier output", (
            Param("r0", "float", R_CONTROL, "feedback resistance (ohms)"),
            Param("r1", "float", R_GRAPHENE, "input 1 resistance (ohms)"),
            Param("r2", "float", R_CAPH, "input 2 resistance (ohms)"),
            Param("v1", "float", -1.0, "input 1 volts"),
            Param("v2", "float", -1.0, "input 2 volts"),
        ), run_amplifier),
        Command("netlist", "solve a resistor netlist", (
            Param("netlist", "path", "", "netlist file"),
        ), run_netlist),
        Command("memristor", "hysteresis sweep and IMPLY truth table", (
            Param("w0", "float", 0.5, "initial state"),
            Param("r_on", "float", mem.r_on, "on resistance (ohms)"),
            Param("r_off", "float", mem.r_off, "off resistance (ohms)"),
            Param("v_t", "float", mem.v_t, "switching threshold (volts)"),
            Param("rate", "float", 0.5, "state drift per volt above threshold per second"),
            Param("amplitude", "float", 2.0, "sweep amplitude (volts)"),
            Param("frequency", "float", 1.0, "sweep frequency (Hz)"),
            Param("samples", "int", 2000, "samples per period"),
        ), run_memristor),
        Command("mine", "census of logic gates found in a material", (
            Param("material", "str", "random", "random, constant-low or planted"),
            Param("material_seed", "int", 0, "seed of the random material"),
            Param("frequencies", "str", ",".join(str(f) for f in proto.frequencies),
                  "drive frequencies in Hz"),
            Param("amplitude", "float", proto.amplitude, "drive amplitude (volts)"),
            Param("window", "float", proto.window, "sampling window (seconds)"),
            Param("threshold", "float", proto.threshold, "read threshold (volts)"),
            Param("context_bits", "int", proto.context_bits, "pins driven as context"),
            Param("invert", "bool", False, "invert the read-out"),
        ), run_mine),
        Command("render", "draw a network CSV, labels PGM or layout file as SVG", (
            Param("input", "path", "", "file to draw"),
            Param("kind", "str", "auto", "auto, network, labels or layout"),
            Param("inputs", "str", "", "evaluate a layout on these bits first"),
        ), run_render),
        Command("grow", "run a growth scenario file", (
            Param("scenario", "path", "", "scenario file"),
            Param("steps", "int", 0, "override the scenario step budget, 0 keeps it"),
        ), run_grow),
    ]
    return {c.name: c for c in cmds}


REQUIRED = {"subdivide": ("polygon",), "netlist": ("netlist",), "render": ("input",),
            "grow": ("scenario",)}


# parameter resolution

def parse_config(text):
    """Flat ``key = value`` pairs; ``#`` starts a comment, later keys may not repeat."""
    pairs = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            raise UsageError(f"config line {n}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def resolve(cmd, layers):
    """Effective parameters from defaults overlaid by each mapping in ``layers``."""
    declared = {p.name: p for p in cmd.params}
    values = {p.name: p.default for p in cmd.params}
    for layer in layers:
        for key, raw in layer.items():
            if key not in declared:
                raise UsageError(f"unknown key {key!r} for {cmd.name}")
            try:
                values[key] = CONVERT[declared[key].kind](raw)
            except (TypeError, ValueError):
                raise UsageError(f"bad value for {key}: {raw!r}") from None
    for key in REQUIRED.get(cmd.name, ()):
        if not values[key]:
            raise UsageError(f"{cmd.name} needs --{key.replace('_', '-')}")
    for p in cmd.params:
        if p.kind == "path" and values[p.name]:
            values[p.name] = os.path.abspath(values[p.name])
    return values


def execute(cmd, values, seed, out_dir):
    """Run with resolved parameters and write the manifest; returns (message, manifest).

    Commands replace budget placeholders (0) in ``values`` with the budget
    they actually used, so the manifest never relies on a hidden default.
    """
    inputs = {}
    for p in cmd.params:
        if p.kind == "path" and values[p.name]:
            try:
                inputs[p.name] = {"path": values[p.name], "sha256": _sha256(values[p.name])}
            except OSError as exc:
                raise UsageError(f"cannot read {values[p.name]}: {exc.strerror}") from None
    out = Outputs(out_dir)
    message = cmd.run(values, seed, out)
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": __version__,
        "command": cmd.name,
        "seed": seed,
        "parameters": dict(sorted(values.items())),
        "inputs": inputs,
        "outputs": out.files,
    }
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, MANIFEST), "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return message, manifest


def replay(manifest_path, out_dir=None):
    """Re-run a manifest; returns the list of outputs whose bytes differ."""
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read manifest {manifest_path}: {exc}") from None
    if manifest.get("format") != MANIFEST_FORMAT:
        raise UsageError(f"{manifest_path} is not a rhizome manifest")
    cmds = _commands()
    cmd = cmds.get(manifest["command"])
    if cmd is None:
        raise UsageError(f"unknown command {manifest['command']!r} in manifest")
    for name, info in manifest["inputs"].items():
        if _sha256(info["path"]) != info["sha256"]:
            raise RhizomeError(f"input {name} ({info['path']}) changed since the manifest was written")
    values = resolve(cmd, [manifest["parameters"]])
    out_dir = out_dir or os.path.dirname(os.path.abspath(manifest_path))
    _msg, fresh = execute(cmd, values, manifest["seed"], out_dir)
    expected = manifest["outputs"]
    return sorted(k for k in set(expected) | set(fresh["outputs"])
                  if expected.get(k) != fresh["outputs"].get(k))


# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(name):
    return "--" + name.replace("_", "-").replace(".", "-")


def build_parser():
    parser = _Parser(prog="rhizome", description="Root-growth computing simulators.")
    parser.add_argument("--version", action="version", version=f"rhizome {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for cmd in _commands().values():
        sp = sub.add_parser(cmd.name, help=cmd.help, description=cmd.help)
        sp.add_argument("--out", help="output directory (default $RHIZOME_OUT or ./rhizome-out)")
        sp.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
        sp.add_argument("--config", help="flat key = value parameter file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter; repeatable")
        for p in cmd.params:
            if p.name.startswith("growth."):
                continue
            sp.add_argument(_flag(p.name), dest=p.name, default=None, metavar=p.kind.upper(),
                            help=f"{p.help} (default {p.default!r})")
    rp = sub.add_parser("replay", help="re-run a manifest and compare outputs",
                        description="Re-run a manifest and compare outputs byte for byte.")
    rp.add_argument("manifest")
    rp.add_argument("--out", help="output directory (default: the manifest's directory)")
    return parser


def _default_out():
    return os.environ.get("RHIZOME_OUT") or "rhizome-out"


def dispatch(argv=None):
    """Run one command line; returns the exit code."""
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:   # --help / --version
            return int(exc.code or 0)
        if args.command is None:
            raise UsageError("rhizome: a command is required (see --help)")
        if args.command == "replay":
            diff = replay(args.manifest, args.out)
            if diff:
                print("replay: outputs differ: " + ", ".join(diff), file=sys.stderr)
                return 1
            print("replay: all outputs identical")
            return 0
        cmd = _commands()[args.command]
        layers = []
        config_seed = None
        if args.config:
            try:
                with open(args.config) as fh:
                    pairs = parse_config(fh.read())
            except OSError as exc:
                raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
            config_seed = pairs.pop("seed", None)
            layers.append(pairs)
        sets = {}
        for item in args.set:
            if "=" not in item:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            sets[k] = v
        set_seed = sets.pop("seed", None)
        layers.append(sets)
        layers.append({p.name: getattr(args, p.name) for p in cmd.params
                       if not p.name.startswith("growth.") and getattr(args, p.name) is not None})
        values = resolve(cmd, layers)
        seed = args.seed if args.seed is not None else (set_seed or config_seed or 0)
        try:
            seed = int(seed)
        except ValueError:
            raise UsageError(f"seed must be an integer, got {seed!r}") from None
        message, _ = execute(cmd, values, seed, args.out or _default_out())
        if message:
            print(message)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except RhizomeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
