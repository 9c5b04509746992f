"""Key-value scenario files for growth runs.

One ``key = value`` per line; ``;`` or ``#`` starts a comment.  Repeatable
keys::

    seed = x y [hx hy]      apex start (heading defaults to +x)
    attract = x y [rate]    attractant source cell
    repel = x y [rate]      repellent source cell
    exit = x y              cell that ends an apex's growth

Scalar keys: ``width``, ``height``, ``mask`` (ASCII obstacle grid),
``elevation`` (PGM), ``cell_size``, ``steps``, ``diffusion``, ``decay`` and
every GrowthParams field.  Paths are relative to the scenario file.
"""

import math
import os

from .errors import ConfigurationError
from .grower import GrowthParams, Scenario
from .gridio import load_terrain

REPEATED = {"seed", "attract", "repel", "exit"}
TERRAIN_KEYS = {"width", "height", "mask", "elevation", "cell_size"}
RUN_KEYS = {"steps", "diffusion", "decay"}
PARAM_KEYS = set(GrowthParams.__dataclass_fields__)
INT_KEYS = {"width", "height", "steps", "rng_seed", "min_width", "stall_limit"}


def parse_pairs(text):
    """Return ``(scalars, repeated)`` from scenario text."""
    scalars = {}
    repeated = {k: [] for k in REPEATED}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in REPEATED:
            repeated[key].append(value)
        elif key in TERRAIN_KEYS | RUN_KEYS | PARAM_KEYS:
            if key in scalars:
                raise ConfigurationError(f"line {n}: duplicate key {key!r}")
            scalars[key] = value
        else:
            raise ConfigurationError(f"line {n}: unknown key {key!r}")
    return scalars, repeated


def _numbers(value, lo, hi, key):
    try:
        nums = [float(v) for v in value.replace(",", " ").split()]
    except ValueError:
        raise ConfigurationError(f"{key}: expected numbers, got {value!r}") from None
    if not lo <= len(nums) <= hi:
        raise ConfigurationError(f"{key}: expected {lo}..{hi} numbers, got {value!r}")
    return nums


def _scalar(key, value):
    try:
        if key in INT_KEYS:
            return int(value)
        if value.lower() in ("inf", "+inf"):
            return math.inf
        return float(value)
    except ValueError:
        raise ConfigurationError(f"{key}: bad value {value!r}") from None


def _cell(nums):
    if any(v != int(v) for v in nums[:2]):
        raise ConfigurationError(f"source/exit cells must be integers, got {nums[:2]}")
    return (int(nums[0]), int(nums[1]))


def build_scenario(scalars, repeated, base_dir="."):
    def path(key):
        v = scalars.get(key)
        return None if v is None else os.path.join(base_dir, v)

    terrain, _ = load_terrain(path("mask"), path("elevation"),
                              _scalar("width", scalars["width"]) if "width" in scalars else None,
                              _scalar("height", scalars["height"]) if "height" in scalars else None,
                              _scalar("cell_size", scalars.get("cell_size", "1")))
    params = GrowthParams(**{k: _scalar(k, v) for k, v in scalars.items() if k in PARAM_KEYS})
    seeds = []
    for v in repeated["seed"]:
        nums = _numbers(v, 2, 4, "seed")
        if len(nums) == 3:
            raise ConfigurationError("seed: heading needs two components")
        heading = tuple(nums[2:]) if len(nums) == 4 else (1.0, 0.0)
        seeds.append(((nums[0], nums[1]), heading))
    if not seeds:
        raise ConfigurationError("scenario has no seed")
    attract = []
    for v in repeated["attract"]:
        nums = _numbers(v, 2, 3, "attract")
        attract.append((_cell(nums), nums[2] if len(nums) == 3 else 1.0))
    repel = []
    for v in repeated["repel"]:
        nums = _numbers(v, 2, 3, "repel")
        repel.append((_cell(nums), nums[2] if len(nums) == 3 else 1.0))
    exits = [_cell(_numbers(v, 2, 2, "exit")) for v in repeated["exit"]]
    run = {k: _scalar(k, scalars[k]) for k in RUN_KEYS if k in scalars}
    return Scenario(terrain, seeds, params, attract=attract, repel=repel, exits=exits, **run)


def load_scenario(path):
    with open(path) as fh:
        text = fh.read()
    scalars, repeated = parse_pairs(text)
    return build_scenario(scalars, repeated, os.path.dirname(os.path.abspath(path)))
