"""Arm choice of roots descending a Y-shaped channel."""

from dataclasses import dataclass, replace
import math

import numpy as np

from ..errors import ConfigurationError
from ..field import ScalarField, Terrain, build_field, cell_of
from ..grower import ACTIVE, Apex, Fields, GrowthParams, grow_step, make_rng

WIDTH = 41
HEIGHT = 52
CENTRE_X = 20
STEM = ((20.0, 1.0), (20.0, 25.0))
LEFT_END = (6, 48)
RIGHT_END = (34, 48)
HALF_WIDTH = 2.5
START = (20.0, 3.0)
DECISION_Y = 36  # a root whose cell row reaches this has committed to an arm


def _capsule(xx, yy, a, b, r):
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    t = np.clip(((xx - ax) * vx + (yy - ay) * vy) / (vx * vx + vy * vy), 0.0, 1.0)
    return np.hypot(xx - ax - t * vx, yy - ay - t * vy) <= r


def ymaze_terrain():
    """Mirror-symmetric Y channel; gravity pulls towards larger y."""
    yy, xx = np.mgrid[0:HEIGHT, 0:WIDTH].astype(np.float64)
    junction = STEM[1]
    free = (_capsule(xx, yy, STEM[0], junction, HALF_WIDTH)
            | _capsule(xx, yy, junction, LEFT_END, HALF_WIDTH)
            | _capsule(xx, yy, junction, RIGHT_END, HALF_WIDTH))
    free &= free[:, ::-1]
    return Terrain(WIDTH, HEIGHT, elevation=-yy, obstacle=~free)


def default_ymaze_params(**overrides):
    p = dict(w_inertia=1.5, w_gradient=1.0, w_downhill=0.3, w_noise=0.5, w_align=0.0,
             speed=0.5, stall_limit=24)
    p.update(overrides)
    return GrowthParams(**p)


@dataclass
class YMazeResult:
    fraction_left: float
    choices: list  # "left", "right" or None (undecided) per trial
    c_left: float
    c_right: float

    def counts(self):
        return {k: self.choices.count(k) for k in ("left", "right", None)}


def _arm_fields(terrain, decay, D):
    left = build_field([LEFT_END], terrain, D=D, decay=decay).concentration
    return left, left[:, ::-1]


def _trial(terrain, fields, params, ss, steps):
    apex = Apex(START, (0.0, 1.0), speed=params.speed)
    apexes = [apex]
    rng = make_rng(ss)
    for _ in range(steps):
        grow_step(apexes, fields, terrain, params, rng)
        if cell_of(apex.pos)[1] >= DECISION_Y:
            return "left" if apex.pos[0] < CENTRE_X else "right"
        if apex.state != ACTIVE:
            break
    return None


def solve_ymaze(c_left, c_right, trials=1, params=None, seed=0, steps=800, decay=0.01, D=0.2):
    """Run ``trials`` independent roots and report the fraction turning left.

    Trial ``k`` draws from ``SeedSequence([seed, k])``.  When the right arm
    holds more attractant the mirrored problem is solved and the choices are
    mirrored back, so swapping the two strengths gives mirrored counts.
    """
    if trials < 1:
        raise ConfigurationError("trials must be at least 1")
    if c_left < 0 or c_right < 0:
        raise ConfigurationError("attractant strengths must be non-negative")
    params = params or default_ymaze_params()
    params = replace(params, branch_rate=0.0)
    if c_left == c_right and params.w_noise == 0:
        raise ConfigurationError("equal arms without noise give a deterministic tie")
    if c_left < c_right:
        mirrored = solve_ymaze(c_right, c_left, trials, params, seed, steps, decay, D)
        flip = {"left": "right", "right": "left", None: None}
        choices = [flip[c] for c in mirrored.choices]
        return YMazeResult(choices.count("left") / trials, choices, c_left, c_right)

    terrain = ymaze_terrain()
    left, right = _arm_fields(terrain, decay, D)
    attract = ScalarField(c_left * left + c_right * right, D=D, decay=decay)
    fields = Fields(attract if (c_left > 0 or c_right > 0) else None)
    choices = [_trial(terrain, fields, params, np.random.SeedSequence([seed, k]), steps)
               for k in range(trials)]
    return YMazeResult(choices.count("left") / trials, choices, c_left, c_right)
