"""Grid metric shared by the growth solvers and the exact oracles.

Moves are on the 8-neighbourhood with chamfer weights 1 (axial) and sqrt(2)
(diagonal).  A diagonal move is only legal when both axial cells it passes
between are passable, so paths never squeeze through touching corners.
"""

import math

AXIAL = 1.0
DIAGONAL = math.sqrt(2.0)

# (dx, dy, weight); fixed order keeps every traversal deterministic
NEIGHBOURS_8 = (
    (1, 0, AXIAL),
    (-1, 0, AXIAL),
    (0, 1, AXIAL),
    (0, -1, AXIAL),
    (1, 1, DIAGONAL),
    (-1, 1, DIAGONAL),
    (1, -1, DIAGONAL),
    (-1, -1, DIAGONAL),
)

NEIGHBOURS_4 = ((1, 0), (-1, 0), (0, 1), (0, -1))


def step_weight(a, b):
    """Weight of a single move between 8-adjacent cells ``a`` and ``b``."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    if (dx, dy) in ((1, 0), (0, 1)):
        return AXIAL
    if (dx, dy) == (1, 1):
        return DIAGONAL
    raise ValueError(f"cells {a} and {b} are not 8-adjacent")


def legal_move(passable, a, b):
    """True if moving from cell ``a`` to 8-adjacent cell ``b`` is allowed.

    ``passable`` is indexed ``[y, x]``.
    """
    h, w = passable.shape
    x, y = b
    if not (0 <= x < w and 0 <= y < h) or not passable[y, x]:
        return False
    dx, dy = b[0] - a[0], b[1] - a[1]
    if dx and dy:
        return bool(passable[a[1], a[0] + dx] and passable[a[1] + dy, a[0]])
    return True


def path_length(cells):
    """Length of a cell path under the chamfer metric."""
    return sum(step_weight(a, b) for a, b in zip(cells, cells[1:]))
