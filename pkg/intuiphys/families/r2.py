import math

from intuiphys.physics import RotatedRect

description = "Two rotated rectangles"


def obstacle_count(rng):
    return 2


def propose_rect(rng, board, config):
    lo, hi = config.obstacle_size_range
    width, height = rng.integers(lo, hi + 1, size=2)
    angle = rng.uniform(0.0, math.pi)
    hx, hy = width / 2.0, height / 2.0
    # extent of the rotated rectangle, plus gap to the wall band
    c, s = abs(math.cos(angle)), abs(math.sin(angle))
    ex = c * hx + s * hy + config.obstacle_gap
    ey = s * hx + c * hy + config.obstacle_gap
    x_min, y_min, x_max, y_max = board.interior
    if x_max - x_min < 2 * ex or y_max - y_min < 2 * ey:
        return None
    cx = rng.uniform(x_min + ex, x_max - ex)
    cy = rng.uniform(y_min + ey, y_max - ey)
    return RotatedRect((cx, cy), (hx, hy), angle)


propose = propose_rect
