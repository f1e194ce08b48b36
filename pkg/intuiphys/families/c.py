import math

from intuiphys.physics import MaskShape
from intuiphys.shapes import TEMPLATES, place_template, template_extent

description = "Two curved shapes from scaled, rotated templates"


def obstacle_count(rng):
    return 2


def propose(rng, board, config):
    template_id = int(rng.integers(0, len(TEMPLATES)))
    scale = rng.uniform(*config.custom_scale_range)
    angle = rng.uniform(0.0, 2 * math.pi)
    margin = template_extent(template_id, scale) + config.obstacle_gap
    x_min, y_min, x_max, y_max = board.interior
    if x_max - x_min < 2 * margin or y_max - y_min < 2 * margin:
        return None
    cx = rng.uniform(x_min + margin, x_max - margin)
    cy = rng.uniform(y_min + margin, y_max - margin)
    occupancy = place_template(board, template_id, (cx, cy), scale, angle)
    if not occupancy.any():
        return None
    return MaskShape(occupancy, anchor=(cx, cy))
