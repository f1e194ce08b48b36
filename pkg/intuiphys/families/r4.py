from intuiphys.families.r2 import propose_rect

description = "Three or four rotated rectangles"


def obstacle_count(rng):
    return rng.integers(3, 5)


propose = propose_rect
