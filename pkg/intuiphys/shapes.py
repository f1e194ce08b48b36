"""
This file is part of intuiphys.

intuiphys is free software: you can redistribute it and/or modify it
under the terms of the GNU General Public License as published by the
Free Software Foundation, either version 3 of the License, or (at your
option) any later version.

intuiphys is distributed in the hope that it will be useful, but
WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU
General Public License for more details.

You should have received a copy of the GNU General Public License
along with intuiphys.  If not, see <https://www.gnu.org/licenses/>.

Copyright 2024-2026
The intuiphys developers
"""

import math

import numpy as np

TEXTURE_TILE = 32

_TEMPLATES = (
    """
    ...####...
    ..######..
    .########.
    ##########
    ##########
    ##########
    .#########
    ..#######.
    ...####...
    """,
    """
    ..######..
    .########.
    ####..####
    ###....###
    ###.......
    ###.......
    ###....###
    ####..####
    .########.
    ..######..
    """,
    """
    .####.....
    ######....
    ######....
    ######....
    #########.
    ##########
    ##########
    .########.
    """,
    """
    .###...###.
    #####.#####
    ###########
    ###########
    .#########.
    ..#######..
    ...#####...
    ....###....
    """,
)


def _parse(art):
    rows = [line.strip() for line in art.strip().splitlines()]
    return np.array([[c == '#' for c in row] for row in rows], dtype=bool)


TEMPLATES = tuple(_parse(t) for t in _TEMPLATES)


def template(template_id):
    try:
        return TEMPLATES[template_id]
    except IndexError:
        raise IndexError(f"unknown shape template: {template_id}")


def place_template(board, template_id, center, scale, angle):
    """Rasterize a scaled, rotated template onto the board grid.

    Each board cell is mapped back into template coordinates and takes
    the value of the nearest template cell.

    """
    tmpl = template(template_id)
    th, tw = tmpl.shape
    xx, yy = board.grid()
    dx = xx - center[0]
    dy = yy - center[1]
    c, s = math.cos(angle), math.sin(angle)
    u = (c * dx + s * dy) / scale + (tw - 1) / 2.0
    v = (-s * dx + c * dy) / scale + (th - 1) / 2.0
    col = np.floor(u + 0.5).astype(int)
    row = np.floor(v + 0.5).astype(int)
    inside = (col >= 0) & (col < tw) & (row >= 0) & (row < th)
    occupancy = np.zeros(board.shape, dtype=bool)
    occupancy[inside] = tmpl[row[inside], col[inside]]
    return occupancy


def template_extent(template_id, scale):
    """Radius of the circle enclosing a scaled template, in px."""
    th, tw = template(template_id).shape
    return 0.5 * scale * math.hypot(th, tw)

##################################################


def texture_tile(texture_id, size=TEXTURE_TILE):
    """Seamless 3 x size x size tile of smooth sinusoid patterns in [0, 1]."""
    rng = np.random.default_rng(int(texture_id))
    yy, xx = np.mgrid[0:size, 0:size] / size
    tile = np.empty((3, size, size))
    for ch in range(3):
        acc = np.zeros((size, size))
        for _ in range(3):
            fx, fy = rng.integers(1, 4, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            acc += np.sin(2 * np.pi * (fx * xx + fy * yy) + phase)
        tile[ch] = 0.5 + 0.5 * acc / 3.0
    return np.clip(tile, 0.0, 1.0)


def texture_image(texture_id, height, width):
    """Texture tiled over a board with zero phase at the origin."""
    tile = texture_tile(texture_id)
    reps = (1, -(-height // TEXTURE_TILE), -(-width // TEXTURE_TILE))
    return np.tile(tile, reps)[:, :height, :width]
