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

import itertools
from dataclasses import dataclass

import numpy as np

from .physics import ObstacleType, SolidBackground, TextureBackground, DEFAULT_RADIUS
from .shapes import texture_image

SUPERSAMPLE = 16
MIN_CONTRAST = 0.2

##################################################


class RenderError(Exception):
    """Base class for intuiphys render exceptions."""
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class BadPaletteIndex(RenderError):
    pass


class OutOfBounds(RenderError):
    pass


class EmptyInput(RenderError):
    pass

##################################################


@dataclass(frozen=True)
class Palette:
    """Obstacle/background colours plus the ball and wall colours.

    Every pair among all the colours differs by at least MIN_CONTRAST
    in some channel.

    """
    colors: tuple
    ball: tuple = (1.0, 0.40, 0.75)
    wall: tuple = (0.15, 0.15, 0.15)

    def __post_init__(self):
        object.__setattr__(self, 'colors', tuple(tuple(float(v) for v in c) for c in self.colors))
        object.__setattr__(self, 'ball', tuple(float(v) for v in self.ball))
        object.__setattr__(self, 'wall', tuple(float(v) for v in self.wall))
        if len(self.colors) < 8:
            raise RenderError("Palette needs at least 8 colours.")
        for c in self.all_colors():
            if len(c) != 3 or min(c) < 0 or max(c) > 1:
                raise RenderError(f"Invalid palette colour: {c}")
        if self.min_contrast() < MIN_CONTRAST:
            raise RenderError(f"Palette contrast {self.min_contrast():.3f} below {MIN_CONTRAST}.")

    def __len__(self):
        return len(self.colors)

    def all_colors(self):
        return self.colors + (self.ball, self.wall)

    def min_contrast(self):
        return min(max(abs(a - b) for a, b in zip(c1, c2))
                   for c1, c2 in itertools.combinations(self.all_colors(), 2))

    def color(self, index):
        if not isinstance(index, (int, np.integer)) or not 0 <= index < len(self.colors):
            raise BadPaletteIndex(f"Palette index {index} out of range (0..{len(self.colors) - 1}).")
        return np.array(self.colors[index])

    def to_dict(self):
        return {'colors': [list(c) for c in self.colors],
                'ball': list(self.ball),
                'wall': list(self.wall)}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(tuple(c) for c in data['colors']),
                   tuple(data['ball']), tuple(data['wall']))


DEFAULT_PALETTE = Palette((
    (0.90, 0.90, 0.20),
    (0.20, 0.60, 0.95),
    (0.20, 0.80, 0.30),
    (0.95, 0.55, 0.10),
    (0.55, 0.25, 0.85),
    (0.10, 0.40, 0.40),
    (0.95, 0.95, 0.95),
    (0.60, 0.40, 0.20),
))

##################################################


def _paint(image, mask, color):
    image[:, mask] = np.asarray(color)[:, None]


def render_scenario(scenario, palette=DEFAULT_PALETTE):
    """Render the static scenario as a 3 x H x W image in [0, 1].

    The background (solid colour or tiled texture) is painted first,
    then the wall band, then the obstacles in list order.

    """
    board = scenario.board
    h, w = board.shape
    background = scenario.background
    if isinstance(background, SolidBackground):
        image = np.empty((3, h, w))
        image[:] = palette.color(background.color_index)[:, None, None]
    elif isinstance(background, TextureBackground):
        image = texture_image(background.texture_id, h, w).copy()
    else:
        raise RenderError(f"Unknown background: {background!r}")
    _paint(image, board.wall_mask(), palette.wall)
    for obstacle in scenario.obstacles:
        _paint(image, obstacle.occupancy(board), palette.color(obstacle.color_index))
    return image


def disc_coverage(shape, positions, radii, supersample=SUPERSAMPLE):
    """Fraction of each pixel covered by the union of discs.

    Pixel (i, j) spans [j - 0.5, j + 0.5] x [i - 0.5, i + 0.5].  Each
    pixel is split into `supersample` columns; within a column the
    vertical chord of the disc through the column centre is clipped
    to the pixel exactly, and the column fractions are averaged.
    Overlapping discs are summed and clipped at full coverage, which
    is exact for discs that do not overlap.

    """
    h, w = shape
    s = supersample
    offsets = (np.arange(s) + 0.5) / s - 0.5
    covered = np.zeros((h, w, s))
    for (x, y), r in zip(positions, radii):
        x0 = max(int(np.floor(x - r - 1)), 0)
        x1 = min(int(np.ceil(x + r + 1)) + 1, w)
        y0 = max(int(np.floor(y - r - 1)), 0)
        y1 = min(int(np.ceil(y + r + 1)) + 1, h)
        if x0 >= x1 or y0 >= y1:
            continue
        sx = np.arange(x0, x1)[None, :, None] + offsets[None, None, :]
        half = np.sqrt(np.maximum(r * r - (sx - x) ** 2, 0.0))
        rows = np.arange(y0, y1, dtype=np.float64)[:, None, None]
        top = np.maximum(rows - 0.5, y - half)
        bottom = np.minimum(rows + 0.5, y + half)
        covered[y0:y1, x0:x1] += np.clip(bottom - top, 0.0, 1.0)
    return np.minimum(covered, 1.0).mean(axis=2)


def _check_positions(board, positions):
    for x, y in positions:
        if not board.contains(x, y):
            raise OutOfBounds(f"Ball position ({x}, {y}) outside the playable interior.")


def _radii(positions, radius):
    if np.ndim(radius) == 0:
        return [float(radius)] * len(positions)
    return [float(r) for r in radius]


class FrameRenderer:
    """Renders many frames of one scenario.

    The static layers are rendered once; each frame then paints the
    balls over Above/Bounce obstacles and repaints Under obstacles on
    top.

    """
    def __init__(self, scenario, palette=DEFAULT_PALETTE, supersample=SUPERSAMPLE):
        self.scenario = scenario
        self.palette = palette
        self.supersample = supersample
        self.base = render_scenario(scenario, palette)
        board = scenario.board
        self.under = np.zeros(board.shape, dtype=bool)
        for obstacle in scenario.obstacles:
            if obstacle.kind is ObstacleType.UNDER:
                self.under |= obstacle.occupancy(board)
        self._ball = np.asarray(palette.ball)[:, None, None]

    def frame(self, positions, radius=DEFAULT_RADIUS):
        positions = [tuple(p) for p in positions]
        if not positions:
            return self.base.copy()
        _check_positions(self.scenario.board, positions)
        coverage = disc_coverage(self.scenario.board.shape, positions,
                                 _radii(positions, radius), self.supersample)
        image = self.base * (1.0 - coverage) + self._ball * coverage
        image[:, self.under] = self.base[:, self.under]
        return np.clip(image, 0.0, 1.0)

    def run_frames(self, run):
        """All T frames of a run as a T x 3 x H x W array."""
        return np.stack([self.frame(run.positions(t), run.radii) for t in range(run.T)])


def render_frame(scenario, ball_positions, palette=DEFAULT_PALETTE, radius=DEFAULT_RADIUS,
                 supersample=SUPERSAMPLE):
    """Render scenario with balls, honouring obstacle depth."""
    return FrameRenderer(scenario, palette, supersample).frame(ball_positions, radius)


def render_run(run, palette=DEFAULT_PALETTE):
    return FrameRenderer(run.scenario, palette).run_frames(run)


def render_heatmap(ball_positions, sigma, board):
    """Sum of unit-peak isotropic Gaussians, one per ball."""
    if not sigma > 0:
        raise RenderError("sigma must be positive.")
    xx, yy = board.grid()
    heat = np.zeros(board.shape)
    for x, y in ball_positions:
        heat += np.exp(-((xx - x) ** 2 + (yy - y) ** 2) / (2.0 * sigma * sigma))
    return heat


def median_background(frames, count):
    """Per-pixel lower median of the first `count` frames."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 4 or len(frames) == 0:
        raise EmptyInput("No frames to take the median of.")
    if not 1 <= count <= len(frames):
        raise EmptyInput(f"Median count {count} outside 1..{len(frames)}.")
    return np.sort(frames[:count], axis=0)[(count - 1) // 2]
