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
import logging
from dataclasses import dataclass, asdict, fields
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .physics import (
    BoardSpec,
    BallState,
    Obstacle,
    ObstacleType,
    Scenario,
    SolidBackground,
    TextureBackground,
    simulate,
)
from .render import DEFAULT_PALETTE, Palette
from .families import get_family, FamilyError
from .util import derive_seed

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 1000
TEST_MASTER_SEED = 0x5EED0F1C5
TEST_SET_SIZE = 200
EXPERIENCE_FRAMES = 60
DEFAULT_EXPERIENCE_RUNS = 7

KINDS = (ObstacleType.BOUNCE, ObstacleType.ABOVE, ObstacleType.UNDER)

DESK_PRESET = {
    'board_size': 32,
    'obstacle_size_range': (5, 8),
    'custom_scale_range': (0.5, 1.0),
}

##################################################


class DatasetError(Exception):
    """Base class for intuiphys dataset exceptions."""
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class PlacementFailure(DatasetError):
    pass

##################################################


@dataclass(frozen=True)
class ScenarioConfig:
    family: str = 'r2'
    board_size: int = 64
    background: str = 'solid'
    palette: Palette = DEFAULT_PALETTE
    obstacle_size_range: tuple = (10, 17)
    custom_scale_range: tuple = (1.0, 2.0)
    wall_thickness: int = 2
    ball_radius: float = 2.0
    speed_range: tuple = (1.0, 2.5)
    aim_jitter_deg: float = 15.0
    substeps: int = 4
    n_balls: int = 1
    experience_balls: int = None
    experience_frames: int = EXPERIENCE_FRAMES
    obstacle_gap: int = 1
    textures: int = 4

    def __post_init__(self):
        for name in ('obstacle_size_range', 'custom_scale_range', 'speed_range'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if isinstance(self.palette, dict):
            object.__setattr__(self, 'palette', Palette.from_dict(self.palette))
        try:
            get_family(self.family)
        except FamilyError as e:
            raise DatasetError(str(e))
        if self.background not in ('solid', 'texture'):
            raise DatasetError(f"background must be 'solid' or 'texture', not '{self.background}'.")
        if self.board_size < 16:
            raise DatasetError("board_size must be at least 16.")
        lo, hi = self.obstacle_size_range
        if not 0 < lo <= hi:
            raise DatasetError(f"Invalid obstacle_size_range {self.obstacle_size_range}.")
        lo, hi = self.custom_scale_range
        if not 0 < lo <= hi:
            raise DatasetError(f"Invalid custom_scale_range {self.custom_scale_range}.")
        lo, hi = self.speed_range
        if not 0 <= lo <= hi:
            raise DatasetError(f"Invalid speed_range {self.speed_range}.")
        if self.ball_radius <= 0:
            raise DatasetError("ball_radius must be positive.")
        if self.n_balls < 1:
            raise DatasetError("n_balls must be at least 1.")
        if self.experience_balls is not None and self.experience_balls < 1:
            raise DatasetError("experience_balls must be at least 1.")
        if self.substeps < 1 or self.experience_frames < 1 or self.obstacle_gap < 0:
            raise DatasetError("substeps and experience_frames must be positive, obstacle_gap non-negative.")
        if self.textures < 1:
            raise DatasetError("textures must be at least 1.")

    @classmethod
    def desk(cls, **kwargs):
        """Preset for fast desk-scale experiments on 32x32 boards."""
        params = dict(DESK_PRESET)
        params.update(kwargs)
        return cls(**params)

    @property
    def board(self):
        return BoardSpec(self.board_size, self.board_size, self.wall_thickness)

    def to_dict(self):
        data = asdict(self)
        data['palette'] = self.palette.to_dict()
        for name in ('obstacle_size_range', 'custom_scale_range', 'speed_range'):
            data[name] = list(data[name])
        return data

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DatasetError("Unknown scenario config keys: {}".format(', '.join(sorted(unknown))))
        return cls(**data)


@dataclass(frozen=True)
class MetaSample:
    scenario: Scenario
    prediction_run: object
    experience_runs: tuple
    seed: int

    @property
    def N(self):
        return len(self.experience_runs)

    @property
    def runs(self):
        """Prediction run followed by the experience runs."""
        return (self.prediction_run,) + tuple(self.experience_runs)

##################################################


def _grown(shape, board, gap):
    if hasattr(shape, 'occupancy_on'):
        return shape.occupancy_on(board, grow=gap)
    return shape.occupancy(board, grow=gap)


def sample_scenario(config, seed):
    """Sample a scenario of the configured family.

    Obstacles are placed by rejection: a candidate is discarded if,
    grown by the obstacle gap, it touches the wall band or an already
    placed obstacle.  Kind and colour are drawn independently of the
    shape and of each other.

    """
    rng = np.random.default_rng(seed)
    board = config.board
    family = get_family(config.family)
    count = family.obstacle_count(rng)
    walls = board.wall_mask()
    occupied = np.zeros(board.shape, dtype=bool)
    n_colors = len(config.palette)
    obstacles = []
    attempts = 0
    while len(obstacles) < count:
        if attempts >= MAX_ATTEMPTS:
            raise PlacementFailure(
                f"Could not place {count} obstacles on a {board.height}x{board.width} board "
                f"after {MAX_ATTEMPTS} attempts.")
        attempts += 1
        shape = family.propose(rng, board, config)
        if shape is None:
            continue
        grown = _grown(shape, board, config.obstacle_gap)
        if (grown & (walls | occupied)).any():
            log.debug("rejected obstacle candidate %d (attempt %d)", len(obstacles), attempts)
            continue
        cells = _grown(shape, board, 0)
        if not cells.any():
            continue
        occupied |= cells
        kind = KINDS[int(rng.integers(0, 3))]
        color = int(rng.integers(0, n_colors))
        obstacles.append(Obstacle(shape, kind, color))

    if config.background == 'texture':
        background = TextureBackground(int(rng.integers(0, config.textures)))
    else:
        used = {o.color_index for o in obstacles}
        free = [i for i in range(n_colors) if i not in used]
        if not free:
            raise PlacementFailure("No palette colour left for the background.")
        background = SolidBackground(free[int(rng.integers(0, len(free)))])
    return Scenario(board, tuple(obstacles), background, seed)


def _clear(scenario, x, y, r, placed):
    margin = 1e-3
    for o in scenario.obstacles:
        if o.solid and o.shape.distance(x, y)[0] < r + margin:
            return False
    for (px, py), pr in placed:
        if math.hypot(px - x, py - y) < pr + r + margin:
            return False
    return True


def sample_balls(scenario, n_balls, seed, config=None):
    """Initial ball states: uniform free positions, aimed at an obstacle."""
    if config is None:
        config = ScenarioConfig()
    if n_balls < 1:
        raise DatasetError("n_balls must be at least 1.")
    rng = np.random.default_rng(seed)
    r = config.ball_radius
    x_min, y_min, x_max, y_max = scenario.board.interior
    jitter = math.radians(config.aim_jitter_deg)
    placed = []
    attempts = 0
    while len(placed) < n_balls:
        if attempts >= MAX_ATTEMPTS:
            raise PlacementFailure(f"Could not place {n_balls} balls after {MAX_ATTEMPTS} attempts.")
        attempts += 1
        x = rng.uniform(x_min + r, x_max - r)
        y = rng.uniform(y_min + r, y_max - r)
        if _clear(scenario, x, y, r, placed):
            placed.append(((x, y), r))
        else:
            log.debug("rejected ball position (%.2f, %.2f)", x, y)

    balls = []
    for (x, y), r in placed:
        if scenario.obstacles:
            target = scenario.obstacles[int(rng.integers(0, len(scenario.obstacles)))]
            tx, ty = target.shape.centroid
            if tx == x and ty == y:
                heading = rng.uniform(0.0, 2 * math.pi)
            else:
                heading = math.atan2(ty - y, tx - x)
            heading += rng.uniform(-jitter, jitter)
        else:
            heading = rng.uniform(0.0, 2 * math.pi)
        speed = rng.uniform(*config.speed_range)
        balls.append(BallState((x, y), (speed * math.cos(heading), speed * math.sin(heading)), r))
    return balls


def sample_run(scenario, n_balls, T, seed, config=None):
    if config is None:
        config = ScenarioConfig()
    balls = sample_balls(scenario, n_balls, seed, config)
    return simulate(scenario, balls, T, substeps=config.substeps)


def experience_ball_count(config, seed):
    if config.experience_balls is not None:
        return config.experience_balls
    if config.n_balls == 1:
        return 1
    return int(np.random.default_rng(seed).integers(1, config.n_balls + 1))


def sample_meta(config, N, T_pred, seed):
    """One (scenario, prediction run, experience runs) episode.

    Sub-seeds: the scenario uses derive_seed(seed, 0), run j uses
    derive_seed(seed, 1, j) with j = 0 for the prediction run, and the
    ball count of experience run j uses derive_seed(seed, 2, j).

    """
    if N < 0:
        raise DatasetError("N must be non-negative.")
    scenario = sample_scenario(config, derive_seed(seed, 0))
    prediction = sample_run(scenario, config.n_balls, T_pred, derive_seed(seed, 1, 0), config)
    experience = []
    for j in range(1, N + 1):
        n = experience_ball_count(config, derive_seed(seed, 2, j))
        experience.append(sample_run(scenario, n, config.experience_frames,
                                     derive_seed(seed, 1, j), config))
    return MetaSample(scenario, prediction, tuple(experience), seed)


def generate(config, count, N, T_pred, master_seed, threads=1):
    """Sample `count` meta-samples; sample i uses derive_seed(master_seed, i).

    Output is independent of the thread count.

    """
    seeds = [derive_seed(master_seed, i) for i in range(count)]
    if threads <= 1:
        return [sample_meta(config, N, T_pred, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: sample_meta(config, N, T_pred, s), seeds))


def test_set(config, master_seed=TEST_MASTER_SEED, count=TEST_SET_SIZE,
             N=DEFAULT_EXPERIENCE_RUNS, T_pred=100, threads=1):
    """The fixed evaluation set of a configuration."""
    return generate(config, count, N, T_pred, master_seed, threads)

##################################################


def gt_obstacle_mask(scenario):
    """1 on wall and Bounce obstacle cells, 0 elsewhere."""
    mask = scenario.board.wall_mask()
    for o in scenario.obstacles:
        if o.solid:
            mask |= o.occupancy(scenario.board)
    return mask.astype(np.float64)


def all_on_mask(scenario):
    """Trivial baseline mask: every obstacle taken as solid."""
    return gt_obstacle_mask(scenario.with_kind(ObstacleType.BOUNCE))


def kind_census(samples):
    """Counts of obstacle kinds over a collection of samples."""
    counts = {k: 0 for k in KINDS}
    for sample in samples:
        for o in sample.scenario.obstacles:
            counts[o.kind] += 1
    return counts
