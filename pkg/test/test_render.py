import math

import numpy as np
import pytest
from scipy.integrate import quad

from intuiphys.physics import (
    BoardSpec,
    Obstacle,
    ObstacleType,
    RotatedRect,
    Scenario,
    SolidBackground,
    TextureBackground,
)
from intuiphys.render import (
    DEFAULT_PALETTE,
    BadPaletteIndex,
    EmptyInput,
    FrameRenderer,
    OutOfBounds,
    Palette,
    RenderError,
    disc_coverage,
    median_background,
    render_frame,
    render_heatmap,
    render_scenario,
)

BOARD = BoardSpec(64, 64)


def two_rects(kinds=(ObstacleType.BOUNCE, ObstacleType.BOUNCE), background=SolidBackground(7)):
    return Scenario(BOARD, (
        Obstacle(RotatedRect((20, 20), (5, 4)), kinds[0], 1),
        Obstacle(RotatedRect((44, 40), (6, 6), 0.4), kinds[1], 3),
    ), background)


def test_default_palette():
    assert len(DEFAULT_PALETTE) == 8
    assert DEFAULT_PALETTE.min_contrast() >= 0.2
    assert Palette.from_dict(DEFAULT_PALETTE.to_dict()) == DEFAULT_PALETTE


def test_bad_palettes():
    with pytest.raises(RenderError):
        Palette(DEFAULT_PALETTE.colors[:7])
    close = DEFAULT_PALETTE.colors[:7] + ((0.85, 0.85, 0.25),)
    with pytest.raises(RenderError):
        Palette(close)
    with pytest.raises(BadPaletteIndex):
        DEFAULT_PALETTE.color(8)


def test_empty_scenario():
    image = render_scenario(Scenario(BOARD, background=SolidBackground(2)))
    walls = BOARD.wall_mask()
    assert image.shape == (3, 64, 64)
    assert np.all(image[:, ~walls] == np.array(DEFAULT_PALETTE.colors[2])[:, None])
    assert np.all(image[:, walls] == np.array(DEFAULT_PALETTE.wall)[:, None])


def test_obstacle_colors():
    image = render_scenario(two_rects())
    assert np.array_equal(image[:, 20, 20], DEFAULT_PALETTE.color(1))
    assert np.array_equal(image[:, 40, 44], DEFAULT_PALETTE.color(3))
    assert np.array_equal(render_scenario(two_rects()), image)


def test_texture_background():
    scenario = Scenario(BOARD, background=TextureBackground(2))
    image = render_scenario(scenario)
    interior = image[:, 10:50, 10:50]
    assert image.min() >= 0 and image.max() <= 1
    assert interior.std() > 0.01
    assert np.array_equal(render_scenario(scenario), image)


def test_unknown_color():
    scenario = Scenario(BOARD, (Obstacle(RotatedRect((20, 20), (3, 3)), ObstacleType.ABOVE, 12),))
    with pytest.raises(BadPaletteIndex):
        render_scenario(scenario)


def test_no_balls_is_scenario():
    scenario = two_rects()
    assert np.array_equal(render_frame(scenario, []), render_scenario(scenario))


def test_depth_rule():
    scenario = two_rects((ObstacleType.UNDER, ObstacleType.ABOVE))
    image = render_frame(scenario, [(20, 20), (44, 40)])
    assert np.array_equal(image[:, 20, 20], DEFAULT_PALETTE.color(1))
    assert np.array_equal(image[:, 40, 44], np.array(DEFAULT_PALETTE.ball))


def test_depth_fuzz():
    rng = np.random.default_rng(3)
    scenario = two_rects((ObstacleType.UNDER, ObstacleType.ABOVE))
    renderer = FrameRenderer(scenario)
    base = render_scenario(scenario)
    under = scenario.obstacles[0].occupancy(BOARD)
    above = scenario.obstacles[1].occupancy(BOARD)
    for _ in range(100):
        positions = rng.uniform(4.0, 59.0, size=(int(rng.integers(1, 4)), 2))
        image = renderer.frame(positions)
        assert np.array_equal(image[:, under], base[:, under])
        coverage = disc_coverage(BOARD.shape, positions, [2.0] * len(positions))
        full = above & (coverage == 1.0)
        assert np.all(image[:, full] == np.array(DEFAULT_PALETTE.ball)[:, None])
        assert image.min() >= 0 and image.max() <= 1


def exact_pixel_area(px, py, x, y, r):
    def chord(u):
        half = math.sqrt(max(r * r - (u - x) ** 2, 0.0))
        return min(max(min(py + 0.5, y + half) - max(py - 0.5, y - half), 0.0), 1.0)
    lo, hi = px - 0.5, px + 0.5
    points = [p for p in (x - r, x + r) if lo < p < hi]
    return quad(chord, lo, hi, points=points or None)[0]


def test_coverage_against_exact_area():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x, y = rng.uniform(10, 50, size=2)
        r = rng.uniform(1.5, 4.0)
        coverage = disc_coverage(BOARD.shape, [(x, y)], [r])
        for py in range(int(y - r) - 1, int(y + r) + 2):
            for px in range(int(x - r) - 1, int(x + r) + 2):
                assert coverage[py, px] == pytest.approx(exact_pixel_area(px, py, x, y, r), abs=0.03)
        assert coverage.sum() == pytest.approx(np.pi * r * r, abs=0.05)


def test_coverage_of_touching_discs():
    coverage = disc_coverage(BOARD.shape, [(20.3, 30.0), (24.3, 30.0)], [2.0, 2.0])
    assert coverage.max() == 1.0
    assert coverage.sum() == pytest.approx(2 * np.pi * 4, abs=0.1)


def test_ball_out_of_bounds():
    with pytest.raises(OutOfBounds):
        render_frame(two_rects(), [(0.5, 30)])


def test_heatmap():
    heat = render_heatmap([(32, 32)], 2.0, BOARD)
    assert heat[32, 32] == 1.0
    assert heat[32, 34] == pytest.approx(np.exp(-0.5))
    assert not render_heatmap([], 2.0, BOARD).any()
    two = render_heatmap([(10, 32), (50, 32)], 2.0, BOARD)
    assert two[32, 10] == pytest.approx(1.0, abs=1e-6)
    assert two[32, 50] == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(two, render_heatmap([(50, 32), (10, 32)], 2.0, BOARD), atol=1e-12)
    with pytest.raises(RenderError):
        render_heatmap([(10, 10)], 0.0, BOARD)


def test_median_background():
    scenario = two_rects()
    renderer = FrameRenderer(scenario)
    frames = np.stack([renderer.frame([(30 + 6 * t, 50)]) for t in range(4)])
    assert np.array_equal(median_background(frames, 1), frames[0])
    assert np.array_equal(median_background(frames, 4), render_scenario(scenario))
    static = np.stack([frames[0]] * 5)
    assert np.array_equal(median_background(static, 3), frames[0])
    with pytest.raises(EmptyInput):
        median_background(frames, 5)
