import numpy as np
import pytest

from intuiphys.physics import BoardSpec, BallState, Scenario, simulate
from intuiphys.render import render_run, render_scenario
from intuiphys.experience import (
    DYNAMIC,
    MEDIAN,
    DimensionMismatch,
    EmptyInput,
    ShapeMismatch,
    ZeroLength,
    appearance_sources,
    dynamic_image,
    dynamic_image_coefficients,
    median_image,
    normalize_for_display,
    pool_appearance,
    pool_masks,
    pseudo_experience,
    summarize_run,
)


def brute_force_coefficients(T):
    return [sum((2 * (i + 1) - T - 1) / (i + 1) for i in range(t, T)) for t in range(T)]


@pytest.fixture(scope='module')
def ball_frames():
    board = BoardSpec(32, 32)
    run = simulate(Scenario(board), [BallState((8, 10), (1.3, 0.7))], 60)
    return render_run(run)


def test_coefficients():
    assert list(dynamic_image_coefficients(1)) == [0.0]
    assert list(dynamic_image_coefficients(2)) == [-0.5, 0.5]
    np.testing.assert_allclose(dynamic_image_coefficients(3), [-4 / 3, 2 / 3, 2 / 3], atol=1e-15)
    for T in (4, 17, 60):
        np.testing.assert_allclose(dynamic_image_coefficients(T), brute_force_coefficients(T),
                                   atol=1e-12)
    with pytest.raises(ZeroLength):
        dynamic_image_coefficients(0)


def test_coefficients_sum_to_zero():
    for T in range(1, 501):
        assert abs(dynamic_image_coefficients(T).sum()) <= 1e-9


def test_constant_video():
    frames = np.ones((9, 3, 4, 4)) * 0.3
    assert np.abs(dynamic_image(frames)).max() <= 1e-12


def test_two_frames():
    rng = np.random.default_rng(1)
    a, b = rng.uniform(size=(2, 3, 5, 5))
    assert np.array_equal(dynamic_image([a, b]), 0.5 * (b - a))
    assert np.array_equal(dynamic_image([b, a]), -dynamic_image([a, b]))


def test_matches_weighted_sum(ball_frames):
    alpha = brute_force_coefficients(len(ball_frames))
    expected = np.zeros(ball_frames.shape[1:])
    for a, frame in zip(alpha, ball_frames):
        expected += a * frame
    np.testing.assert_allclose(dynamic_image(ball_frames), expected, atol=1e-9)


def test_linearity():
    rng = np.random.default_rng(2)
    x, y = rng.uniform(size=(2, 12, 3, 6, 6))
    np.testing.assert_allclose(dynamic_image(2.5 * x - 0.7 * y),
                               2.5 * dynamic_image(x) - 0.7 * dynamic_image(y), atol=1e-9)


def test_reversal_changes_output(ball_frames):
    assert not np.allclose(dynamic_image(ball_frames[::-1]), dynamic_image(ball_frames))


def test_bad_input():
    with pytest.raises(EmptyInput):
        dynamic_image([])
    with pytest.raises(DimensionMismatch):
        dynamic_image([np.zeros((3, 4, 4)), np.zeros((3, 5, 4))])
    with pytest.raises(DimensionMismatch):
        median_image(np.zeros((3, 4, 4)))


def test_median():
    frames = np.array([0.1, 0.9, 0.5])[:, None, None, None] * np.ones((3, 1, 2, 2))
    assert np.all(median_image(frames) == 0.5)
    single = np.random.default_rng(3).uniform(size=(1, 3, 4, 4))
    assert np.array_equal(median_image(single), single[0])


def test_median_removes_ball(ball_frames):
    # no pixel is under the ball for half of the run
    assert np.array_equal(median_image(ball_frames), render_scenario(Scenario(BoardSpec(32, 32))))


def test_summarize(ball_frames):
    stack = summarize_run(ball_frames)
    assert stack.shape == (6, 32, 32)
    assert np.array_equal(stack[DYNAMIC], dynamic_image(ball_frames))
    assert np.array_equal(stack[MEDIAN], median_image(ball_frames))
    static = np.stack([ball_frames[0]] * 10)
    stack = summarize_run(static)
    assert np.abs(stack[DYNAMIC]).max() <= 1e-12
    assert np.array_equal(stack[MEDIAN], ball_frames[0])
    shuffled = ball_frames[np.random.default_rng(4).permutation(len(ball_frames))]
    assert np.array_equal(summarize_run(shuffled)[MEDIAN], median_image(ball_frames))
    assert not np.allclose(summarize_run(shuffled)[DYNAMIC], dynamic_image(ball_frames))


def test_pseudo_experience(ball_frames):
    runs = pseudo_experience(ball_frames)
    assert len(runs) == 1
    assert runs[0].shape == (1,) + ball_frames.shape[1:]
    stack = summarize_run(runs[0])
    assert not stack[DYNAMIC].any()
    assert np.array_equal(stack[MEDIAN], ball_frames[0])


def test_pool_masks():
    rng = np.random.default_rng(5)
    masks = list(rng.uniform(size=(4, 1, 6, 6)))
    pooled = pool_masks(masks)
    assert np.array_equal(pool_masks(masks[:1]), masks[0])
    assert np.array_equal(pool_masks(masks[::-1]), pooled)
    assert np.array_equal(pool_masks([pooled]), pooled)
    point = np.zeros((1, 6, 6))
    point[0, 2, 3] = 1.0
    assert np.array_equal(pool_masks([np.zeros((1, 6, 6)), point]), point)
    with pytest.raises(ShapeMismatch):
        pool_masks([np.zeros((1, 6, 6)), np.zeros((1, 5, 6))])
    with pytest.raises(EmptyInput):
        pool_masks([])


def test_pool_appearance():
    # energy of run 1 is (4, 0), of run 2 is (1, 9)
    run1 = np.zeros((2, 2, 2))
    run1[0] = [[1, 1], [1, 1]]
    run2 = np.zeros((2, 2, 2))
    run2[0] = [[1, 0], [0, 0]]
    run2[1] = [[3, 0], [0, 0]]
    pooled = pool_appearance([run1, run2])
    assert list(appearance_sources([run1, run2])) == [0, 1]
    assert np.array_equal(pooled[0], run1[0])
    assert np.array_equal(pooled[1], run2[1])
    assert list(appearance_sources([3 * run1, 3 * run2])) == [0, 1]
    assert np.array_equal(pool_appearance([run1]), run1)


def test_pool_appearance_planes_come_from_inputs():
    rng = np.random.default_rng(6)
    runs = list(rng.normal(size=(5, 6, 4, 4)))
    pooled = pool_appearance(runs)
    for c in range(6):
        assert any(np.array_equal(pooled[c], r[c]) for r in runs)


def test_appearance_tie_goes_to_first_run():
    run = np.ones((1, 2, 2))
    assert list(appearance_sources([run, run.copy()])) == [0]


def test_normalize_for_display():
    stack = np.array([[[-2.0, 2.0]], [[5.0, 5.0]]])
    out = normalize_for_display(stack)
    assert np.array_equal(out[0], [[0.0, 1.0]])
    assert not out[1].any()
