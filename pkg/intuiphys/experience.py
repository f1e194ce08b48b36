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

import numpy as np

# channel layout of a summary stack
DYNAMIC = slice(0, 3)
MEDIAN = slice(3, 6)


class ExperienceError(Exception):
    """Base class for intuiphys experience exceptions."""
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class ZeroLength(ExperienceError):
    pass


class DimensionMismatch(ExperienceError):
    pass


class EmptyInput(ExperienceError):
    pass


class ShapeMismatch(ExperienceError):
    pass

##################################################


def dynamic_image_coefficients(T):
    """Rank pooling weights for a T-frame video.

    alpha_t is the sum over i = t..T-1 of (2(i+1) - T - 1) / (i + 1).
    The weights sum to zero.

    """
    if T < 1:
        raise ZeroLength("Cannot pool a video with no frames.")
    i = np.arange(T, dtype=np.float64)
    terms = (2.0 * (i + 1) - T - 1) / (i + 1)
    return np.cumsum(terms[::-1])[::-1]


def _stack(frames):
    if len(frames) == 0:
        raise EmptyInput("No frames given.")
    try:
        frames = np.asarray(frames, dtype=np.float64)
    except ValueError as e:
        raise DimensionMismatch("Frames have differing dimensions.") from e
    if frames.dtype == object or frames.ndim != 4:
        raise DimensionMismatch(f"Expected T x C x H x W frames, got shape {frames.shape}.")
    return frames


def dynamic_image(frames):
    """Weighted sum of frames with the rank pooling weights (unbounded)."""
    frames = _stack(frames)
    return np.tensordot(dynamic_image_coefficients(len(frames)), frames, axes=1)


def median_image(frames):
    """Per-pixel lower median over all frames."""
    frames = _stack(frames)
    return np.sort(frames, axis=0)[(len(frames) - 1) // 2]


def summarize_run(frames):
    """Six-channel stack: dynamic image then median image."""
    frames = _stack(frames)
    return np.concatenate([dynamic_image(frames), median_image(frames)], axis=0)


def pseudo_experience(prediction_frames):
    """Stand-in experience when no runs are available.

    A single one-frame run made of the prediction run's first frame.

    """
    frames = _stack(prediction_frames)
    return [frames[:1]]


def _uniform(tensors):
    if len(tensors) == 0:
        raise EmptyInput("Nothing to pool.")
    shapes = {np.shape(t) for t in tensors}
    if len(shapes) != 1:
        raise ShapeMismatch(f"Cannot pool tensors of shapes {sorted(shapes)}.")
    return np.asarray(tensors, dtype=np.float64)


def pool_masks(per_run_masks):
    """Elementwise maximum over runs."""
    return np.maximum.reduce(_uniform(per_run_masks), axis=0)


def appearance_sources(per_run_tensors):
    """Run index selected for each channel: maximal squared energy, lowest index on ties."""
    stack = _uniform(per_run_tensors)
    energy = np.sum(stack ** 2, axis=(2, 3))
    return np.argmax(energy, axis=0)


def pool_appearance(per_run_tensors):
    """Channel-wise selection of whole planes from the most energetic run."""
    stack = _uniform(per_run_tensors)
    if stack.ndim != 4:
        raise ShapeMismatch("Appearance tensors must be C x H x W.")
    k = appearance_sources(stack)
    return stack[k, np.arange(stack.shape[1])]


def normalize_for_display(stack):
    """Per-channel min-max normalisation to [0, 1]; constant channels map to 0."""
    stack = np.asarray(stack, dtype=np.float64)
    lo = stack.min(axis=(1, 2), keepdims=True)
    hi = stack.max(axis=(1, 2), keepdims=True)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (stack - lo) / span
