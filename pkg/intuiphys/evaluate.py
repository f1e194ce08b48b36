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

import csv
import logging
from dataclasses import dataclass, astuple, fields
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .physics import DEFAULT_SUBSTEPS, simulate_without_obstacles, encountered_kinds
from .render import DEFAULT_PALETTE, FrameRenderer, render_heatmap
from .masknet import ABLATIONS, TrainConfig, encode, train, evaluate_mask_error
from .util import mean_std

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD_FRACTION = 0.3
DEFAULT_MIN_AREA = 4
DEFAULT_HORIZONS = (20, 60, 100)
REFERENCE_AREA = 64 * 64

##################################################


class EvalError(Exception):
    """Base class for intuiphys evaluation exceptions."""
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class ShapeMismatch(EvalError):
    pass


class HorizonTooLong(EvalError):
    pass

##################################################


@dataclass
class BlobDetection:
    centers: list
    masses: list
    threshold: float
    min_area: int

    def __len__(self):
        return len(self.centers)


def detect_blobs(heatmap, threshold=None, min_area=DEFAULT_MIN_AREA):
    """Centres of the 8-connected above-threshold regions of a heatmap.

    With no threshold, 0.3 of the heatmap's peak is used.  Centres are
    (x, y) heat-weighted centroids, sorted by descending blob mass.

    """
    heatmap = np.asarray(heatmap, dtype=np.float64)
    peak = float(heatmap.max()) if heatmap.size else 0.0
    if threshold is None:
        threshold = DEFAULT_THRESHOLD_FRACTION * peak
    if peak <= 0 or not threshold > 0:
        return BlobDetection([], [], float(threshold), min_area)
    binary = heatmap >= threshold
    labels, count = ndimage.label(binary, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return BlobDetection([], [], float(threshold), min_area)
    index = np.arange(1, count + 1)
    areas = ndimage.sum_labels(binary, labels, index)
    masses = ndimage.sum_labels(heatmap, labels, index)
    centroids = ndimage.center_of_mass(heatmap, labels, index)
    blobs = [(float(m), (float(c[1]), float(c[0])))
             for a, m, c in zip(areas, masses, centroids) if a >= min_area]
    blobs.sort(key=lambda b: -b[0])
    return BlobDetection([c for _, c in blobs], [m for m, _ in blobs], float(threshold), min_area)


def position_error(pred_centers, gt_centers, board):
    """Mean distance of optimally matched centres over the board diagonal.

    Unmatched centres do not contribute; with nothing to match the
    error is 0.

    """
    if len(pred_centers) == 0 or len(gt_centers) == 0:
        return 0.0
    cost = cdist(np.asarray(pred_centers, dtype=np.float64).reshape(-1, 2),
                 np.asarray(gt_centers, dtype=np.float64).reshape(-1, 2))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean() / board.diagonal)


def video_l2(pred_frames, gt_frames):
    """Mean per-frame squared error, scaled to a 64x64 board."""
    pred = np.asarray(pred_frames, dtype=np.float64)
    gt = np.asarray(gt_frames, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 4:
        raise ShapeMismatch(f"Video shapes differ or are not T x C x H x W: {pred.shape} vs {gt.shape}.")
    if len(pred) == 0:
        return 0.0
    h, w = pred.shape[2:]
    per_frame = np.sum((pred - gt) ** 2, axis=(1, 2, 3))
    return float(per_frame.mean() * REFERENCE_AREA / (h * w))

##################################################


@dataclass
class MetricsRow:
    horizon: int
    kind: str
    samples: int
    object_count: float
    object_count_std: float
    true_count: float
    position_error: float
    position_error_std: float
    video_l2: float
    video_l2_std: float


class MetricsReport:
    """Per-horizon (and optionally per-kind) baseline metrics."""

    def __init__(self, rows):
        self.rows = list(rows)

    def __repr__(self):
        return '<intuiphys {} rows={}>'.format(self.__class__.__name__, len(self.rows))

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        if not isinstance(other, MetricsReport):
            return NotImplemented
        return self.rows == other.rows

    __hash__ = None

    def row(self, horizon, kind='all'):
        for r in self.rows:
            if r.horizon == horizon and r.kind == kind:
                return r
        raise KeyError((horizon, kind))

    @staticmethod
    def columns():
        return [f.name for f in fields(MetricsRow)]

    def write_csv(self, path):
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(self.columns())
            for r in self.rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple(r)])

    def table(self):
        header = ('T_test', 'kind', 'n', '# obj.', 'true', 'Vid. L2', 'Pos. err.')
        lines = ['{:>6} {:>7} {:>5} {:>13} {:>5} {:>17} {:>17}'.format(*header)]
        for r in self.rows:
            lines.append('{:>6} {:>7} {:>5} {:>13} {:>5.2f} {:>17} {:>17}'.format(
                r.horizon, r.kind, r.samples,
                f'{r.object_count:.2f}±{r.object_count_std:.2f}',
                r.true_count,
                f'{r.video_l2:.3f}±{r.video_l2_std:.3f}',
                f'{r.position_error:.4f}±{r.position_error_std:.4f}'))
        return '\n'.join(lines)


def _evaluate_sample(sample, horizons, palette, sigma, substeps):
    run = sample.prediction_run
    board = sample.scenario.board
    longest = max(horizons)
    if run.T < longest:
        raise HorizonTooLong(f"Sample {sample.seed}: run has {run.T} frames, horizon {longest} requested.")
    predicted = simulate_without_obstacles(sample.scenario, run.initial_states(), longest, substeps)
    renderer = FrameRenderer(sample.scenario, palette)
    if sigma is None:
        sigma = max(run.radii)

    pos = np.empty(longest)
    count = np.empty(longest)
    l2 = np.empty(longest)
    for t in range(longest):
        pred_positions = predicted.positions(t)
        gt_positions = run.positions(t)
        pos[t] = position_error(pred_positions, gt_positions, board)
        heat = render_heatmap(pred_positions, sigma, board)
        count[t] = len(detect_blobs(heat))
        l2[t] = video_l2(renderer.frame(pred_positions, run.radii)[None],
                         renderer.frame(gt_positions, run.radii)[None])

    result = {}
    for h in horizons:
        kinds = encountered_kinds(run.truncate(h))
        labels = ['all'] + ([k.label for k in kinds] if kinds else ['none'])
        result[h] = (pos[:h].mean(), count[:h].mean(), l2[:h].mean(), run.n_balls, labels)
    return result


def evaluate_baseline(test_set, horizons=DEFAULT_HORIZONS, palette=DEFAULT_PALETTE,
                      by_kind=False, sigma=None, substeps=DEFAULT_SUBSTEPS, threads=1):
    """Score the obstacle-free simulator against the true prediction runs.

    For each horizon T the position error, detected object count and
    video L2 are averaged over the first T frames of each sample, then
    over samples.  With by_kind, rows are added per obstacle kind the
    true run encountered before T ('none' if it met no obstacle).

    """
    horizons = sorted(set(int(h) for h in horizons))
    if not horizons or horizons[0] < 1:
        raise EvalError("Horizons must be positive.")

    def work(sample):
        return _evaluate_sample(sample, horizons, palette, sigma, substeps)

    if threads <= 1:
        per_sample = [work(s) for s in test_set]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_sample = list(pool.map(work, test_set))

    rows = []
    for h in horizons:
        groups = {}
        for result in per_sample:
            pos, count, l2, n_balls, labels = result[h]
            for label in labels if by_kind else ['all']:
                groups.setdefault(label, []).append((pos, count, l2, n_balls))
        for label in ['all', 'none', 'bounce', 'above', 'under']:
            if label not in groups:
                continue
            values = np.array(groups[label], dtype=np.float64)
            pmean, pstd = mean_std(values[:, 0])
            cmean, cstd = mean_std(values[:, 1])
            lmean, lstd = mean_std(values[:, 2])
            rows.append(MetricsRow(h, label, len(values), cmean, cstd,
                                   float(values[:, 3].mean()), pmean, pstd, lmean, lstd))
    return MetricsReport(rows)

##################################################
# mask error experiments


def _encode_for(n_values, samples, palette):
    """Encodings per experience count; counts above zero share one encoding at the largest."""
    top = max(n_values)
    full = encode(samples, top, palette) if top > 0 else []
    out = {}
    for n in n_values:
        if n == 0:
            out[n] = encode(samples, 0, palette)
        else:
            out[n] = [e.head(n) for e in full]
    return out


def experience_sweep(train_samples, test_samples, n_values, config=None, palette=DEFAULT_PALETTE):
    """Train and score one regressor per experience count."""
    if config is None:
        config = TrainConfig()
    train_sets = _encode_for(n_values, train_samples, palette)
    test_sets = _encode_for(n_values, test_samples, palette)
    reports = []
    for n in n_values:
        log.info("training with N=%d", n)
        result = train(train_sets[n], n, config)
        reports.append(evaluate_mask_error(result.model, test_sets[n], n,
                                           config.channel_ablation, palette))
    return reports


def ablation_sweep(train_samples, test_samples, n_used, config=None, ablations=ABLATIONS,
                   palette=DEFAULT_PALETTE):
    """Train and score one regressor per channel ablation, same seeds."""
    if config is None:
        config = TrainConfig()
    encoded = encode(train_samples, n_used, palette)
    encoded_test = encode(test_samples, n_used, palette)
    reports = []
    for ablation in ablations:
        cfg = TrainConfig(**dict(config.to_dict(), channel_ablation=ablation))
        result = train(encoded, n_used, cfg)
        reports.append(evaluate_mask_error(result.model, encoded_test, n_used, ablation, palette))
    return reports


def write_mask_csv(path, reports):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['n_used', 'ablation', 'error', 'error_std',
                         'baseline', 'baseline_std', 'samples'])
        for r in reports:
            writer.writerow([r.n_used, r.ablation, repr(r.mean), repr(r.std),
                             repr(r.baseline_mean), repr(r.baseline_std), r.count])
