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
import json
import struct
import logging
from dataclasses import dataclass, asdict, fields

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .experience import DYNAMIC, MEDIAN, summarize_run, pseudo_experience, pool_masks
from .dataset import gt_obstacle_mask, all_on_mask
from .render import DEFAULT_PALETTE, FrameRenderer
from .util import derive_seed, mean_std

log = logging.getLogger(__name__)

ABLATIONS = ('none', 'zero_dynamic', 'zero_median')
ACTIVATIONS = ('relu', 'identity')

# (C_in, C_out, kernel size, activation)
DEFAULT_ARCHITECTURE = (
    (6, 16, 5, 'relu'),
    (16, 16, 3, 'relu'),
    (16, 1, 3, 'identity'),
)

CHECKPOINT_MAGIC = b'IPCK'
CHECKPOINT_VERSION = 1

##################################################


class MaskNetError(Exception):
    """Base class for intuiphys mask regressor exceptions."""
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class ShapeMismatch(MaskNetError):
    pass


class EmptyDataset(MaskNetError):
    pass


class CheckpointError(MaskNetError):
    pass

##################################################


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-2
    epochs: int = 30
    batch_size: int = 8
    seed: int = 0
    channel_ablation: str = 'none'
    divergence_retries: int = 3
    divergence_window: int = 10

    def __post_init__(self):
        if self.learning_rate < 0:
            raise MaskNetError("learning_rate must not be negative.")
        if self.epochs < 0 or self.batch_size < 1:
            raise MaskNetError("epochs must be non-negative and batch_size positive.")
        if self.channel_ablation not in ABLATIONS:
            raise MaskNetError("channel_ablation must be one of: {}".format(', '.join(ABLATIONS)))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise MaskNetError("Unknown train config keys: {}".format(', '.join(sorted(unknown))))
        return cls(**data)

##################################################


class ConvLayer:
    """Same-padded, stride-1 convolution with optional ReLU.

    Kernels are stored as (k, k, C_in, C_out).

    """
    def __init__(self, kernel, bias, activation='relu'):
        self.kernel = np.asarray(kernel, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        if activation not in ACTIVATIONS:
            raise MaskNetError(f"Unknown activation: {activation}")
        k, k2, _, cout = self.kernel.shape
        if k != k2 or k % 2 != 1 or self.bias.shape != (cout,):
            raise MaskNetError("Kernel must be k x k x C_in x C_out with odd k and matching bias.")
        self.activation = activation
        self._cache = None

    def __repr__(self):
        k, _, cin, cout = self.kernel.shape
        return '<intuiphys {} {}x{} {}->{} {}>'.format(
            self.__class__.__name__, k, k, cin, cout, self.activation)

    @property
    def size(self):
        return self.kernel.shape[0]

    @property
    def channels(self):
        return self.kernel.shape[2], self.kernel.shape[3]

    def _windows(self, a):
        p = self.size // 2
        padded = np.pad(a, ((0, 0), (p, p), (p, p)))
        return sliding_window_view(padded, (self.size, self.size), axis=(1, 2))

    def forward(self, a):
        windows = self._windows(a)
        z = np.tensordot(windows, self.kernel, axes=([0, 3, 4], [2, 0, 1]))
        z = z.transpose(2, 0, 1) + self.bias[:, None, None]
        self._cache = (a.shape, windows, z)
        if self.activation == 'relu':
            return np.maximum(z, 0.0)
        return z

    def backward(self, dout):
        """Gradients (d_input, d_kernel, d_bias) for the last forward call."""
        shape, windows, z = self._cache
        if self.activation == 'relu':
            dz = dout * (z > 0)
        else:
            dz = dout
        dkernel = np.tensordot(windows, dz, axes=([1, 2], [1, 2])).transpose(1, 2, 0, 3)
        dbias = dz.sum(axis=(1, 2))
        cin, h, w = shape
        k = self.size
        p = k // 2
        dpad = np.zeros((cin, h + 2 * p, w + 2 * p))
        for i in range(k):
            for j in range(k):
                dpad[:, i:i + h, j:j + w] += np.tensordot(self.kernel[i, j], dz, axes=([1], [0]))
        return dpad[:, p:p + h, p:p + w], dkernel, dbias


class ConvRegressor:
    """Small convolutional regressor from a 6-channel run summary to a mask."""

    def __init__(self, layers):
        self.layers = list(layers)
        if not self.layers:
            raise MaskNetError("Regressor needs at least one layer.")
        if self.layers[0].channels[0] != 6:
            raise MaskNetError("First layer must take 6 input channels.")
        last = self.layers[-1]
        if last.channels[1] != 1 or last.activation != 'identity':
            raise MaskNetError("Last layer must have 1 output channel and identity activation.")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.channels[1] != b.channels[0]:
                raise MaskNetError("Layer channel counts do not chain.")

    def __repr__(self):
        return '<intuiphys {} {}>'.format(self.__class__.__name__, self.architecture)

    @classmethod
    def initialize(cls, seed=0, architecture=DEFAULT_ARCHITECTURE):
        """Xavier-uniform kernels, zero biases."""
        rng = np.random.default_rng(seed)
        layers = []
        for cin, cout, k, activation in architecture:
            s = np.sqrt(6.0 / (k * k * cin + k * k * cout))
            layers.append(ConvLayer(rng.uniform(-s, s, size=(k, k, cin, cout)),
                                    np.zeros(cout), activation))
        return cls(layers)

    @property
    def architecture(self):
        return tuple((l.channels[0], l.channels[1], l.size, l.activation) for l in self.layers)

    def params(self):
        """Parameter arrays in order: kernel, bias of each layer."""
        out = []
        for layer in self.layers:
            out += [layer.kernel, layer.bias]
        return out

    def copy(self):
        return ConvRegressor([ConvLayer(l.kernel.copy(), l.bias.copy(), l.activation)
                              for l in self.layers])

    def __eq__(self, other):
        if not isinstance(other, ConvRegressor):
            return NotImplemented
        return (self.architecture == other.architecture and
                all(np.array_equal(a, b) for a, b in zip(self.params(), other.params())))

    __hash__ = None

    ########################################

    def forward(self, stack, ablation='none'):
        a = ablate(stack, ablation)
        for layer in self.layers:
            a = layer.forward(a)
        return a

    def backward(self, stack, target, ablation='none'):
        """Loss and analytic parameter gradients for one input."""
        prediction = self.forward(stack, ablation)
        value = loss(prediction, target)
        dout = loss_gradient(prediction, target)
        return value, self._backprop(dout)

    def _backprop(self, dout):
        grads = []
        for layer in reversed(self.layers):
            dout, dkernel, dbias = layer.backward(dout)
            grads = [dkernel, dbias] + grads
        return grads

    def pooled_backward(self, stacks, target, ablation='none'):
        """Loss and gradients through the max-pool over per-run outputs.

        Each pixel's gradient goes to the run that attained the max,
        the lowest run index on ties.

        """
        outputs = []
        caches = []
        for s in stacks:
            outputs.append(self.forward(s, ablation))
            caches.append([layer._cache for layer in self.layers])
        pooled = pool_masks(outputs)
        value = loss(pooled, target)
        dpooled = loss_gradient(pooled, target)
        winner = np.argmax(np.stack(outputs), axis=0)
        total = None
        for k, cache in enumerate(caches):
            route = winner == k
            if not route.any():
                continue
            for layer, c in zip(self.layers, cache):
                layer._cache = c
            grads = self._backprop(dpooled * route)
            if total is None:
                total = grads
            else:
                total = [t + g for t, g in zip(total, grads)]
        if total is None:
            total = [np.zeros_like(p) for p in self.params()]
        return value, total

    def predict(self, sample, n_used, ablation='none', palette=DEFAULT_PALETTE):
        """Pooled mask prediction for a meta-sample from its first n_used experience runs."""
        return pool_masks([self.forward(s, ablation) for s in experience_inputs(sample, n_used, palette)])

    ########################################

    def save(self, path):
        header = json.dumps({'layers': [
            {'cin': cin, 'cout': cout, 'k': k, 'activation': act}
            for cin, cout, k, act in self.architecture]}, sort_keys=True).encode('utf-8')
        params = np.concatenate([p.ravel() for p in self.params()]).astype('<f4')
        with open(path, 'wb') as f:
            f.write(CHECKPOINT_MAGIC)
            f.write(struct.pack('<II', CHECKPOINT_VERSION, len(header)))
            f.write(header)
            f.write(params.tobytes())

    @classmethod
    def load(cls, path):
        with open(path, 'rb') as f:
            data = f.read()
        if data[:4] != CHECKPOINT_MAGIC or len(data) < 12:
            raise CheckpointError(f"'{path}' is not a mask regressor checkpoint.")
        version, hlen = struct.unpack_from('<II', data, 4)
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"Unsupported checkpoint version: {version}")
        try:
            header = json.loads(data[12:12 + hlen].decode('utf-8'))
            spec = [(l['cin'], l['cout'], l['k'], l['activation']) for l in header['layers']]
        except (ValueError, KeyError, TypeError) as e:
            raise CheckpointError(f"Malformed checkpoint header: {e}")
        body = data[12 + hlen:]
        sizes = [(k * k * cin * cout, cout) for cin, cout, k, _ in spec]
        if len(body) != 4 * sum(a + b for a, b in sizes):
            raise CheckpointError("Checkpoint parameter data is truncated.")
        values = np.frombuffer(body, dtype='<f4').astype(np.float64)
        layers = []
        offset = 0
        for (cin, cout, k, act), (nk, nb) in zip(spec, sizes):
            kernel = values[offset:offset + nk].reshape(k, k, cin, cout)
            offset += nk
            bias = values[offset:offset + nb]
            offset += nb
            layers.append(ConvLayer(kernel, bias, act))
        try:
            return cls(layers)
        except MaskNetError as e:
            raise CheckpointError(f"Invalid checkpoint architecture: {e}")

##################################################


def ablate(stack, ablation='none'):
    stack = np.asarray(stack, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[0] != 6:
        raise ShapeMismatch(f"Expected a 6 x H x W summary, got shape {stack.shape}.")
    if ablation == 'none':
        return stack
    out = stack.copy()
    if ablation == 'zero_dynamic':
        out[DYNAMIC] = 0.0
    elif ablation == 'zero_median':
        out[MEDIAN] = 0.0
    else:
        raise MaskNetError(f"Unknown ablation: {ablation}")
    return out


def loss(prediction, target):
    """Mean squared difference over pixels."""
    prediction = np.asarray(prediction, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if target.ndim == 2:
        target = target[None]
    if prediction.shape != target.shape:
        raise ShapeMismatch(f"Prediction shape {prediction.shape} != target shape {target.shape}.")
    return float(np.mean((prediction - target) ** 2))


def loss_gradient(prediction, target):
    target = np.asarray(target, dtype=np.float64).reshape(prediction.shape)
    return 2.0 * (prediction - target) / prediction.size


def summary_input(frames):
    """Model input for one run: the summary stack with tanh-squashed dynamic channels.

    Static pixels stay at zero and every pixel the ball crossed maps
    into [-1, 1], whatever the frame index of the crossing.

    """
    stack = summarize_run(frames)
    stack[DYNAMIC] = np.tanh(stack[DYNAMIC])
    return stack


def experience_inputs(sample, n_used, palette=DEFAULT_PALETTE):
    """Summaries of the first n_used experience runs, or the pseudo-experience for 0."""
    if n_used > sample.N:
        raise MaskNetError(f"Sample has {sample.N} experience runs, {n_used} requested.")
    renderer = FrameRenderer(sample.scenario, palette)
    if n_used == 0:
        frames = pseudo_experience(renderer.run_frames(sample.prediction_run))
        return [summary_input(f) for f in frames]
    return [summary_input(renderer.run_frames(run)) for run in sample.experience_runs[:n_used]]


@dataclass
class Encoded:
    """Model inputs of one meta-sample with its target and all-on masks."""
    inputs: list
    target: np.ndarray
    baseline: np.ndarray = None

    def head(self, n_used):
        """The same sample restricted to its first n_used experience runs."""
        if not 0 < n_used <= len(self.inputs):
            raise MaskNetError(f"Encoded sample has {len(self.inputs)} runs, {n_used} requested.")
        return Encoded(self.inputs[:n_used], self.target, self.baseline)


def encode(samples, n_used, palette=DEFAULT_PALETTE):
    return [Encoded(experience_inputs(s, n_used, palette), gt_obstacle_mask(s.scenario),
                    all_on_mask(s.scenario))
            for s in samples]

##################################################


@dataclass
class TrainResult:
    model: ConvRegressor
    train_losses: list
    test_losses: list
    learning_rate: float
    retries: int


def _mean_loss(model, encoded, ablation):
    return float(np.mean([loss(pool_masks([model.forward(x, ablation) for x in e.inputs]), e.target)
                          for e in encoded]))


def _fit(initial, encoded, test, config, learning_rate):
    model = initial.copy()
    ablation = config.channel_ablation
    train_losses = []
    test_losses = []
    n = len(encoded)
    for epoch in range(config.epochs):
        order = np.random.default_rng(derive_seed(config.seed, 1, epoch)).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            total = None
            for i in batch:
                value, grads = model.pooled_backward(encoded[i].inputs, encoded[i].target, ablation)
                epoch_loss += value
                total = grads if total is None else [t + g for t, g in zip(total, grads)]
            for p, g in zip(model.params(), total):
                p -= learning_rate * g / len(batch)
        train_losses.append(epoch_loss / n)
        if test:
            test_losses.append(_mean_loss(model, test, ablation))
        log.debug("epoch %d: train loss %.6f", epoch, train_losses[-1])
        if (epoch < config.divergence_window and epoch > 0 and
                train_losses[-1] > train_losses[-2]):
            return model, train_losses, test_losses, True
    return model, train_losses, test_losses, False


def train(dataset, n_used, config=None, test=None, palette=DEFAULT_PALETTE, model=None):
    """Train a regressor on meta-samples with minibatch SGD.

    Per-run outputs are max-pooled before the loss.  If the training
    loss rises within the first divergence_window epochs, training
    restarts from the initial parameters with half the learning rate.
    `dataset` and `test` may be meta-samples or pre-encoded inputs.

    """
    if config is None:
        config = TrainConfig()
    if not dataset:
        raise EmptyDataset("Cannot train on an empty dataset.")
    encoded = dataset if isinstance(dataset[0], Encoded) else encode(dataset, n_used, palette)
    if test and not isinstance(test[0], Encoded):
        test = encode(test, n_used, palette)
    initial = model if model is not None else ConvRegressor.initialize(derive_seed(config.seed, 0))
    lr = config.learning_rate
    retries = 0
    while True:
        fitted, train_losses, test_losses, diverged = _fit(initial, encoded, test, config, lr)
        if not diverged:
            break
        if retries >= config.divergence_retries:
            log.warning("training loss still rising after %d retries, continuing at lr=%g", retries, lr)
            fitted, train_losses, test_losses, _ = _fit(
                initial, encoded, test, _no_retry(config), lr)
            break
        retries += 1
        lr /= 2.0
        log.warning("training loss rose, restarting with lr=%g", lr)
    return TrainResult(fitted, train_losses, test_losses, lr, retries)


def _no_retry(config):
    data = config.to_dict()
    data['divergence_window'] = 0
    return TrainConfig(**data)

##################################################


@dataclass
class MaskErrorReport:
    n_used: int
    ablation: str
    mean: float
    std: float
    baseline_mean: float
    baseline_std: float
    count: int


def evaluate_mask_error(model, test_samples, n_used, ablation='none', palette=DEFAULT_PALETTE):
    """Mean and std of the mask loss over a test set, with the all-on baseline.

    For meta-samples `model` only needs a predict(sample, n_used,
    ablation, palette) method; pre-encoded samples are run through
    its forward pass and pooled.

    """
    errors = []
    baseline = []
    for sample in test_samples:
        if isinstance(sample, Encoded):
            prediction = pool_masks([model.forward(x, ablation) for x in sample.inputs])
            gt, all_on = sample.target, sample.baseline
        else:
            prediction = model.predict(sample, n_used, ablation, palette)
            gt, all_on = gt_obstacle_mask(sample.scenario), all_on_mask(sample.scenario)
        errors.append(loss(prediction, gt))
        baseline.append(loss(all_on[None], gt))
    mean, std = mean_std(errors)
    bmean, bstd = mean_std(baseline)
    return MaskErrorReport(n_used, ablation, mean, std, bmean, bstd, len(errors))


def write_loss_csv(path, train_losses, test_losses=()):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['epoch', 'train_loss', 'test_loss'])
        for epoch, value in enumerate(train_losses):
            test_value = repr(test_losses[epoch]) if epoch < len(test_losses) else ''
            writer.writerow([epoch, repr(value), test_value])
