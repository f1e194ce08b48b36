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

import os
import json
import base64
import shutil
import logging

import numpy as np

from . import util
from .codecs import encode_ppm
from .dataset import MetaSample, ScenarioConfig
from .physics import (
    BoardSpec,
    MaskShape,
    Obstacle,
    ObstacleType,
    RotatedRect,
    Run,
    Scenario,
    SolidBackground,
    TextureBackground,
)
from .render import DEFAULT_PALETTE, FrameRenderer

log = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
FORMAT_VERSION = 1

# Manifest layout (format_version 1):
#
#   format_version  1
#   master_seed     dataset master seed, or null
#   config          ScenarioConfig as a dict, or null
#   samples         list of {seed, scenario, runs}; run 0 is the
#                   prediction run, runs 1..N the experience runs
#   samples_crc32   CRC32 of the canonical JSON of 'samples'
#   files           {relative path: CRC32} of materialised frames

##################################################


class StoreError(Exception):
    """Base class for intuiphys dataset store exceptions."""
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class StoreUninitializedError(StoreError):
    pass


class StoreInitializationError(StoreError):
    pass


class CorruptManifest(StoreError):
    pass

##################################################
# encoding


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def _encode_shape(shape):
    if isinstance(shape, RotatedRect):
        return {'rect': {
            'center': [float(v) for v in shape.center],
            'half_extents': [float(v) for v in shape.half_extents],
            'angle': float(shape.angle),
        }}
    bits = np.packbits(shape.occupancy, axis=None)
    return {'mask': {
        'shape': list(shape.occupancy.shape),
        'bits': base64.b64encode(bits.tobytes()).decode('ascii'),
        'anchor': list(shape.anchor),
    }}


def _decode_shape(data):
    if 'rect' in data:
        r = data['rect']
        return RotatedRect(tuple(r['center']), tuple(r['half_extents']), r['angle'])
    m = data['mask']
    h, w = m['shape']
    bits = np.frombuffer(base64.b64decode(m['bits']), dtype=np.uint8)
    occupancy = np.unpackbits(bits, count=h * w).reshape(h, w).astype(bool)
    return MaskShape(occupancy, anchor=tuple(m['anchor']))


def encode_scenario(scenario):
    bg = scenario.background
    if isinstance(bg, SolidBackground):
        background = {'solid': bg.color_index}
    else:
        background = {'texture': bg.texture_id}
    board = scenario.board
    return {
        'board': [board.height, board.width, board.wall_thickness],
        'background': background,
        'seed': scenario.seed,
        'obstacles': [
            dict(_encode_shape(o.shape), kind=o.kind.value, color=o.color_index)
            for o in scenario.obstacles
        ],
    }


def decode_scenario(data):
    board = BoardSpec(*data['board'])
    bg = data['background']
    if 'solid' in bg:
        background = SolidBackground(bg['solid'])
    else:
        background = TextureBackground(bg['texture'])
    obstacles = tuple(
        Obstacle(_decode_shape(o), ObstacleType(o['kind']), o['color'])
        for o in data['obstacles'])
    return Scenario(board, obstacles, background, data['seed'])


def encode_run(run):
    return {
        'trajectories': run.trajectories.tolist(),
        'velocities': run.velocities.tolist(),
        'final_velocities': run.final_velocities.tolist(),
        'radii': list(run.radii),
        'events': [list(e) for e in run.events],
    }


def decode_run(data, scenario):
    n = len(data['radii'])
    return Run(scenario,
               np.array(data['trajectories'], dtype=np.float64).reshape(n, -1, 2),
               np.array(data['velocities'], dtype=np.float64).reshape(n, 2),
               data['radii'],
               final_velocities=np.array(data['final_velocities'], dtype=np.float64).reshape(n, 2),
               events=[tuple(e) for e in data['events']])


def encode_sample(sample):
    return {
        'seed': sample.seed,
        'scenario': encode_scenario(sample.scenario),
        'runs': [encode_run(r) for r in sample.runs],
    }


def decode_sample(data):
    scenario = decode_scenario(data['scenario'])
    runs = [decode_run(r, scenario) for r in data['runs']]
    return MetaSample(scenario, runs[0], tuple(runs[1:]), data['seed'])

##################################################


class Store():
    """Represents an intuiphys dataset directory"""

    def __init__(self, root, writable=False, create=False, force=False):
        self.root = os.path.abspath(os.path.expanduser(root))
        self.writable = writable or create
        self.manifest_path = os.path.join(self.root, MANIFEST)

        self.config = None
        self.master_seed = None
        self.files = {}
        self._samples = []

        if create:
            if os.path.exists(self.root) and os.listdir(self.root):
                if not force:
                    raise StoreInitializationError(f"Output directory '{self.root}' exists but is not empty.")
                self._clear()
            os.makedirs(self.root, exist_ok=True)
            return

        if not os.path.exists(self.manifest_path):
            if os.path.exists(self.root):
                raise StoreInitializationError(f"Directory '{self.root}' does not contain a dataset.")
            else:
                raise StoreUninitializedError(f"Dataset directory '{self.root}' not found.")
        self._load()

    def __repr__(self):
        return '<intuiphys {} {}, writable={}>'.format(
            self.__class__.__name__, self.root, self.writable)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if self.writable and exc_type is None:
            self.write()

    def _clear(self):
        for name in os.listdir(self.root):
            path = os.path.join(self.root, name)
            if os.path.isdir(path) and not os.path.islink(path):
                shutil.rmtree(path)
            else:
                os.remove(path)

    ########################################

    def __len__(self):
        return len(self._samples)

    def __contains__(self, index):
        return isinstance(index, int) and 0 <= index < len(self._samples)

    def __getitem__(self, index):
        if not isinstance(index, int):
            raise TypeError("sample index must be an int")
        return self._samples[index]

    def __iter__(self):
        return iter(self._samples)

    @property
    def samples(self):
        return list(self._samples)

    def add(self, sample):
        """Append a sample; returns its index."""
        if not self.writable:
            raise StoreError("Dataset opened read-only.")
        self._samples.append(sample)
        return len(self._samples) - 1

    ########################################

    def frame_relpath(self, sample, run, frame):
        return os.path.join(f'sample_{sample}', f'run_{run}', f'frame_{frame}.ppm')

    def write_frames(self, index, palette=DEFAULT_PALETTE):
        """Materialise all frames of sample `index` as PPM files."""
        sample = self._samples[index]
        renderer = FrameRenderer(sample.scenario, palette)
        for j, run in enumerate(sample.runs):
            rundir = os.path.join(self.root, f'sample_{index}', f'run_{j}')
            os.makedirs(rundir, exist_ok=True)
            for t in range(run.T):
                rel = self.frame_relpath(index, j, t)
                data = encode_ppm(renderer.frame(run.positions(t), run.radii))
                with open(os.path.join(self.root, rel), 'wb') as f:
                    f.write(data)
                self.files[rel] = util.crc32(data)

    def verify_files(self):
        """Relative paths of materialised files whose CRC32 does not match."""
        bad = []
        for rel, crc in sorted(self.files.items()):
            path = os.path.join(self.root, rel)
            if not os.path.exists(path) or util.file_crc32(path) != crc:
                bad.append(rel)
        return bad

    ########################################

    def _manifest(self):
        samples = [encode_sample(s) for s in self._samples]
        return {
            'format_version': FORMAT_VERSION,
            'master_seed': self.master_seed,
            'config': self.config.to_dict() if self.config else None,
            'samples': samples,
            'samples_crc32': util.crc32(_canonical(samples)),
            'files': dict(sorted(self.files.items())),
        }

    def write(self):
        """Write the manifest atomically."""
        tmp = self.manifest_path + '.tmp'
        try:
            with open(tmp, 'w') as f:
                json.dump(self._manifest(), f, sort_keys=True)
                f.write('\n')
            os.replace(tmp, self.manifest_path)
        except:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        log.info("wrote %d samples to %s", len(self._samples), self.root)

    def _load(self):
        try:
            with open(self.manifest_path) as f:
                manifest = json.load(f)
        except ValueError as e:
            raise CorruptManifest(f"Manifest '{self.manifest_path}' is not valid JSON: {e}")
        try:
            version = manifest['format_version']
            if version != FORMAT_VERSION:
                raise CorruptManifest(f"Unsupported manifest format version: {version}")
            samples = manifest['samples']
            if util.crc32(_canonical(samples)) != manifest['samples_crc32']:
                raise CorruptManifest("Manifest sample checksum mismatch.")
            self.master_seed = manifest['master_seed']
            if manifest['config'] is not None:
                self.config = ScenarioConfig.from_dict(manifest['config'])
            self.files = dict(manifest['files'])
            self._samples = [decode_sample(s) for s in samples]
        except CorruptManifest:
            raise
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise CorruptManifest(f"Malformed manifest '{self.manifest_path}': {e}")

##################################################


def save_dataset(samples, path, config=None, master_seed=None, frames=False,
                 palette=None, force=False):
    """Write samples (and optionally their frames) to a new dataset directory."""
    if palette is None:
        palette = config.palette if config else DEFAULT_PALETTE
    with Store(path, create=True, force=force) as store:
        store.config = config
        store.master_seed = master_seed
        for sample in samples:
            index = store.add(sample)
            if frames:
                store.write_frames(index, palette)
    return store


def load_dataset(path):
    return Store(path).samples
