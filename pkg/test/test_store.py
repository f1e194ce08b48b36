import os
import json

import numpy as np
import pytest

from intuiphys.codecs import decode_ppm
from intuiphys.dataset import ScenarioConfig, sample_meta
from intuiphys.render import FrameRenderer
from intuiphys.store import (
    MANIFEST,
    CorruptManifest,
    Store,
    StoreInitializationError,
    StoreUninitializedError,
    decode_sample,
    encode_sample,
    load_dataset,
    save_dataset,
)


def test_round_trip(tmp_path, desk_samples, desk_config):
    path = tmp_path / 'data'
    save_dataset(desk_samples, str(path), config=desk_config, master_seed=11)
    store = Store(str(path))
    assert store.master_seed == 11
    assert store.config == desk_config
    assert len(store) == len(desk_samples)
    assert store.samples == desk_samples
    assert load_dataset(str(path)) == desk_samples


def test_curved_and_textured_round_trip():
    config = ScenarioConfig(family='c', background='texture', n_balls=2)
    sample = sample_meta(config, 1, 5, 3)
    encoded = json.loads(json.dumps(encode_sample(sample)))
    assert decode_sample(encoded) == sample


def test_frames_match_rerender(tmp_path, desk_samples):
    path = tmp_path / 'data'
    store = save_dataset(desk_samples[:1], str(path), frames=True)
    sample = desk_samples[0]
    renderer = FrameRenderer(sample.scenario)
    for j, run in enumerate(sample.runs):
        for t in (0, run.T - 1):
            with open(os.path.join(str(path), store.frame_relpath(0, j, t)), 'rb') as f:
                image = decode_ppm(f.read())
            expected = renderer.frame(run.positions(t), run.radii)
            assert np.max(np.abs(image - expected)) <= 0.5 / 255 + 1e-12
    assert Store(str(path)).verify_files() == []


def test_verify_detects_damage(tmp_path, desk_samples):
    path = tmp_path / 'data'
    store = save_dataset(desk_samples[:1], str(path), frames=True)
    rel = store.frame_relpath(0, 0, 3)
    with open(os.path.join(str(path), rel), 'ab') as f:
        f.write(b'x')
    assert Store(str(path)).verify_files() == [rel]


def test_corrupt_manifest(tmp_path, desk_samples):
    path = tmp_path / 'data'
    save_dataset(desk_samples[:1], str(path))
    manifest = path / MANIFEST
    text = manifest.read_text()
    manifest.write_text(text[:len(text) // 2])
    with pytest.raises(CorruptManifest):
        Store(str(path))

    data = json.loads(text)
    data['samples'][0]['seed'] += 1
    manifest.write_text(json.dumps(data))
    with pytest.raises(CorruptManifest):
        Store(str(path))

    data = json.loads(text)
    data['format_version'] = 99
    manifest.write_text(json.dumps(data))
    with pytest.raises(CorruptManifest):
        Store(str(path))


def test_missing_and_occupied(tmp_path, desk_samples):
    with pytest.raises(StoreUninitializedError):
        Store(str(tmp_path / 'nowhere'))
    (tmp_path / 'other').mkdir()
    (tmp_path / 'other' / 'file').write_text('x')
    with pytest.raises(StoreInitializationError):
        Store(str(tmp_path / 'other'))
    with pytest.raises(StoreInitializationError):
        save_dataset(desk_samples[:1], str(tmp_path / 'other'))
    save_dataset(desk_samples[:1], str(tmp_path / 'other'), force=True)
    assert not (tmp_path / 'other' / 'file').exists()
    assert len(Store(str(tmp_path / 'other'))) == 1


def test_manifest_is_stable(tmp_path, desk_samples):
    save_dataset(desk_samples, str(tmp_path / 'a'), master_seed=11)
    save_dataset(desk_samples, str(tmp_path / 'b'), master_seed=11)
    assert (tmp_path / 'a' / MANIFEST).read_bytes() == (tmp_path / 'b' / MANIFEST).read_bytes()
