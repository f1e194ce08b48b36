import csv
import json

import pytest

from intuiphys.__main__ import main
from intuiphys.config import Config, ConfigError
from intuiphys.store import Store


def run(*argv):
    main([str(a) for a in argv])


def exit_message(*argv):
    with pytest.raises(SystemExit) as excinfo:
        run(*argv)
    return excinfo.value.code


@pytest.fixture(scope='module')
def dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp('cli') / 'data'
    run('gen', path, '--desk', '--count', 2, '--n', 1, '--pred-frames', 20, '--seed', 1)
    return path


def read_csv(path):
    with open(path, newline='') as f:
        return list(csv.reader(f))


def test_gen(dataset):
    store = Store(str(dataset))
    assert len(store) == 2
    assert store.master_seed == 1
    assert store.config.board_size == 32
    assert all(s.N == 1 and s.prediction_run.T == 20 for s in store)


def test_gen_desk_preset(tmp_path, capsys):
    run('--dump-config', 'gen', tmp_path / 'data', '--seed', 1, '--desk')
    data = json.loads(capsys.readouterr().out)
    assert data['scenario']['board_size'] == 32
    assert data['scenario']['obstacle_size_range'] == [5, 8]
    run('--dump-config', 'gen', tmp_path / 'data', '--seed', 1, '--desk', '--board-size', 48)
    data = json.loads(capsys.readouterr().out)
    assert data['scenario']['board_size'] == 48
    assert data['scenario']['obstacle_size_range'] == [5, 8]


def test_gen_frames(tmp_path):
    path = tmp_path / 'data'
    run('gen', path, '--desk', '--count', 1, '--n', 1, '--pred-frames', 10, '--seed', 2, '--frames')
    assert (path / 'sample_0' / 'run_0' / 'frame_9.ppm').exists()
    assert Store(str(path)).verify_files() == []


def test_summarize(dataset, tmp_path):
    out = tmp_path / 'summaries'
    run('summarize', dataset, out)
    for name in ('run_0.f32', 'run_1.f32', 'run_1_dynamic.ppm', 'run_1_median.ppm', 'mask.pgm'):
        assert (out / 'sample_1' / name).exists()


def test_train_and_eval(dataset, tmp_path):
    out = tmp_path / 'model'
    run('train-mask', dataset, out, '--n', 1, '--epochs', 1, '--test', dataset)
    model = out / 'model.ipck'
    assert model.exists()
    losses = read_csv(out / 'loss.csv')
    assert losses[0] == ['epoch', 'train_loss', 'test_loss']
    assert len(losses) == 2
    assert json.loads((out / 'config.json').read_text())['train']['epochs'] == 1

    again = tmp_path / 'again'
    run('train-mask', dataset, again, '--n', 1, '--epochs', 1, '--test', dataset)
    assert (again / 'model.ipck').read_bytes() == model.read_bytes()

    results = tmp_path / 'eval'
    run('eval', dataset, results, '--horizons', '5,10', '--checkpoint', model, '--n', 1)
    metrics = read_csv(results / 'metrics.csv')
    assert [row[0] for row in metrics[1:]] == ['5', '10']
    mask = read_csv(results / 'mask_error.csv')
    assert len(mask) == 2
    assert mask[1][:2] == ['1', 'none']


def test_eval_by_kind(dataset, tmp_path, capsys):
    run('eval', dataset, tmp_path / 'eval', '--horizons', '20', '--by-kind')
    rows = read_csv(tmp_path / 'eval' / 'metrics.csv')
    assert rows[1][:2] == ['20', 'all']
    assert 'T_test' in capsys.readouterr().out


def test_sweep(dataset, tmp_path):
    out = tmp_path / 'sweep'
    run('sweep', dataset, dataset, out, '--n-values', '0,1', '--n', 1, '--epochs', 1, '--ablations')
    rows = read_csv(out / 'sweep.csv')
    assert [(r[0], r[1]) for r in rows[1:]] == [('0', 'none'), ('1', 'none'), ('1', 'none'),
                                                ('1', 'zero_dynamic'), ('1', 'zero_median')]

##################################################


def test_occupied_output(dataset, tmp_path):
    out = tmp_path / 'out'
    out.mkdir()
    (out / 'keep').write_text('x')
    assert 'not empty' in exit_message('summarize', dataset, out)
    assert (out / 'keep').exists()
    run('--force', 'summarize', dataset, out)
    assert not (out / 'keep').exists()
    assert 'force' in exit_message('gen', out, '--desk', '--count', 1, '--n', 0, '--seed', 1)


def test_gen_checks_output_first(tmp_path, monkeypatch):
    out = tmp_path / 'out'
    out.mkdir()
    (out / 'keep').write_text('x')
    calls = []
    monkeypatch.setattr('intuiphys.__main__.generate', lambda *a, **kw: calls.append(a) or [])
    assert 'force' in exit_message('gen', out, '--desk', '--count', 1000, '--n', 7, '--seed', 1)
    assert calls == []
    assert (out / 'keep').exists()


def test_missing_dataset(tmp_path):
    assert 'gen' in exit_message('eval', tmp_path / 'nowhere', tmp_path / 'out')


def test_malformed_checkpoint(dataset, tmp_path):
    bad = tmp_path / 'bad.ipck'
    bad.write_bytes(b'garbage')
    code = exit_message('eval', dataset, tmp_path / 'out', '--checkpoint', bad)
    assert isinstance(code, str)
    assert not (tmp_path / 'out').exists()


def test_horizon_too_long(dataset, tmp_path):
    code = exit_message('eval', dataset, tmp_path / 'out', '--horizons', '50')
    assert isinstance(code, str)


def test_bad_arguments(dataset, tmp_path):
    assert exit_message('eval', dataset, tmp_path / 'out', '--horizons', 'a,b') == 2
    assert exit_message('--threads', 0, 'summarize', dataset, tmp_path / 'out') == 2
    assert exit_message() == 2

##################################################


def test_dump_config(tmp_path, capsys):
    run('--dump-config')
    data = json.loads(capsys.readouterr().out)
    assert data == json.loads(Config().dumps())

    out = tmp_path / 'data'
    run('--dump-config', 'gen', out, '--seed', 1, '--desk', '--balls', 2)
    data = json.loads(capsys.readouterr().out)
    assert data['scenario']['board_size'] == 32
    assert data['scenario']['n_balls'] == 2
    assert not out.exists()


def test_config_file(tmp_path, capsys):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'scenario': {'family': 'c'}, 'train': {'epochs': 4}}))
    run('--config', path, '--dump-config', 'train-mask', 'data', 'out', '--lr', '0.5')
    data = json.loads(capsys.readouterr().out)
    assert data['scenario']['family'] == 'c'
    assert data['train']['epochs'] == 4
    assert data['train']['learning_rate'] == 0.5


def test_bad_config(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'scenario': {'family': 'c'}, 'optimizer': {}}))
    assert 'sections' in exit_message('--config', path, '--dump-config')
    path.write_text('{')
    with pytest.raises(ConfigError):
        Config.read(str(path))
    path.write_text(json.dumps({'train': {'epochs': 'many', 'momentum': 1}}))
    with pytest.raises(ConfigError):
        Config.read(str(path))
