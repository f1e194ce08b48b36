import pytest

from intuiphys.dataset import ScenarioConfig, generate
from intuiphys.render import DEFAULT_PALETTE


def pytest_addoption(parser):
    parser.addoption(
        '--runslow', action='store_true', default=False,
        help="run the long acceptance experiments",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def palette():
    return DEFAULT_PALETTE


@pytest.fixture(scope='session')
def desk_config():
    return ScenarioConfig.desk()


@pytest.fixture(scope='session')
def desk_samples(desk_config):
    """Four small desk-scale meta-samples with two experience runs each."""
    return generate(desk_config, 4, N=2, T_pred=20, master_seed=11)
