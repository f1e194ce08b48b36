import numpy as np
import pytest

from intuiphys import families
from intuiphys.families import Families, FamilyAttributeError, FamilyError, get_family


def test_builtin_families():
    names = Families().names()
    assert {'r2', 'r4', 'c'} <= set(names)
    for name in ('r2', 'r4', 'c'):
        family = get_family(name)
        assert family.is_builtin
        assert family.description
    rng = np.random.default_rng(0)
    assert {get_family('r4').obstacle_count(rng) for _ in range(50)} == {3, 4}
    assert get_family('r2').obstacle_count(rng) == 2


def test_unknown_family():
    with pytest.raises(FamilyError):
        get_family('hexagons')


def test_plugin_family(tmp_path, monkeypatch):
    (tmp_path / 'dots.py').write_text(
        "description = 'no obstacles at all'\n"
        "\n"
        "def obstacle_count(rng):\n"
        "    return 0\n"
    )
    monkeypatch.setattr(families, 'INTUIPHYS_FAMILY_PATH',
                        [str(tmp_path)] + families.INTUIPHYS_FAMILY_PATH)
    found = Families()
    assert 'dots' in found
    dots = found['dots']
    assert not dots.is_builtin
    assert dots.description == 'no obstacles at all'
    assert dots.obstacle_count(np.random.default_rng(0)) == 0
    with pytest.raises(FamilyAttributeError) as excinfo:
        dots.propose(np.random.default_rng(0), None, None)
    assert 'propose()' in str(excinfo.value)
