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

import json
from dataclasses import replace

from .dataset import ScenarioConfig, DatasetError
from .masknet import TrainConfig, MaskNetError

SECTIONS = ('scenario', 'train')


class ConfigError(Exception):
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class Config:
    """Scenario and training configuration, as read from a JSON file.

    The file may hold a "scenario" and a "train" object whose keys are
    the fields of ScenarioConfig and TrainConfig; anything else is an
    error.

    """
    def __init__(self, scenario=None, train=None):
        self.scenario = scenario or ScenarioConfig()
        self.train = train or TrainConfig()

    def __repr__(self):
        return '<intuiphys {} {}>'.format(self.__class__.__name__, self.to_dict())

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("Configuration must be a JSON object.")
        unknown = set(data) - set(SECTIONS)
        if unknown:
            raise ConfigError("Unknown configuration sections: {}".format(', '.join(sorted(unknown))))
        try:
            scenario = ScenarioConfig.from_dict(data.get('scenario', {}))
            train = TrainConfig.from_dict(data.get('train', {}))
        except (DatasetError, MaskNetError) as e:
            raise ConfigError(str(e))
        except TypeError as e:
            raise ConfigError(f"Invalid configuration value: {e}")
        return cls(scenario, train)

    @classmethod
    def read(cls, path):
        try:
            with open(path) as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigError(f"Could not read config file '{path}': {e.strerror}")
        except ValueError as e:
            raise ConfigError(f"Config file '{path}' is not valid JSON: {e}")
        return cls.from_dict(data)

    def override(self, scenario=None, train=None):
        """Copy with the given non-None fields replaced."""
        try:
            sc = replace(self.scenario, **{k: v for k, v in (scenario or {}).items() if v is not None})
            tr = replace(self.train, **{k: v for k, v in (train or {}).items() if v is not None})
        except (DatasetError, MaskNetError) as e:
            raise ConfigError(str(e))
        return Config(sc, tr)

    def to_dict(self):
        return {'scenario': self.scenario.to_dict(), 'train': self.train.to_dict()}

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)
