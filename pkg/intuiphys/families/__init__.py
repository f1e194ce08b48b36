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
import pkgutil
import importlib.util


INTUIPHYS_FAMILY_PATH = [os.path.expanduser(os.path.join('~', '.intuiphys', 'families'))]
if os.getenv('INTUIPHYS_FAMILY_PATH'):
    INTUIPHYS_FAMILY_PATH += os.getenv('INTUIPHYS_FAMILY_PATH').split(':')
INTUIPHYS_FAMILY_PATH += __path__

##################################################


class FamilyError(Exception):
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class FamilyAttributeError(FamilyError):
    def __init__(self, family, msg):
        self.family = family
        self.msg = msg

    def __str__(self):
        return "Family '{}' does not implement the {}.".format(self.family.name, self.msg)

##################################################


class Family(object):
    """A scenario family: how many obstacles, and how each is shaped.

    The Family object wraps a family module, which provides a
    'description' string, an obstacle_count(rng) function and a
    propose(rng, board, config) function returning a candidate
    obstacle shape.

    """
    def __init__(self, name, module):
        self.name = name
        self.module = module

    def __repr__(self):
        return '<intuiphys {} {}>'.format(
            self.__class__.__name__, self.name)

    def __str__(self):
        return self.name

    @property
    def path(self):
        return self.module.__file__

    @property
    def is_builtin(self):
        bpath = os.path.dirname(__file__)
        spath = os.path.dirname(self.path)
        return os.path.commonprefix([bpath, spath]) == bpath

    @property
    def description(self):
        try:
            return self.module.description
        except AttributeError:
            raise FamilyAttributeError(self, "'description' property")

    def obstacle_count(self, rng):
        try:
            func = self.module.obstacle_count
        except AttributeError as e:
            raise FamilyAttributeError(self, "obstacle_count() function") from e
        return int(func(rng))

    def propose(self, rng, board, config):
        try:
            func = self.module.propose
        except AttributeError as e:
            raise FamilyAttributeError(self, "propose() function") from e
        return func(rng, board, config)

##################################################


class Families(object):
    def __init__(self):
        self._families = {}
        for (finder, name, ispkg) in pkgutil.iter_modules(INTUIPHYS_FAMILY_PATH):
            if ispkg or name in self._families:
                continue
            spec = finder.find_spec(name)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            self._families[name] = Family(name, module)

    def __repr__(self):
        return '<intuiphys {} {}>'.format(self.__class__, INTUIPHYS_FAMILY_PATH)

    def __contains__(self, name):
        return name in self._families

    def __getitem__(self, name):
        try:
            return self._families[name]
        except KeyError:
            raise FamilyError(f"unknown scenario family: {name}")

    def __iter__(self):
        return iter(sorted(self._families.values(), key=lambda f: f.name))

    def names(self):
        return sorted(self._families)


_families = None


def get_family(name):
    """Look up a family by name, discovering plugins on first use."""
    global _families
    if _families is None:
        _families = Families()
    return _families[name]
