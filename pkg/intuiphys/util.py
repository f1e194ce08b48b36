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

import zlib

import numpy as np


MASK64 = (1 << 64) - 1


def splitmix64(state):
    """One splitmix64 output for a 64-bit integer state."""
    z = (state + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, *path):
    """Derive an independent 64-bit seed from `seed` and an index path.

    Each path element is xor'ed into the running state, which is then
    mixed with splitmix64, so derive_seed(s, 1, 2) and derive_seed(s,
    2, 1) are unrelated.  With an empty path the seed is returned
    unchanged.

    """
    state = int(seed) & MASK64
    for index in path:
        state = splitmix64(state ^ splitmix64(int(index) & MASK64))
    return state


def crc32(data):
    """CRC32 of bytes (or str, encoded utf-8) as unsigned int."""
    if isinstance(data, str):
        data = data.encode('utf-8')
    return zlib.crc32(data) & 0xFFFFFFFF


def file_crc32(path):
    """CRC32 of a file's contents."""
    crc = 0
    with open(path, 'rb') as f:
        while True:
            chunk = f.read(1 << 16)
            if not chunk:
                break
            crc = zlib.crc32(chunk, crc)
    return crc & 0xFFFFFFFF


def mean_std(values):
    """Mean and (population) standard deviation, (0, 0) if empty.

    numpy computes both in two passes, so the result does not depend
    on accumulation order beyond the input order itself.

    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0, 0.0
    return float(np.mean(values)), float(np.std(values))
