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

import re
import struct

import numpy as np


class CodecError(Exception):
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


_PNM_HEADER = re.compile(rb'^(P[56])\s+(\d+)\s+(\d+)\s+(\d+)\s')


def _pnm_header(data, magic):
    m = _PNM_HEADER.match(data)
    if not m or m.group(1) != magic:
        raise CodecError(f"Not a {magic.decode()} image.")
    width, height, maxval = (int(g) for g in m.groups()[1:])
    return width, height, maxval, m.end()

##################################################
# PPM


def to_bytes8(image):
    """Quantize [0, 1] values to 8 bits, rounding half up."""
    return np.floor(np.clip(image, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def encode_ppm(image):
    """Encode a 3 x H x W image as binary 8-bit PPM (P6)."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[0] != 3:
        raise CodecError(f"PPM needs a 3 x H x W image, got shape {image.shape}.")
    _, h, w = image.shape
    pixels = to_bytes8(image).transpose(1, 2, 0)
    return b'P6\n%d %d\n255\n' % (w, h) + pixels.tobytes()


def decode_ppm(data):
    """Decode P6 bytes to a 3 x H x W float image in [0, 1]."""
    w, h, maxval, offset = _pnm_header(data, b'P6')
    if maxval != 255:
        raise CodecError("Only 8-bit PPM is supported.")
    body = data[offset:offset + 3 * w * h]
    if len(body) != 3 * w * h:
        raise CodecError("Truncated PPM data.")
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
    return pixels.transpose(2, 0, 1).astype(np.float64) / 255.0

##################################################
# PGM


def encode_pgm16(heatmap):
    """Encode an H x W heatmap as 16-bit PGM (P5), scaled so the max is 65535."""
    heatmap = np.asarray(heatmap, dtype=np.float64)
    if heatmap.ndim != 2:
        raise CodecError("PGM needs a 2-d array.")
    if np.any(heatmap < 0) or not np.all(np.isfinite(heatmap)):
        raise CodecError("Heatmap values must be finite and non-negative.")
    peak = heatmap.max() if heatmap.size else 0.0
    scaled = heatmap / peak if peak > 0 else heatmap
    values = np.floor(scaled * 65535.0 + 0.5).astype('>u2')
    h, w = heatmap.shape
    return b'P5\n%d %d\n65535\n' % (w, h) + values.tobytes()


def decode_pgm16(data):
    """Decode 16-bit P5 bytes to an H x W array in [0, 1]."""
    w, h, maxval, offset = _pnm_header(data, b'P5')
    if maxval != 65535:
        raise CodecError("Only 16-bit PGM is supported.")
    body = data[offset:offset + 2 * w * h]
    if len(body) != 2 * w * h:
        raise CodecError("Truncated PGM data.")
    return np.frombuffer(body, dtype='>u2').reshape(h, w).astype(np.float64) / 65535.0

##################################################
# raw little-endian float32 with u32 dimension header


def encode_raw(array):
    array = np.asarray(array)
    if array.ndim not in (2, 3):
        raise CodecError("Raw dumps hold 2-d or 3-d arrays.")
    header = struct.pack('<%dI' % array.ndim, *array.shape)
    return header + np.ascontiguousarray(array, dtype='<f4').tobytes()


def decode_raw(data, ndim=None):
    """Decode a raw dump; `ndim` is inferred from the length if not given."""
    candidates = (ndim,) if ndim else (2, 3)
    for n in candidates:
        if len(data) < 4 * n:
            continue
        shape = struct.unpack_from('<%dI' % n, data)
        size = int(np.prod(shape))
        if len(data) == 4 * n + 4 * size:
            return np.frombuffer(data, dtype='<f4', offset=4 * n).reshape(shape).astype(np.float32)
    raise CodecError("Raw data length does not match its header.")

##################################################


def write(path, data):
    with open(path, 'wb') as f:
        f.write(data)


def read(path):
    with open(path, 'rb') as f:
        return f.read()
