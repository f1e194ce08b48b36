import numpy as np
import pytest

from intuiphys import codecs
from intuiphys.codecs import CodecError


def test_ppm():
    rng = np.random.default_rng(0)
    image = rng.uniform(size=(3, 5, 7))
    data = codecs.encode_ppm(image)
    assert data.startswith(b'P6\n7 5\n255\n')
    assert len(data) == len(b'P6\n7 5\n255\n') + 3 * 5 * 7
    decoded = codecs.decode_ppm(data)
    assert decoded.shape == (3, 5, 7)
    assert np.max(np.abs(decoded - image)) <= 0.5 / 255 + 1e-12


def test_ppm_quantization():
    image = np.zeros((3, 1, 3))
    image[:, 0] = [0.0, 0.5, 1.0]
    assert list(codecs.to_bytes8(image)[0, 0]) == [0, 128, 255]


def test_pgm16():
    heat = np.array([[0.0, 1.0], [2.0, 4.0]])
    data = codecs.encode_pgm16(heat)
    assert data.startswith(b'P5\n2 2\n65535\n')
    np.testing.assert_allclose(codecs.decode_pgm16(data), heat / 4.0, atol=1e-5)
    assert not codecs.decode_pgm16(codecs.encode_pgm16(np.zeros((3, 3)))).any()
    with pytest.raises(CodecError):
        codecs.encode_pgm16(-heat)


def test_raw():
    stack = np.arange(6 * 4 * 5, dtype=np.float64).reshape(6, 4, 5) / 7.0
    data = codecs.encode_raw(stack)
    assert data[:12] == b'\x06\x00\x00\x00\x04\x00\x00\x00\x05\x00\x00\x00'
    decoded = codecs.decode_raw(data)
    assert decoded.dtype == np.float32
    assert np.array_equal(decoded, stack.astype(np.float32))
    flat = codecs.decode_raw(codecs.encode_raw(stack[0]))
    assert flat.shape == (4, 5)


def test_corrupt_data():
    data = codecs.encode_ppm(np.zeros((3, 4, 4)))
    with pytest.raises(CodecError):
        codecs.decode_ppm(data[:-1])
    with pytest.raises(CodecError):
        codecs.decode_pgm16(data)
    with pytest.raises(CodecError):
        codecs.decode_raw(codecs.encode_raw(np.zeros((2, 2)))[:-2])
