"""
Tests of the LutGEMM QTensorFile and DENM formats.

Date: 17 Oct 2026
"""

import os

import numpy as np
import pytest
from numpy.testing import assert_array_equal, assert_equal

from LutGEMM.bcq import BcqTensor, dequantize
from LutGEMM.bench import random_bcq_tensor
from LutGEMM.file_formats import (
    QTensorFormatError,
    qtensor_from_bytes,
    qtensor_nbytes,
    qtensor_to_bytes,
    read_dense,
    read_qtensor,
    write_dense,
    write_qtensor,
)
from LutGEMM.file_formats.tensor_io import QTENSOR_HEADER


def test_qtensor_round_trip(tmpdir):
    """
    write, read and write again gives identical bytes, with and without
    bias and with a short last group. The size is the predicted one.
    """
    for m, n, q, g, bias in [(4, 6, 1, 0, False), (17, 70, 3, 32, True), (5, 33, 4, 8, False)]:
        t = random_bcq_tensor(m, n, q, g, seed=n, bias=bias)
        path = tmpdir.join("t_%d_%d.qt" % (m, n)).strpath
        written = write_qtensor(path, t)
        assert_equal(written, qtensor_nbytes(m, n, q, g, bias))
        assert_equal(os.path.getsize(path), written)

        loaded = read_qtensor(path)
        assert_equal(loaded.shape, t.shape)
        assert_equal(loaded.bits, q)
        assert_equal(loaded.group_size, g)
        assert_equal(loaded.has_bias, bias)
        assert_array_equal(loaded.planes, t.planes)
        assert_array_equal(loaded.scales, t.scales)
        assert_array_equal(dequantize(loaded), dequantize(t))
        assert qtensor_to_bytes(loaded) == qtensor_to_bytes(t)


def test_qtensor_header():
    """
    Test header fields of the 4 x 6 single-plane example.
    """
    signs = np.array([[1, 1, -1, -1, -1, 1]] * 4)
    t = BcqTensor.from_signs(signs, np.ones((4, 1, 1)), biases=np.zeros((4, 1)))
    data = qtensor_to_bytes(t)
    magic, version, flags, m, n, q, reserved, g = QTENSOR_HEADER.unpack_from(data)
    assert_equal(magic, b"LUTQ")
    assert_equal(version, 1)
    assert_equal(flags, 1)
    assert_equal((m, n, q, reserved, g), (4, 6, 1, 0, 0))
    assert_equal(len(data), 22 + 4 * 4 + 4 * 4 + 4 * 4)
    assert_equal(data[22], 0x23)


def test_qtensor_truncated():
    """
    A file one byte short fails with a size mismatch.
    """
    data = qtensor_to_bytes(random_bcq_tensor(8, 40, 2, 16, seed=1))
    with pytest.raises(QTensorFormatError, match="size mismatch"):
        qtensor_from_bytes(data[:-1])
    with pytest.raises(QTensorFormatError, match="size mismatch"):
        qtensor_from_bytes(data + b"\x00")
    with pytest.raises(QTensorFormatError, match="size mismatch"):
        qtensor_from_bytes(data[:10])


def test_qtensor_bad_header():
    """
    Test bad magic, unknown version and an impossible group size.
    """
    data = bytearray(qtensor_to_bytes(random_bcq_tensor(2, 8, 1, seed=2)))

    bad = bytearray(data)
    bad[:4] = b"LUTX"
    with pytest.raises(QTensorFormatError, match="bad magic"):
        qtensor_from_bytes(bytes(bad))

    bad = bytearray(data)
    bad[4:6] = (2).to_bytes(2, "little")
    with pytest.raises(QTensorFormatError, match="unsupported version"):
        qtensor_from_bytes(bytes(bad))

    bad = bytearray(data)
    bad[18:22] = (9).to_bytes(4, "little")
    with pytest.raises(QTensorFormatError):
        qtensor_from_bytes(bytes(bad))


def test_format_error_is_value_error():
    assert issubclass(QTensorFormatError, ValueError)


def test_dense_round_trip(tmpdir):
    """
    DENM stores rows, cols and float32 values.
    """
    W = np.arange(12, dtype=np.float32).reshape(3, 4) / 7
    path = tmpdir.join("w.bin").strpath
    write_dense(path, W)
    assert_equal(os.path.getsize(path), 12 + 12 * 4)
    loaded = read_dense(path)
    assert_equal(loaded.dtype, np.float32)
    assert_array_equal(loaded, W)


def test_dense_bad_files(tmpdir):
    """
    Test that wrong magic and wrong sizes are rejected.
    """
    path = tmpdir.join("w.bin")
    path.write_binary(b"LUTQ" + bytes(8))
    with pytest.raises(QTensorFormatError, match="bad magic"):
        read_dense(path.strpath)

    write_dense(path.strpath, np.ones((2, 2)))
    path.write_binary(path.read_binary()[:-2])
    with pytest.raises(QTensorFormatError, match="size mismatch"):
        read_dense(path.strpath)
