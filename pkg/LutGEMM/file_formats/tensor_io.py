"""
On-disk formats of LutGEMM.

QTensorFile (quantized tensor), all integers little-endian:
    magic "LUTQ" (4 bytes), version u16 = 1, flags u16 (bit 0: bias present),
    m u32, n u32, q u8, reserved u8, g u32 (0 = row-wise);
    q bit-planes, each m rows of ceil(n/32) u32 words;
    scales as float32 in [row][group][bit] order;
    biases as float32 in [row][group] order, if flagged.

DENM (dense matrix):
    magic "DENM", rows u32, cols u32, row-major float32 values.

Readers check that the file size is exactly what the header implies.

Date: 17 Oct 2026
"""

import struct

import numpy as np

from ..bcq.bcq_tensor import BcqTensor, as_dense_matrix, num_groups, words_per_row

QTENSOR_MAGIC = b"LUTQ"
QTENSOR_VERSION = 1
QTENSOR_HEADER = struct.Struct("<4sHHIIBBI")
FLAG_BIAS = 0x1

DENSE_MAGIC = b"DENM"
DENSE_HEADER = struct.Struct("<4sII")


class QTensorFormatError(ValueError):
    """Raised when a file does not follow the QTensorFile or DENM layout."""


def qtensor_nbytes(m, n, q, group_size=0, bias_present=False):
    """Exact size in bytes of a QTensorFile with the given header fields."""
    groups = num_groups(n, group_size)
    size = QTENSOR_HEADER.size
    size += q * m * words_per_row(n) * 4
    size += m * groups * q * 4
    if bias_present:
        size += m * groups * 4
    return size


def qtensor_to_bytes(t):
    """Serialize a BcqTensor to QTensorFile bytes."""
    flags = FLAG_BIAS if t.has_bias else 0
    parts = [
        QTENSOR_HEADER.pack(
            QTENSOR_MAGIC, QTENSOR_VERSION, flags, t.rows, t.cols, t.bits, 0, t.group_size
        ),
        t.planes.astype("<u4").tobytes(),
        t.scales.astype("<f4").tobytes(),
    ]
    if t.has_bias:
        parts.append(t.biases.astype("<f4").tobytes())
    return b"".join(parts)


def qtensor_from_bytes(data):
    """Parse QTensorFile bytes into a BcqTensor."""
    if len(data) < QTENSOR_HEADER.size:
        raise QTensorFormatError(
            "size mismatch: %d bytes is shorter than the header" % len(data)
        )
    magic, version, flags, m, n, q, _, g = QTENSOR_HEADER.unpack_from(data)
    if magic != QTENSOR_MAGIC:
        raise QTensorFormatError("bad magic %r, expected %r" % (magic, QTENSOR_MAGIC))
    if version != QTENSOR_VERSION:
        raise QTensorFormatError("unsupported version %d" % version)
    if m < 1 or n < 1 or q < 1 or g > n:
        raise QTensorFormatError("invalid header m=%d n=%d q=%d g=%d" % (m, n, q, g))
    has_bias = bool(flags & FLAG_BIAS)

    expected = qtensor_nbytes(m, n, q, g, has_bias)
    if len(data) != expected:
        raise QTensorFormatError(
            "size mismatch: header implies %d bytes, file has %d" % (expected, len(data))
        )

    groups = num_groups(n, g)
    offset = QTENSOR_HEADER.size
    nwords = q * m * words_per_row(n)
    planes = np.frombuffer(data, dtype="<u4", count=nwords, offset=offset)
    offset += nwords * 4
    scales = np.frombuffer(data, dtype="<f4", count=m * groups * q, offset=offset)
    offset += m * groups * q * 4
    biases = None
    if has_bias:
        biases = np.frombuffer(data, dtype="<f4", count=m * groups, offset=offset)
        biases = biases.reshape(m, groups)

    try:
        return BcqTensor(
            planes.reshape(q, m, words_per_row(n)),
            scales.reshape(m, groups, q),
            cols=n,
            group_size=g,
            biases=biases,
        )
    except ValueError as err:
        raise QTensorFormatError(str(err)) from err


def write_qtensor(path, t):
    """Write a BcqTensor to a QTensorFile. Returns the number of bytes written."""
    data = qtensor_to_bytes(t)
    with open(path, "wb") as f:
        f.write(data)
    return len(data)


def read_qtensor(path):
    """Read a QTensorFile into a BcqTensor."""
    with open(path, "rb") as f:
        data = f.read()
    return qtensor_from_bytes(data)


def write_dense(path, W):
    """Write a dense matrix in DENM format."""
    W = as_dense_matrix(W)
    rows, cols = W.shape
    with open(path, "wb") as f:
        f.write(DENSE_HEADER.pack(DENSE_MAGIC, rows, cols))
        f.write(W.astype("<f4").tobytes())


def read_dense(path):
    """Read a DENM dense matrix as float32 (rows, cols)."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < DENSE_HEADER.size:
        raise QTensorFormatError("size mismatch: %d bytes is shorter than the header" % len(data))
    magic, rows, cols = DENSE_HEADER.unpack_from(data)
    if magic != DENSE_MAGIC:
        raise QTensorFormatError("bad magic %r, expected %r" % (magic, DENSE_MAGIC))
    expected = DENSE_HEADER.size + rows * cols * 4
    if len(data) != expected:
        raise QTensorFormatError(
            "size mismatch: header implies %d bytes, file has %d" % (expected, len(data))
        )
    values = np.frombuffer(data, dtype="<f4", offset=DENSE_HEADER.size)
    return values.reshape(rows, cols).astype(np.float32)
