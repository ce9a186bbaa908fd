"""
BcqTensor class of LutGEMM. The extended binary-coding quantized weight
matrix, its bit-plane packing, and dequantization back to dense weights.

Each weight is represented as

    w_hat = sum_i alpha_i * b_i + z,    b_i in {-1, +1}

where the scaling factors alpha_i and the bias z are shared by a group of g
consecutive columns in a row. Bit value 1 in a packed plane stands for +1,
bit value 0 for -1.

Date: 14 Oct 2026
"""

import numpy as np

WORD_BITS = 32


def resolve_group_size(cols, group_size):
    """
    Return the effective group size. A group_size of 0 means row-wise
    quantization, i.e. one group spanning all columns.
    """
    if group_size < 0 or group_size > cols:
        raise ValueError(
            "group_size must be 0 (row-wise) or in [1, %d], got %d" % (cols, group_size)
        )
    return cols if group_size == 0 else int(group_size)


def num_groups(cols, group_size):
    """Number of column groups, ceil(n/g). The last group may be short."""
    g = resolve_group_size(cols, group_size)
    return -(-cols // g)


def words_per_row(cols):
    """Number of 32-bit words needed to hold one packed plane row."""
    return -(-cols // WORD_BITS)


def pack_planes(sign_planes):
    """
    Pack q binary (+1/-1) matrices into little-endian 32-bit words.

    Bit j of word w of row r of plane i is 1 iff sign_planes[i][r][32*w + j]
    is +1. Rows are padded to a whole word and padding bits are 0.

    Parameters
    ----------
    sign_planes: array or sequence of arrays
        q matrices of shape (m, n) holding only +1 and -1. A single (m, n)
        matrix is treated as q=1.

    Returns
    -------
    planes: array of uint32, shape (q, m, ceil(n/32))
    """
    if isinstance(sign_planes, (list, tuple)):
        shapes = {np.shape(p) for p in sign_planes}
        if len(shapes) != 1:
            raise ValueError("all sign planes must have the same shape, got %s" % shapes)
    signs = np.asarray(sign_planes)
    if signs.ndim == 2:
        signs = signs[np.newaxis]
    if signs.ndim != 3:
        raise ValueError("sign planes must be (q, m, n), got shape %s" % (signs.shape,))
    if not np.all((signs == 1) | (signs == -1)):
        raise ValueError("sign planes may contain only +1 and -1")

    q, m, n = signs.shape
    nbits = words_per_row(n) * WORD_BITS
    bits = np.zeros((q, m, nbits), dtype=np.uint8)
    bits[:, :, :n] = signs > 0
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u4")


def unpack_planes(planes, cols):
    """
    Inverse of pack_planes. Returns an int8 array (q, m, cols) of +1/-1.
    Padding bits beyond cols are ignored.
    """
    planes = np.ascontiguousarray(planes, dtype="<u4")
    bits = np.unpackbits(planes.view(np.uint8), axis=-1, bitorder="little")
    return np.where(bits[..., :cols] == 1, 1, -1).astype(np.int8)


def padding_mask(cols):
    """Per-word mask that keeps the first cols bits of a packed row."""
    nwords = words_per_row(cols)
    mask = np.full(nwords, 0xFFFFFFFF, dtype=np.uint64)
    tail = cols % WORD_BITS
    if tail:
        mask[-1] = (1 << tail) - 1
    return mask.astype("<u4")


class BcqTensor:
    """
    Quantized weight matrix in extended BCQ form: q packed bit-planes,
    group-wise scaling factors and optional group-wise biases.

    The tensor is immutable after construction; its arrays are flagged
    read-only so it can be shared between threads.
    """

    def __init__(self, planes, scales, cols, group_size=0, biases=None):
        """
        Initialize BcqTensor.

        Parameters
        ----------
        planes: array of uint32, shape (q, m, ceil(n/32))
            Packed bit-planes, as produced by pack_planes. Padding bits
            beyond column n are cleared on construction.
        scales: array, shape (m, ceil(n/g), q)
            Scaling factor alpha per (row, group, bit-plane).
        cols: int
            Number of columns n.
        group_size: int
            Columns sharing one scaling set. 0 means row-wise.
            Default: 0
        biases: array, shape (m, ceil(n/g)), or None
            Bias z per (row, group).
            Default: None
        """

        planes = np.asarray(planes)
        if planes.ndim != 3:
            raise ValueError("planes must be (q, m, words), got shape %s" % (planes.shape,))
        self.bits, self.rows, nwords = planes.shape
        self.cols = int(cols)
        if self.bits < 1:
            raise ValueError("a BcqTensor needs at least one bit-plane")
        if self.cols < 1 or self.rows < 1:
            raise ValueError("rows and cols must be positive")
        if nwords != words_per_row(self.cols):
            raise ValueError(
                "planes hold %d words per row, %d columns need %d"
                % (nwords, self.cols, words_per_row(self.cols))
            )
        self.group_size = int(group_size)
        self.g = resolve_group_size(self.cols, self.group_size)
        self.num_groups = num_groups(self.cols, self.group_size)

        # clear padding so it can never contribute
        self.planes = np.ascontiguousarray(planes.astype("<u4") & padding_mask(self.cols))

        self.scales = np.array(scales, dtype=np.float32, order="C")
        if self.scales.shape != (self.rows, self.num_groups, self.bits):
            raise ValueError(
                "scales must have shape %s, got %s"
                % ((self.rows, self.num_groups, self.bits), self.scales.shape)
            )
        if not np.all(np.isfinite(self.scales)):
            raise ValueError("scales must be finite")

        if biases is not None:
            biases = np.array(biases, dtype=np.float32, order="C")
            if biases.shape != (self.rows, self.num_groups):
                raise ValueError(
                    "biases must have shape %s, got %s"
                    % ((self.rows, self.num_groups), biases.shape)
                )
            if not np.all(np.isfinite(biases)):
                raise ValueError("biases must be finite")
        self.biases = biases

        for arr in (self.planes, self.scales, self.biases):
            if arr is not None:
                arr.flags.writeable = False

    @classmethod
    def from_signs(cls, sign_planes, scales, group_size=0, biases=None):
        """Build a BcqTensor from unpacked (q, m, n) +1/-1 planes."""
        signs = np.asarray(sign_planes)
        if signs.ndim == 2:
            signs = signs[np.newaxis]
        return cls(
            pack_planes(signs),
            scales,
            cols=signs.shape[-1],
            group_size=group_size,
            biases=biases,
        )

    @property
    def has_bias(self):
        return self.biases is not None

    @property
    def shape(self):
        return (self.rows, self.cols)

    def group_of_column(self):
        """Array mapping each column index to its group index."""
        return np.arange(self.cols) // self.g

    def signs(self, row_start=0, row_stop=None):
        """Unpacked +1/-1 planes (q, rows, n) for a row range."""
        return unpack_planes(self.planes[:, row_start:row_stop], self.cols)

    def dequantize_rows(self, row_start=0, row_stop=None):
        """
        Dense float32 weights for rows [row_start, row_stop). Planes are
        accumulated in ascending bit order, then the bias is added.
        """
        signs = self.signs(row_start, row_stop).astype(np.float32)
        grp = self.group_of_column()
        scales = self.scales[row_start:row_stop][:, grp, :]
        w = np.zeros(signs.shape[1:], dtype=np.float32)
        for i in range(self.bits):
            w += scales[:, :, i] * signs[i]
        if self.biases is not None:
            w += self.biases[row_start:row_stop][:, grp]
        return w

    def truncated(self, bits):
        """Tensor keeping only the first `bits` planes and scales."""
        if not 1 <= bits <= self.bits:
            raise ValueError("bits must be in [1, %d], got %d" % (self.bits, bits))
        return BcqTensor(
            self.planes[:bits],
            self.scales[:, :, :bits],
            cols=self.cols,
            group_size=self.group_size,
            biases=self.biases,
        )

    def nbytes(self):
        """As-built in-memory size of planes, scales and biases in bytes."""
        total = self.planes.nbytes + self.scales.nbytes
        if self.biases is not None:
            total += self.biases.nbytes
        return total


def dequantize(t):
    """
    Dense float32 matrix W_hat[r, c] = sum_i scales[r, grp(c), i] * sign_i[r, c]
    + biases[r, grp(c)].
    """
    return t.dequantize_rows(0, t.rows)


def as_dense_matrix(W):
    """Validate and convert to a finite, C-ordered float32 matrix."""
    W = np.ascontiguousarray(W, dtype=np.float32)
    if W.ndim != 2:
        raise ValueError("expected a 2-D matrix, got shape %s" % (W.shape,))
    if not np.all(np.isfinite(W)):
        raise ValueError("matrix values must be finite")
    return W


def as_dense_vector(x):
    """Validate and convert to a finite float32 vector."""
    x = np.ascontiguousarray(x, dtype=np.float32)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("expected a non-empty 1-D vector, got shape %s" % (x.shape,))
    if not np.all(np.isfinite(x)):
        raise ValueError("vector values must be finite")
    return x
