"""
Asymmetric uniform (round-to-nearest) quantization and its conversion into
extended BCQ.

A q-bit uniformly quantized weight is

    w_hat = s * code + z_hat,    code = sum_i 2^i * b_hat_i,  b_hat_i in {0, 1}

Writing b_i = 2*b_hat_i - 1 gives the BCQ form with alpha_i = 2^(i-1) * s and
bias z = sum_i alpha_i + z_hat, so uniform quantization is a special case of
BCQ with a bias term.

Date: 14 Oct 2026
"""

import numpy as np

from ..bcq.bcq_tensor import (
    BcqTensor,
    as_dense_matrix,
    num_groups,
    resolve_group_size,
)

MAX_RTN_BITS = 8


def group_weights(W, group_size):
    """
    Reshape an (m, n) matrix into (m, G, g) float64 groups. The last group is
    zero padded when g does not divide n.

    Returns
    -------
    Wg: array (m, G, g)
    mask: bool array (G, g), True where an element belongs to the matrix.
    """
    m, n = W.shape
    g = resolve_group_size(n, group_size)
    G = num_groups(n, group_size)
    Wg = np.zeros((m, G * g), dtype=np.float64)
    Wg[:, :n] = W
    mask = np.zeros(G * g, dtype=bool)
    mask[:n] = True
    return Wg.reshape(m, G, g), mask.reshape(G, g)


def ungroup(Xg, cols):
    """Inverse of group_weights on the last two axes: (..., G, g) -> (..., n)."""
    shape = Xg.shape[:-2] + (Xg.shape[-2] * Xg.shape[-1],)
    return Xg.reshape(shape)[..., :cols]


class UniformQuant:
    """
    Asymmetric uniformly quantized matrix: integer codes plus a scale s and a
    zero offset z_hat per (row, group).
    """

    def __init__(self, codes, scale, zero_offset, bits, group_size=0):
        """
        Parameters
        ----------
        codes: integer array (m, n)
            Quantization codes in [0, 2^bits - 1].
        scale: array (m, ceil(n/g))
            Step size s per group.
        zero_offset: array (m, ceil(n/g))
            Offset z_hat per group (the value of code 0).
        bits: int
            Number of quantization bits q.
        group_size: int
            Columns per group, 0 for row-wise.
            Default: 0
        """
        self.codes = np.ascontiguousarray(codes, dtype=np.int32)
        if self.codes.ndim != 2:
            raise ValueError("codes must be a 2-D array")
        self.rows, self.cols = self.codes.shape
        self.bits = int(bits)
        if self.bits < 1:
            raise ValueError("bits must be >= 1, got %d" % self.bits)
        if self.codes.min() < 0 or self.codes.max() > 2**self.bits - 1:
            raise ValueError("codes must lie in [0, %d]" % (2**self.bits - 1))
        self.group_size = int(group_size)
        self.g = resolve_group_size(self.cols, self.group_size)
        self.num_groups = num_groups(self.cols, self.group_size)

        shape = (self.rows, self.num_groups)
        self.scale = np.ascontiguousarray(scale, dtype=np.float32)
        self.zero_offset = np.ascontiguousarray(zero_offset, dtype=np.float32)
        if self.scale.shape != shape or self.zero_offset.shape != shape:
            raise ValueError("scale and zero_offset must have shape %s" % (shape,))
        if not (np.all(np.isfinite(self.scale)) and np.all(np.isfinite(self.zero_offset))):
            raise ValueError("scale and zero_offset must be finite")

    def dequantize(self):
        """Dense float32 matrix s * code + z_hat."""
        grp = np.arange(self.cols) // self.g
        return (
            self.scale[:, grp] * self.codes.astype(np.float32) + self.zero_offset[:, grp]
        )


def quantize_rtn(W, bits, group_size=0):
    """
    Min-max round-to-nearest uniform quantization, per (row, group):
    s = (max - min) / (2^q - 1), z_hat = min, code = round((w - z_hat) / s).

    A constant group (max == min) gets s = 1, codes 0 and z_hat = min so that
    it dequantizes exactly.

    Parameters
    ----------
    W: array (m, n)
        Dense weights.
    bits: int
        Number of bits, 1 to 8.
    group_size: int
        Columns per group, 0 for row-wise.
        Default: 0

    Returns
    -------
    UniformQuant
    """
    if not 1 <= bits <= MAX_RTN_BITS:
        raise ValueError("bits must be in [1, %d], got %s" % (MAX_RTN_BITS, bits))
    W = as_dense_matrix(W)
    m, n = W.shape
    Wg, mask = group_weights(W, group_size)

    wmax = np.where(mask, Wg, -np.inf).max(axis=-1)
    wmin = np.where(mask, Wg, np.inf).min(axis=-1)
    levels = 2**bits - 1

    step = (wmax - wmin) / levels
    degenerate = step == 0.0
    step[degenerate] = 1.0

    codes = np.floor((Wg - wmin[..., None]) / step[..., None] + 0.5)
    codes = np.clip(codes, 0, levels)
    codes[degenerate] = 0

    return UniformQuant(
        ungroup(codes, n).astype(np.int32),
        step.astype(np.float32),
        wmin.astype(np.float32),
        bits,
        group_size,
    )


def uniform_to_bcq(u):
    """
    Convert a UniformQuant into an extended BcqTensor: alpha_i = 2^(i-1) * s,
    z = sum_i alpha_i + z_hat, and plane i holds bit i of each code.
    """
    q = u.bits
    powers = (2.0 ** (np.arange(q) - 1)).astype(np.float32)
    scales = u.scale[..., np.newaxis] * powers

    biases = np.zeros_like(u.zero_offset)
    for i in range(q):
        biases += scales[..., i]
    biases += u.zero_offset

    signs = np.empty((q, u.rows, u.cols), dtype=np.int8)
    for i in range(q):
        signs[i] = np.where((u.codes >> i) & 1, 1, -1)

    return BcqTensor.from_signs(signs, scales, group_size=u.group_size, biases=biases)
