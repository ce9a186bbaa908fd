"""
Analytic cost and memory models for LUT-based GEMV, and helpers to explore
the (q, g) compression search space.

Memory accounting follows the 16-bit convention: binary weights take
m*n*q bits and every scaling factor (and bias) 16 bits, so

    S = S_b + S_alpha = m*n*q + 16*m*ceil(n/g)*q  (+ 16*m*ceil(n/g) with bias)

The as-built size of this implementation (32-bit reals, word padded planes,
file header) is reported alongside.

Date: 17 Oct 2026
"""

import numpy as np
import pandas as pd

from ..bcq.bcq_tensor import resolve_group_size
from ..file_formats.tensor_io import qtensor_nbytes

SCALE_BITS = 16
DENSE_BITS = 16


def _check_dims(**dims):
    for name, value in dims.items():
        if value < 1:
            raise ValueError("%s must be positive, got %s" % (name, value))


class FootprintReport:
    """
    Memory footprint of a q-bit, group size g BcqTensor.

    Attributes
    ----------
    binary_bits: S_b, bits of the binary planes.
    scale_bits: S_alpha, bits of scaling factors plus biases (16 bits each).
    bias_bits: the bias share of scale_bits.
    total_bits: S = S_b + S_alpha.
    bytes: total_bits rounded up to whole bytes.
    compression_ratio: 16-bit dense size over S.
    as_built_bytes: exact QTensorFile size of this implementation.
    as_built_ratio: 16-bit dense bytes over as_built_bytes.
    """

    def __init__(self, m, n, q, group_size=0, bias_present=False):
        _check_dims(m=m, n=n, q=q)
        g = resolve_group_size(n, group_size)
        groups = -(-n // g)

        self.m, self.n, self.q, self.group_size = m, n, q, group_size
        self.bias_present = bool(bias_present)
        self.binary_bits = m * n * q
        self.bias_bits = SCALE_BITS * m * groups if bias_present else 0
        self.scale_bits = SCALE_BITS * m * groups * q + self.bias_bits
        self.total_bits = self.binary_bits + self.scale_bits
        self.bytes = -(-self.total_bits // 8)
        self.compression_ratio = DENSE_BITS * m * n / self.total_bits
        self.as_built_bytes = qtensor_nbytes(m, n, q, group_size, bias_present)
        self.as_built_ratio = DENSE_BITS // 8 * m * n / self.as_built_bytes

    def as_dict(self):
        return {
            "binary_bits": self.binary_bits,
            "scale_bits": self.scale_bits,
            "bias_bits": self.bias_bits,
            "total_bits": self.total_bits,
            "bytes": self.bytes,
            "compression_ratio": self.compression_ratio,
            "as_built_bytes": self.as_built_bytes,
            "as_built_ratio": self.as_built_ratio,
        }


def memory_footprint(m, n, q, group_size=0, bias_present=False):
    """
    Footprint of a BcqTensor under the 16-bit accounting.

    Parameters
    ----------
    m, n: int
        Matrix shape.
    q: int
        Number of bit-planes.
    group_size: int
        Columns per group, 0 for row-wise (g = n).
        Default: 0
    bias_present: bool
        Whether a bias is stored per group.
        Default: False

    Returns
    -------
    FootprintReport
    """
    return FootprintReport(m, n, q, group_size, bias_present)


def cost_model(m, n, q, mu):
    """
    Operation counts of LUT-based GEMV against dense GEMV.

    Returns
    -------
    dict with keys
        c_build: 2^mu * ceil(n/mu), LUT construction
        c_read: m * ceil(n/mu) * q, LUT reads
        dense_macs: m * n
        reduction_factor: dense_macs / c_read (mu/q when mu divides n)
    """
    _check_dims(m=m, n=n, q=q, mu=mu)
    nchunks = -(-n // mu)
    c_read = m * nchunks * q
    return {
        "c_build": 2**mu * nchunks,
        "c_read": c_read,
        "dense_macs": m * n,
        "reduction_factor": m * n / c_read,
    }


def lut_memory_bytes(n, mu, entry_bytes=4):
    """Size of the whole LUT bank for an n-long activation vector."""
    _check_dims(n=n, mu=mu, entry_bytes=entry_bytes)
    return -(-n // mu) * 2**mu * entry_bytes


def max_lut_columns(capacity_bytes, mu, entry_bytes=4):
    """
    Largest hidden dimension whose whole LUT bank fits in capacity_bytes of
    fast memory.
    """
    _check_dims(mu=mu, entry_bytes=entry_bytes)
    return int(capacity_bytes // (2**mu * entry_bytes)) * mu


def compression_search_space(m, n, bits_list, group_list, bias_present=False):
    """
    Footprint of every (q, g) configuration, sorted by compression ratio.

    Parameters
    ----------
    m, n: int
        Matrix shape.
    bits_list: iterable of int
    group_list: iterable of int
        Group sizes, 0 for row-wise.
    bias_present: bool
        Default: False

    Returns
    -------
    DataFrame with one row per configuration.
    """
    rows = []
    for q in bits_list:
        for g in group_list:
            report = memory_footprint(m, n, q, g, bias_present)
            rows.append(dict(q=q, g=g, **report.as_dict()))
    df = pd.DataFrame(rows)
    return df.sort_values("compression_ratio", kind="stable").reset_index(drop=True)


def pareto_front(df, error_column="rel_fro_error", ratio_column="compression_ratio"):
    """
    Configurations not dominated by another one with both a higher (or equal)
    compression ratio and a lower error. Returned sorted by ratio.
    """
    ordered = df.sort_values(
        [ratio_column, error_column], ascending=[False, True], kind="stable"
    )
    keep = []
    best_error = np.inf
    for idx, err in zip(ordered.index, ordered[error_column]):
        if err < best_error:
            keep.append(idx)
            best_error = err
    return df.loc[keep].sort_values(ratio_column, kind="stable")
