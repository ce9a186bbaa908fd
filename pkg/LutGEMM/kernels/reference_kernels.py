"""
Reference and baseline kernels:
    dense_gemv:
    - full precision GEMV, the dense baseline
    bcq_gemv_naive:
    - per-bit BCQ GEMV without lookup tables, bit-exact oracle for lut_gemv
    dequant_gemv:
    - dequantize-then-GEMV baseline; weights are expanded 64 rows at a time
      and never fully materialized

All kernels split rows into tiles that can run on a thread pool. Each output
row is computed independently of the tiling.

Date: 16 Oct 2026
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..bcq.bcq_tensor import as_dense_matrix, as_dense_vector
from .lut_kernel import (
    accumulate_group_partials,
    chunk_base,
    check_mu,
    chunked_activations,
    combine_group_partials,
    group_activation_sums,
)

DEQUANT_TILE_ROWS = 64

# the naive kernel evaluates chunks with mu = 8 unless told otherwise
NAIVE_MU = 8


def _run_tiles(rows, tile_rows, threads, work):
    threads = threads or os.cpu_count() or 1
    starts = range(0, rows, tile_rows)
    if threads <= 1:
        parts = [work(r0, min(r0 + tile_rows, rows)) for r0 in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r0: work(r0, min(r0 + tile_rows, rows)), starts))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.float32)


def _dense_rows(W, x):
    """Per row: sequential ascending-column sum of float32 products."""
    return np.add.accumulate(W * x, axis=1)[:, -1]


def dense_gemv(W, x, threads=1):
    """
    Dense GEMV y[r] = sum_c W[r, c] * x[c], accumulated in ascending c.

    Parameters
    ----------
    W: array (m, n)
    x: array (n,)
    threads: int
        Default: 1. 0 uses all available cores.
    """
    W = as_dense_matrix(W)
    x = as_dense_vector(x)
    if W.shape[1] != x.size:
        raise ValueError("shape mismatch: matrix %s, vector %s" % (W.shape, x.shape))
    return _run_tiles(
        W.shape[0], DEQUANT_TILE_ROWS, threads, lambda r0, r1: _dense_rows(W[r0:r1], x)
    )


def _check_shapes(t, x):
    x = as_dense_vector(x)
    if x.size != t.cols:
        raise ValueError("shape mismatch: tensor %s, vector %s" % (t.shape, x.shape))
    return x


def dequant_gemv(t, x, threads=1):
    """
    Dequantize-then-GEMV: each 64-row tile of W_hat is expanded and
    multiplied with dense_gemv's accumulation order, so the output equals
    dense_gemv(dequantize(t), x) bit for bit.
    """
    x = _check_shapes(t, x)
    return _run_tiles(
        t.rows,
        DEQUANT_TILE_ROWS,
        threads,
        lambda r0, r1: _dense_rows(t.dequantize_rows(r0, r1), x),
    )


def _naive_row_tile(t, x_chunks, base, mu, group_sums, r0, r1):
    nchunks = x_chunks.shape[0]
    signs = t.signs(r0, r1)
    q, rows, n = signs.shape
    padded = np.full((q, rows, nchunks * mu), -1, dtype=np.int8)
    padded[..., :n] = signs
    positive = padded.reshape(q, rows, nchunks, mu) > 0

    twice = np.float32(2) * x_chunks
    partials = np.broadcast_to(base, (q, rows, nchunks)).copy()
    for j in range(mu - 1, -1, -1):
        partials = np.where(positive[..., j], partials + twice[:, j], partials)

    chunks_per_group = t.g // mu if t.group_size > 0 else nchunks
    group_partials = accumulate_group_partials(partials, chunks_per_group, t.num_groups)
    biases = None if t.biases is None else t.biases[r0:r1]
    return combine_group_partials(group_partials, t.scales[r0:r1], biases, group_sums)


def bcq_gemv_naive(t, x, mu=NAIVE_MU, threads=1):
    """
    Naive BCQ GEMV. Every row recomputes its own signed sums of x, nothing is
    memoized. Signed sums follow the chunk order of the LUT kernel with the
    same mu, which makes this kernel the bit-exact oracle for lut_gemv.

    Parameters
    ----------
    t: BcqTensor
    x: array (t.cols,)
    mu: int
        Chunk length of the accumulation order to reproduce.
        Default: 8
    threads: int
        Default: 1. 0 uses all available cores.
    """
    x = _check_shapes(t, x)
    check_mu(mu)
    if t.group_size > 0 and t.group_size % mu != 0:
        raise ValueError("group_size %d is not a multiple of mu %d" % (t.group_size, mu))
    x_chunks = chunked_activations(x, mu)
    base = chunk_base(x_chunks)
    group_sums = group_activation_sums(x, t.group_size) if t.biases is not None else None
    return _run_tiles(
        t.rows,
        DEQUANT_TILE_ROWS,
        threads,
        lambda r0, r1: _naive_row_tile(t, x_chunks, base, mu, group_sums, r0, r1),
    )
