"""
LUT-based quantized GEMV for LutGEMM.

For an activation vector x split into mu-length sub-vectors, every sub-vector
gets a table of all 2^mu signed partial sums. A bit-plane row is then read mu
bits at a time and each mu-bit key is replaced by one table lookup, so

    y = sum_i A_i o (B_i . x)  (+ z * sum of x over each group)

costs q * m * n/mu lookups instead of m * n multiply-adds.

Accumulation order (shared with bcq_gemv_naive, which makes the two kernels
bit-identical):
    - the partial sum of a chunk under key k is -(x_0 + ... + x_{mu-1}) summed
      in ascending order, plus 2*x_j for every set bit j of k, highest bit
      first;
    - chunk partials are summed per group in ascending chunk order;
    - each row sums alpha[r, j, i] * partial[i, r, j] with planes i outer and
      groups j inner, then z[r, j] * sum(x over group j) for ascending j.
Column tiles only gather lookups into the partial buffer and row tiles own
disjoint output slices, so neither the tiling nor the thread count changes
the result.

Date: 16 Oct 2026
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..bcq.bcq_tensor import as_dense_vector, resolve_group_size

MU_RANGE = (1, 12)
DEFAULT_TILE_ROWS = 2048


class KernelConfig:
    """
    Tiling and threading parameters of the LUT kernel.
    """

    def __init__(self, mu=8, tile_rows=None, luts_per_tile=32, threads=0):
        """
        Parameters
        ----------
        mu: int
            Sub-vector length, 1 to 12.
            Default: 8
        tile_rows: int
            Rows per tile t_h. None picks 2048 when m >= 2048, else m.
            Default: None
        luts_per_tile: int
            LUTs per column tile l. The tile width is t_w = l * mu.
            Default: 32
        threads: int
            Worker threads. 0 uses all available cores.
            Default: 0
        """
        if not MU_RANGE[0] <= mu <= MU_RANGE[1]:
            raise ValueError("mu must be in [%d, %d], got %s" % (MU_RANGE + (mu,)))
        if tile_rows is not None and tile_rows < 1:
            raise ValueError("tile_rows must be >= 1, got %s" % tile_rows)
        if luts_per_tile < 1:
            raise ValueError("luts_per_tile must be >= 1, got %s" % luts_per_tile)
        if threads < 0:
            raise ValueError("threads must be >= 0, got %s" % threads)
        self.mu = int(mu)
        self.tile_rows = tile_rows
        self.luts_per_tile = int(luts_per_tile)
        self.threads = int(threads)

    @property
    def tile_width(self):
        return self.luts_per_tile * self.mu

    def rows_per_tile(self, rows):
        if self.tile_rows is not None:
            return min(self.tile_rows, rows)
        return DEFAULT_TILE_ROWS if rows >= DEFAULT_TILE_ROWS else rows

    def num_threads(self):
        return self.threads or os.cpu_count() or 1

    def __repr__(self):
        return "KernelConfig(mu=%d, tile_rows=%s, luts_per_tile=%d, threads=%d)" % (
            self.mu,
            self.tile_rows,
            self.luts_per_tile,
            self.threads,
        )


class KernelCounters:
    """Operation counters filled by build_luts and lut_gemv."""

    def __init__(self):
        self.lut_build_adds = 0
        self.lut_reads = 0
        self.scale_mults = 0

    def as_dict(self):
        return {
            "lut_build_adds": self.lut_build_adds,
            "lut_reads": self.lut_reads,
            "scale_mults": self.scale_mults,
        }


class LutBank:
    """
    The tables built from one activation vector: tables[t][k] is the signed
    sum of sub-vector t under sign pattern k (bit j set means +x[t*mu + j]).
    """

    def __init__(self, x, mu, tables):
        self.x = np.array(x, dtype=np.float32)
        self.mu = mu
        self.tables = tables
        self.num_tables = tables.shape[0]
        self.x.flags.writeable = False
        self.tables.flags.writeable = False

    def __len__(self):
        return self.num_tables

    def nbytes(self):
        return self.tables.nbytes

    def group_sums(self, group_size):
        """Per-group activation sums, used by the bias term."""
        return group_activation_sums(self.x, group_size)


def check_mu(mu):
    if not MU_RANGE[0] <= mu <= MU_RANGE[1]:
        raise ValueError("mu must be in [%d, %d], got %s" % (MU_RANGE + (mu,)))


def check_group_compatible(cols, group_size, mu):
    """
    A mu-chunk may not straddle a group boundary: for g > 0, g must be a
    multiple of mu (which also gives mu <= g).
    """
    if group_size > 0 and group_size % mu != 0:
        raise ValueError(
            "group_size %d is not a multiple of mu %d; chunks would straddle groups"
            % (group_size, mu)
        )
    resolve_group_size(cols, group_size)


def chunked_activations(x, mu):
    """x zero padded to a whole number of chunks, shape (ceil(n/mu), mu)."""
    nchunks = -(-x.size // mu)
    xs = np.zeros(nchunks * mu, dtype=np.float32)
    xs[: x.size] = x
    return xs.reshape(nchunks, mu)


def chunk_base(xs):
    """All-minus partial sum per chunk: -(x_0 + x_1 + ...) in ascending order."""
    return -np.add.accumulate(xs, axis=1)[:, -1]


def group_activation_sums(x, group_size):
    """Sequential sum of x over each group of columns."""
    n = x.size
    g = resolve_group_size(n, group_size)
    G = -(-n // g)
    padded = np.zeros(G * g, dtype=np.float32)
    padded[:n] = x
    return np.add.accumulate(padded.reshape(G, g), axis=1)[:, -1]


def build_luts(x, mu=8, counters=None):
    """
    Build the LUT bank of an activation vector.

    Each table starts from the all-minus entry and fills the rest with
    table[k] = table[k ^ lowbit(k)] + 2 * x[lowbit index], one addition per
    entry, vectorized over all tables.

    Parameters
    ----------
    x: array (n,)
        Activation vector.
    mu: int
        Sub-vector length, 1 to 12.
        Default: 8
    counters: KernelCounters
        Incremented by 2^mu per table when given.
        Default: None

    Returns
    -------
    LutBank
    """
    check_mu(mu)
    x = as_dense_vector(x)
    xs = chunked_activations(x, mu)
    twice = np.float32(2) * xs

    tables = np.empty((xs.shape[0], 2**mu), dtype=np.float32)
    tables[:, 0] = chunk_base(xs)
    # lowbit j = mu-1 first: every k - 2^j then has a higher lowbit or is 0
    for j in range(mu - 1, -1, -1):
        keys = np.arange(2**j, 2**mu, 2 ** (j + 1))
        tables[:, keys] = tables[:, keys - 2**j] + twice[:, j : j + 1]

    if counters is not None:
        counters.lut_build_adds += tables.size
    return LutBank(x, mu, tables)


def chunk_keys(planes, cols, mu):
    """
    Read mu-bit keys from packed plane rows.

    Parameters
    ----------
    planes: uint32 array (q, rows, words)
    cols: int
    mu: int

    Returns
    -------
    keys: intp array (q, rows, ceil(cols/mu)); bit j of a key is column
    t*mu + j. Bits past cols are zero.
    """
    nchunks = -(-cols // mu)
    raw = np.ascontiguousarray(planes, dtype="<u4").view(np.uint8)
    if mu == 8:
        return raw[..., :nchunks].astype(np.intp)
    bits = np.unpackbits(raw, axis=-1, bitorder="little")
    need = nchunks * mu
    if bits.shape[-1] < need:
        pad = np.zeros(bits.shape[:-1] + (need - bits.shape[-1],), dtype=np.uint8)
        bits = np.concatenate([bits, pad], axis=-1)
    bits = bits[..., :need].reshape(bits.shape[:-1] + (nchunks, mu))
    weights = (1 << np.arange(mu)).astype(np.intp)
    return bits.astype(np.intp) @ weights


def accumulate_group_partials(partials, chunks_per_group, num_groups):
    """
    Sum chunk partials (q, rows, nchunks) into group partials
    (q, rows, num_groups), sequentially in ascending chunk order. Missing
    chunks of a short last group count as +0.
    """
    q, rows, nchunks = partials.shape
    total = chunks_per_group * num_groups
    if total != nchunks:
        padded = np.zeros((q, rows, total), dtype=np.float32)
        padded[..., :nchunks] = partials
        partials = padded
    grouped = partials.reshape(q, rows, num_groups, chunks_per_group)
    return np.add.accumulate(grouped, axis=-1)[..., -1]


def combine_group_partials(group_partials, scales, biases, group_sums):
    """
    Row outputs from group partials: the sequential sum of
    scales[r, j, i] * group_partials[i, r, j] over planes i (outer) and
    groups j (inner), followed by biases[r, j] * group_sums[j].
    """
    q = group_partials.shape[0]
    terms = [scales[:, :, i] * group_partials[i] for i in range(q)]
    if biases is not None:
        terms.append(biases * group_sums)
    terms = np.concatenate(terms, axis=1)
    return np.add.accumulate(terms, axis=1)[:, -1]


def _check_kernel_inputs(t, bank, cfg):
    if bank.mu != cfg.mu:
        raise ValueError("LUT bank mu %d does not match config mu %d" % (bank.mu, cfg.mu))
    if bank.x.size != t.cols:
        raise ValueError(
            "activation length %d does not match tensor cols %d" % (bank.x.size, t.cols)
        )
    check_group_compatible(t.cols, t.group_size, cfg.mu)


def _lut_row_tile(t, bank, cfg, r0, r1, group_sums):
    """Outputs and lookup count for rows [r0, r1)."""
    mu = cfg.mu
    nchunks = bank.num_tables
    keys = chunk_keys(t.planes[:, r0:r1], t.cols, mu)

    partials = np.empty(keys.shape, dtype=np.float32)
    for c0 in range(0, nchunks, cfg.luts_per_tile):
        c1 = min(c0 + cfg.luts_per_tile, nchunks)
        lut_index = np.arange(c0, c1)
        partials[..., c0:c1] = bank.tables[lut_index, keys[..., c0:c1]]

    chunks_per_group = t.g // mu if t.group_size > 0 else nchunks
    group_partials = accumulate_group_partials(partials, chunks_per_group, t.num_groups)
    biases = None if t.biases is None else t.biases[r0:r1]
    y = combine_group_partials(group_partials, t.scales[r0:r1], biases, group_sums)
    return y, partials.size


def _run_row_tiles(t, cfg, work):
    step = cfg.rows_per_tile(t.rows)
    starts = list(range(0, t.rows, step))
    threads = min(cfg.num_threads(), len(starts))
    if threads <= 1:
        return [work(r0, min(r0 + step, t.rows)) for r0 in starts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r0: work(r0, min(r0 + step, t.rows)), starts))


def lut_gemv_into(t, bank, cfg, out, counters=None):
    """
    Accumulate the LUT-based product into out: out += lut_gemv(t, bank, cfg).

    Row tiles run on the thread pool and each owns a disjoint slice of out.

    Parameters
    ----------
    t: BcqTensor
    bank: LutBank
        Built from an x of length t.cols with the config's mu.
    cfg: KernelConfig
    out: float32 array (t.rows,)
        Accumulator, updated in place.
    counters: KernelCounters
        Default: None
    """
    if cfg is None:
        cfg = KernelConfig(mu=bank.mu)
    _check_kernel_inputs(t, bank, cfg)
    if out.shape != (t.rows,):
        raise ValueError("out must have shape (%d,), got %s" % (t.rows, out.shape))
    group_sums = bank.group_sums(t.group_size) if t.biases is not None else None

    def work(r0, r1):
        y, reads = _lut_row_tile(t, bank, cfg, r0, r1, group_sums)
        out[r0:r1] += y
        return reads

    reads = _run_row_tiles(t, cfg, work)
    if counters is not None:
        counters.lut_reads += sum(reads)
        counters.scale_mults += t.rows * t.num_groups * t.bits


def lut_gemv(t, bank, cfg=None, counters=None):
    """
    LUT-based GEMV y = sum_i A_i o (B_i . x) + bias term.

    Parameters
    ----------
    t: BcqTensor
    bank: LutBank
        Built from an x of length t.cols with the config's mu.
    cfg: KernelConfig
        Default: KernelConfig(mu=bank.mu)
    counters: KernelCounters
        Default: None

    Returns
    -------
    y: float32 array (t.rows,)
    """
    out = np.zeros(t.rows, dtype=np.float32)
    lut_gemv_into(t, bank, cfg, out, counters)
    return out


def op_counts(m, n, q, mu, group_size=0):
    """
    Operation counts of one LUT GEMV.

    Returns
    -------
    dict with keys
        lut_build_adds: 2^mu * ceil(n/mu)
        lut_reads: m * ceil(n/mu) * q
        scale_mults: m * ceil(n/g) * q
    """
    if min(m, n, q, mu) < 1:
        raise ValueError("dimensions must be positive")
    nchunks = -(-n // mu)
    g = resolve_group_size(n, group_size)
    return {
        "lut_build_adds": 2**mu * nchunks,
        "lut_reads": m * nchunks * q,
        "scale_mults": m * -(-n // g) * q,
    }
