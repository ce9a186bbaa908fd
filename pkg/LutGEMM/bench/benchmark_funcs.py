"""
Synthetic data, timing and sweeps for LutGEMM.

Random numbers come from a counter-based splitmix64 generator so that every
matrix, vector and tensor is reproducible across platforms and numpy
versions. Output k of the stream keyed by `key` is

    z = key + (k + 1) * 0x9E3779B97F4A7C15             (mod 2^64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

A seed is split into independent streams (dense matrix, activation vector,
bit-planes, scales, biases) by keying each stream with output `stream` of the
seed's own stream. Uniform reals take the top 53 bits, Gaussian values use
Box-Muller on consecutive pairs of uniforms.

Date: 17 Oct 2026
"""

import sys
import time

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..bcq.bcq_tensor import BcqTensor, num_groups, words_per_row
from ..file_formats.tensor_io import DENSE_HEADER, qtensor_nbytes
from ..kernels.lut_kernel import (
    KernelConfig,
    build_luts,
    check_group_compatible,
    lut_gemv,
)
from ..kernels.reference_kernels import (
    DEQUANT_TILE_ROWS,
    bcq_gemv_naive,
    dense_gemv,
    dequant_gemv,
)
from ..perf_functions.perf_funcs import DENSE_BITS, memory_footprint
from ..quantizers.bcq_quantizers import QuantMethod, quantization_error, quantize_matrix

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_2 = np.uint64(0x94D049BB133111EB)
UINT64_MASK = (1 << 64) - 1

STREAM_MATRIX = 0
STREAM_VECTOR = 1
STREAM_PLANES = 2
STREAM_SCALES = 3
STREAM_BIASES = 4

# values generated per block, bounds the temporary memory of the generator
_BLOCK = 1 << 20

KERNELS = ("lut", "dequant", "dense", "naive")
DEFAULT_MEMORY_BUDGET = 8 * 2**30


def splitmix64(key, start, count):
    """Outputs start, ..., start + count - 1 of the splitmix64 stream of key."""
    counter = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key & UINT64_MASK) + counter * GOLDEN_GAMMA
        z = (z ^ (z >> np.uint64(30))) * MIX_1
        z = (z ^ (z >> np.uint64(27))) * MIX_2
    return z ^ (z >> np.uint64(31))


def _check_seed(seed):
    if seed < 0:
        raise ValueError("seed must be >= 0, got %s" % seed)


def stream_key(seed, stream):
    """Key of an independent sub-stream of seed."""
    _check_seed(seed)
    return int(splitmix64(seed, stream, 1)[0])


def _unit(z):
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def uniform_values(seed, count, stream=STREAM_MATRIX):
    """count float64 values in [0, 1)."""
    key = stream_key(seed, stream)
    out = np.empty(count, dtype=np.float64)
    for i0 in range(0, count, _BLOCK):
        i1 = min(i0 + _BLOCK, count)
        out[i0:i1] = _unit(splitmix64(key, i0, i1 - i0))
    return out


def standard_normal(seed, count, stream=STREAM_MATRIX):
    """count float32 Gaussian(0, 1) values by Box-Muller."""
    key = stream_key(seed, stream)
    out = np.empty(count, dtype=np.float32)
    for i0 in range(0, count, _BLOCK):
        i1 = min(i0 + _BLOCK, count)
        u = _unit(splitmix64(key, 2 * i0, 2 * (i1 - i0)))
        # 1 - u lies in (0, 1]
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        out[i0:i1] = radius * np.cos(2.0 * np.pi * u[1::2])
    return out


def random_words(seed, count, stream=STREAM_PLANES):
    """count uniformly random uint32 words."""
    key = stream_key(seed, stream)
    out = np.empty(count, dtype=np.uint32)
    for i0 in range(0, count, _BLOCK):
        i1 = min(i0 + _BLOCK, count)
        out[i0:i1] = (splitmix64(key, i0, i1 - i0) & np.uint64(0xFFFFFFFF)).astype(np.uint32)
    return out


def gaussian_matrix(m, n, seed=0):
    """Gaussian(0, 1) float32 matrix (m, n), filled row-major."""
    if m < 1 or n < 1:
        raise ValueError("matrix shape must be positive, got (%s, %s)" % (m, n))
    return standard_normal(seed, m * n, STREAM_MATRIX).reshape(m, n)


def gaussian_vector(n, seed=0):
    """Gaussian(0, 1) float32 activation vector of length n."""
    if n < 1:
        raise ValueError("vector length must be positive, got %s" % n)
    return standard_normal(seed, n, STREAM_VECTOR)


def random_bcq_tensor(m, n, q, group_size=0, seed=0, bias=False):
    """
    BcqTensor with uniformly random bit-planes, scales
    alpha_i = 0.02 * 2^-i * (0.5 + u) and, optionally, biases 0.01 * N(0, 1).
    Kernel latency does not depend on weight values, so this stands in for a
    quantized matrix of any size without quantizing a dense one first.

    Parameters
    ----------
    m, n: int
        Matrix shape.
    q: int
        Number of bit-planes.
    group_size: int
        Default: 0
    seed: int
        Default: 0
    bias: bool
        Default: False
    """
    if min(m, n, q) < 1:
        raise ValueError("m, n and q must be positive, got %s, %s, %s" % (m, n, q))
    G = num_groups(n, group_size)
    nwords = words_per_row(n)
    planes = random_words(seed, q * m * nwords, STREAM_PLANES).reshape(q, m, nwords)
    u = uniform_values(seed, m * G * q, STREAM_SCALES).reshape(m, G, q)
    scales = 0.02 * (0.5 + u) * 2.0 ** -np.arange(q)
    biases = None
    if bias:
        biases = 0.01 * standard_normal(seed, m * G, STREAM_BIASES).reshape(m, G)
    return BcqTensor(planes, scales, cols=n, group_size=group_size, biases=biases)


def time_kernel(run, reps, warmup=0):
    """
    Call run() warmup times untimed, then reps times timed.

    Returns
    -------
    int64 array of reps wall-clock latencies in nanoseconds, each >= 1.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1, got %s" % reps)
    if warmup < 0:
        raise ValueError("warmup must be >= 0, got %s" % warmup)
    for _ in range(warmup):
        run()
    samples = np.empty(reps, dtype=np.int64)
    for k in range(reps):
        t0 = time.perf_counter_ns()
        run()
        samples[k] = max(time.perf_counter_ns() - t0, 1)
    return samples


def latency_summary(samples):
    """Median, p10 and p90 of latency samples (nearest-rank)."""
    p10, median, p90 = np.percentile(np.asarray(samples), [10, 50, 90], method="nearest")
    return {
        "median_latency_ns": float(median),
        "p10_latency_ns": float(p10),
        "p90_latency_ns": float(p90),
    }


class SweepRecord:
    """
    One configuration of a benchmark or sweep: its quantization error,
    footprint and kernel latency.
    """

    COLUMNS = (
        "m",
        "n",
        "q",
        "g",
        "mu",
        "method",
        "kernel_name",
        "footprint_bits",
        "compression_ratio",
        "as_built_bytes",
        "as_built_ratio",
        "rel_fro_error",
        "mse",
        "max_abs_error",
        "median_latency_ns",
        "p10_latency_ns",
        "p90_latency_ns",
    )

    def __init__(self, **fields):
        missing = [c for c in self.COLUMNS if c not in fields]
        if missing:
            raise ValueError("missing SweepRecord fields: %s" % ", ".join(missing))
        unknown = [c for c in fields if c not in self.COLUMNS]
        if unknown:
            raise ValueError("unknown SweepRecord fields: %s" % ", ".join(unknown))

        p10 = fields["p10_latency_ns"]
        median = fields["median_latency_ns"]
        p90 = fields["p90_latency_ns"]
        if min(p10, median, p90) <= 0:
            raise ValueError("latencies must be positive")
        if not p10 <= median <= p90:
            raise ValueError(
                "latency percentiles out of order: p10=%s median=%s p90=%s" % (p10, median, p90)
            )
        for name in self.COLUMNS:
            setattr(self, name, fields[name])

    def as_dict(self):
        return {name: getattr(self, name) for name in self.COLUMNS}


def records_to_frame(records):
    """DataFrame of SweepRecords with the fixed column order, sorted by ratio."""
    df = pd.DataFrame([r.as_dict() for r in records], columns=list(SweepRecord.COLUMNS))
    return df.sort_values("compression_ratio", kind="stable").reset_index(drop=True)


def estimate_bench_bytes(m, n, q, group_size=0, kernel="lut", mu=8, threads=1, bias=False):
    """
    Rough peak working set of run_bench in bytes: the operands plus the
    per-tile temporaries of the chosen kernel on every thread.
    """
    workers = KernelConfig(threads=threads).num_threads()
    if kernel == "dense":
        tile = DEQUANT_TILE_ROWS * n * 8
        return 4 * m * n + 4 * n + workers * tile

    operands = qtensor_nbytes(m, n, q, group_size, bias) + 4 * n
    nchunks = -(-n // mu)
    if kernel == "lut":
        tile_rows = KernelConfig(mu=mu).rows_per_tile(m)
        tables = nchunks * 2**mu * 4
        # intp keys plus float32 partials per plane
        tile = q * tile_rows * nchunks * (8 + 4) + q * tile_rows * words_per_row(n) * 4 * 4
        return operands + tables + workers * tile
    if kernel == "naive":
        tile = q * DEQUANT_TILE_ROWS * nchunks * mu * 16
        return operands + workers * tile
    if kernel == "dequant":
        tile = DEQUANT_TILE_ROWS * n * 4 * (q + 4)
        return operands + workers * tile
    raise ValueError("kernel must be one of %s, got %s" % (", ".join(KERNELS), kernel))


def check_memory_budget(requested, budget):
    if requested > budget:
        raise ValueError(
            "requested %.3g GiB exceeds memory budget of %.3g GiB"
            % (requested / 2**30, budget / 2**30)
        )


def kernel_runner(kernel, operand, x, mu=8, threads=1):
    """
    Zero-argument callable running one GEMV with the named kernel. The lut
    runner builds the LUT bank on every call.

    Parameters
    ----------
    kernel: str
        'lut', 'dequant', 'dense' or 'naive'.
    operand: BcqTensor, or dense matrix for 'dense'
    x: array
    mu: int
        Default: 8
    threads: int
        Default: 1
    """
    if kernel == "lut":
        cfg = KernelConfig(mu=mu, threads=threads)
        return lambda: lut_gemv(operand, build_luts(x, mu), cfg)
    if kernel == "naive":
        return lambda: bcq_gemv_naive(operand, x, mu=mu, threads=threads)
    if kernel == "dequant":
        return lambda: dequant_gemv(operand, x, threads=threads)
    if kernel == "dense":
        return lambda: dense_gemv(operand, x, threads=threads)
    raise ValueError("kernel must be one of %s, got %s" % (", ".join(KERNELS), kernel))


def _check_kernel_name(kernel):
    if kernel not in KERNELS:
        raise ValueError("kernel must be one of %s, got %s" % (", ".join(KERNELS), kernel))


def _dense_record(m, n, mu, samples):
    dense_bytes = DENSE_HEADER.size + 4 * m * n
    return SweepRecord(
        m=m,
        n=n,
        q=DENSE_BITS,
        g=0,
        mu=mu,
        method="dense",
        kernel_name="dense",
        footprint_bits=DENSE_BITS * m * n,
        compression_ratio=1.0,
        as_built_bytes=dense_bytes,
        as_built_ratio=DENSE_BITS // 8 * m * n / dense_bytes,
        rel_fro_error=0.0,
        mse=0.0,
        max_abs_error=0.0,
        **latency_summary(samples),
    )


def run_bench(
    m,
    n,
    bits,
    group_size=0,
    mu=8,
    threads=1,
    kernel="lut",
    reps=10,
    warmup=2,
    seed=0,
    bias=False,
    memory_budget=DEFAULT_MEMORY_BUDGET,
):
    """
    Time one kernel on a random (m, n) operand.

    Quantized kernels run on random_bcq_tensor(m, n, bits, group_size, seed,
    bias); the error columns are NaN since there is no dense original. The
    dense kernel runs on gaussian_matrix(m, n, seed) and reports q = 16.

    Returns
    -------
    SweepRecord
    """
    _check_kernel_name(kernel)
    if min(m, n, bits) < 1:
        raise ValueError("m, n and bits must be positive, got %s, %s, %s" % (m, n, bits))
    if kernel in ("lut", "naive"):
        check_group_compatible(n, group_size, mu)
    check_memory_budget(
        estimate_bench_bytes(m, n, bits, group_size, kernel, mu, threads, bias), memory_budget
    )

    x = gaussian_vector(n, seed)
    if kernel == "dense":
        W = gaussian_matrix(m, n, seed)
        samples = time_kernel(kernel_runner("dense", W, x, mu, threads), reps, warmup)
        return _dense_record(m, n, mu, samples)

    t = random_bcq_tensor(m, n, bits, group_size, seed, bias)
    samples = time_kernel(kernel_runner(kernel, t, x, mu, threads), reps, warmup)
    report = memory_footprint(m, n, bits, group_size, t.has_bias)
    return SweepRecord(
        m=m,
        n=n,
        q=bits,
        g=group_size,
        mu=mu,
        method="random",
        kernel_name=kernel,
        footprint_bits=report.total_bits,
        compression_ratio=report.compression_ratio,
        as_built_bytes=report.as_built_bytes,
        as_built_ratio=report.as_built_ratio,
        rel_fro_error=np.nan,
        mse=np.nan,
        max_abs_error=np.nan,
        **latency_summary(samples),
    )


class Sweep:
    """
    Cartesian sweep over bit counts, group sizes and quantization methods on
    Gaussian matrices. For every configuration, the error metrics are
    averaged over the seeds and the kernel latency is pooled over the seeds.
    """

    def __init__(
        self,
        m,
        n,
        bits_list,
        group_list,
        methods=("greedy",),
        mu=8,
        iters=3,
        seeds=(0,),
        kernel="lut",
        reps=5,
        warmup=1,
        threads=1,
        bias=False,
        memory_budget=DEFAULT_MEMORY_BUDGET,
        verbose=False,
    ):
        """
        Initialize Sweep.

        Parameters
        ----------
        m, n: int
            Matrix shape.
        bits_list: iterable of int
            Bit counts q.
        group_list: iterable of int
            Group sizes g, 0 for row-wise.
        methods: str or iterable of str
            Quantization methods, see QuantMethod.
            Default: ('greedy',)
        mu: int
            LUT sub-vector length.
            Default: 8
        iters: int
            Alternating iterations.
            Default: 3
        seeds: iterable of int
            Generator seeds of the Gaussian matrices and vectors.
            Default: (0,)
        kernel: str
            Kernel to time.
            Default: 'lut'
        reps: int
            Timed repetitions per seed.
            Default: 5
        warmup: int
            Untimed repetitions per seed.
            Default: 1
        threads: int
            Default: 1
        bias: bool
            Asymmetric BCQ for the greedy and alternating methods.
            Default: False
        memory_budget: int
            Bytes.
            Default: 8 GiB
        verbose: bool
            Print progress to standard error.
            Default: False
        """
        self.bits_list = list(bits_list)
        self.group_list = list(group_list)
        if isinstance(methods, (str, QuantMethod)):
            methods = [methods]
        self.methods = [
            method if isinstance(method, QuantMethod) else QuantMethod(method, iters)
            for method in methods
        ]
        self.seeds = list(seeds)
        if not self.bits_list or not self.group_list or not self.methods or not self.seeds:
            raise ValueError("bits, group, method and seed lists must be non-empty")
        if min(m, n) < 1:
            raise ValueError("matrix shape must be positive, got (%s, %s)" % (m, n))
        if min(self.bits_list) < 1:
            raise ValueError("bits must be >= 1, got %s" % min(self.bits_list))
        _check_kernel_name(kernel)
        if kernel == "dense":
            raise ValueError("a sweep times quantized kernels, not dense")
        for g in self.group_list:
            if kernel in ("lut", "naive"):
                check_group_compatible(n, g, mu)
            else:
                num_groups(n, g)
        for s in self.seeds:
            _check_seed(s)

        self.m, self.n, self.mu = m, n, mu
        self.kernel, self.reps, self.warmup, self.threads = kernel, reps, warmup, threads
        self.bias = bias

        requested = 4 * m * n * (len(self.seeds) + 1) + max(
            estimate_bench_bytes(m, n, q, g, kernel, mu, threads, True)
            for q in self.bits_list
            for g in self.group_list
        )
        check_memory_budget(requested, memory_budget)

        self.verbose = verbose
        self.verboseprint = (
            (lambda *a, **k: print(*a, file=sys.stderr, **k)) if verbose else lambda *a, **k: None
        )
        self.verboseprint("Sweep initialized: %d configurations" % self.num_configs)

    @property
    def num_configs(self):
        return len(self.bits_list) * len(self.group_list) * len(self.methods)

    def _configs(self):
        for method in self.methods:
            for q in self.bits_list:
                for g in self.group_list:
                    yield method, q, g

    def _run_config(self, method, q, g, weights, vectors):
        errors = []
        samples = []
        has_bias = False
        for W, x in zip(weights, vectors):
            t = quantize_matrix(W, q, g, method=method, bias=self.bias)
            has_bias = t.has_bias
            errors.append(quantization_error(W, t))
            runner = kernel_runner(self.kernel, t, x, self.mu, self.threads)
            samples.append(time_kernel(runner, self.reps, self.warmup))

        report = memory_footprint(self.m, self.n, q, g, has_bias)
        return SweepRecord(
            m=self.m,
            n=self.n,
            q=q,
            g=g,
            mu=self.mu,
            method=method.name,
            kernel_name=self.kernel,
            footprint_bits=report.total_bits,
            compression_ratio=report.compression_ratio,
            as_built_bytes=report.as_built_bytes,
            as_built_ratio=report.as_built_ratio,
            rel_fro_error=float(np.mean([e["rel_fro"] for e in errors])),
            mse=float(np.mean([e["mse"] for e in errors])),
            max_abs_error=float(np.mean([e["max_abs"] for e in errors])),
            **latency_summary(np.concatenate(samples)),
        )

    def run(self):
        """
        Run every configuration.

        Returns
        -------
        DataFrame with SweepRecord.COLUMNS, sorted by compression_ratio.
        """
        weights = [gaussian_matrix(self.m, self.n, s) for s in self.seeds]
        vectors = [gaussian_vector(self.n, s) for s in self.seeds]

        records = []
        for method, q, g in tqdm(
            list(self._configs()), desc="Sweep", disable=not self.verbose, file=sys.stderr
        ):
            record = self._run_config(method, q, g, weights, vectors)
            self.verboseprint(
                "%s q=%d g=%d: rel_fro=%.4g median=%.0f ns"
                % (method.name, q, g, record.rel_fro_error, record.median_latency_ns)
            )
            records.append(record)
        return records_to_frame(records)


def run_sweep(m, n, bits_list, group_list, methods=("greedy",), **kwargs):
    """Build and run a Sweep. Keyword arguments are passed to Sweep."""
    return Sweep(m, n, bits_list, group_list, methods, **kwargs).run()
