"""
Command line interface of LutGEMM.

    lutgemm quantize   quantize a dense or random matrix to a QTensorFile
    lutgemm verify     check lut_gemv against the reference kernels
    lutgemm bench      time one kernel, one CSV row per bit count
    lutgemm sweep      error, footprint and latency over (q, g, method)
    lutgemm params     write a parameters.csv for batch sweeps

Exit codes: 0 ok, 1 verification failure, 2 usage, configuration or format
error.

Date: 17 Oct 2026
"""

import argparse
import json
import sys

import numpy as np
import pandas as pd
from tqdm import tqdm

from .bench.benchmark_funcs import (
    DEFAULT_MEMORY_BUDGET,
    KERNELS,
    gaussian_matrix,
    gaussian_vector,
    records_to_frame,
    run_bench,
    run_sweep,
)
from .bench.parameters import (
    env_task_id,
    generate_sweep_parameters,
    read_task_parameters,
    task_config,
    task_ids,
    write_sweep_parameters,
)
from .file_formats.tensor_io import qtensor_nbytes, read_dense, read_qtensor, write_qtensor
from .kernels.lut_kernel import KernelConfig, build_luts, check_group_compatible, check_mu, lut_gemv
from .kernels.reference_kernels import bcq_gemv_naive, dequant_gemv
from .perf_functions.perf_funcs import memory_footprint
from .quantizers.bcq_quantizers import QuantMethod, quantization_error, quantize_matrix

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

DEQUANT_TOLERANCE = 1e-4


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer, got %s" % text)
    return value


def nonnegative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer, got %s" % text)
    return value


def group_size_arg(text):
    """Group size, 0 or 'row' for row-wise."""
    if text.lower() in ("row", "rowwise", "row-wise"):
        return 0
    return nonnegative_int(text)


def relative_deviation(y, ref):
    """max|y - ref| / max|ref|, with the denominator kept above float32 tiny."""
    y = np.asarray(y, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    scale = max(np.abs(ref).max(), np.finfo(np.float32).tiny)
    return np.abs(y - ref).max() / scale


def _print_json(report):
    print(json.dumps(report, indent=2))


def _write_csv(df, out):
    if out:
        df.to_csv(out, index=False)
    else:
        df.to_csv(sys.stdout, index=False)


def cmd_quantize(args):
    if args.input is not None:
        W = read_dense(args.input)
        source = args.input
    else:
        m, n, seed = args.random
        W = gaussian_matrix(m, n, seed)
        source = "random(%d, %d, seed=%d)" % (m, n, seed)

    method = QuantMethod(args.method, args.iters)
    t = quantize_matrix(W, args.bits, args.group_size, method=method, bias=args.bias)
    nbytes = write_qtensor(args.out, t)
    expected = qtensor_nbytes(t.rows, t.cols, t.bits, t.group_size, t.has_bias)
    if nbytes != expected:
        raise ValueError("size mismatch: wrote %d bytes, expected %d" % (nbytes, expected))

    report = {
        "source": source,
        "out": args.out,
        "m": t.rows,
        "n": t.cols,
        "q": t.bits,
        "g": t.group_size,
        "method": method.name,
        "bias": t.has_bias,
        "file_bytes": nbytes,
        "error": quantization_error(W, t),
        "footprint": memory_footprint(t.rows, t.cols, t.bits, t.group_size, t.has_bias).as_dict(),
    }
    _print_json(report)
    return EXIT_OK


def _first_difference(y, ref):
    return int(np.flatnonzero(y != ref)[0])


def cmd_verify(args):
    t = read_qtensor(args.qtensor)
    check_mu(args.mu)
    check_group_compatible(t.cols, t.group_size, args.mu)
    cfg = KernelConfig(mu=args.mu, threads=args.threads)

    max_naive = 0.0
    max_dequant = 0.0
    for trial in tqdm(range(args.trials), desc="Verify", disable=not args.verbose, file=sys.stderr):
        seed = args.seed + trial
        x = gaussian_vector(t.cols, seed)
        y = lut_gemv(t, build_luts(x, args.mu), cfg)
        y_naive = bcq_gemv_naive(t, x, mu=args.mu)
        y_dequant = dequant_gemv(t, x)

        max_naive = max(max_naive, relative_deviation(y, y_naive))
        max_dequant = max(max_dequant, relative_deviation(y, y_dequant))
        if not np.array_equal(y, y_naive):
            print(
                "verification failed: lut and naive kernels differ at trial %d (seed %d), index %d"
                % (trial, seed, _first_difference(y, y_naive)),
                file=sys.stderr,
            )
            return EXIT_VERIFY_FAILED
        if relative_deviation(y, y_dequant) > DEQUANT_TOLERANCE:
            index = int(np.abs(y.astype(np.float64) - y_dequant).argmax())
            print(
                "verification failed: lut and dequant kernels differ by more than %g "
                "at trial %d (seed %d), index %d" % (DEQUANT_TOLERANCE, trial, seed, index),
                file=sys.stderr,
            )
            return EXIT_VERIFY_FAILED

    _print_json(
        {
            "qtensor": args.qtensor,
            "trials": args.trials,
            "mu": args.mu,
            "max_naive_deviation": float(max_naive),
            "max_dequant_deviation": float(max_dequant),
            "status": "ok",
        }
    )
    return EXIT_OK


def cmd_bench(args):
    bits_list = [args.bits[0]] if args.kernel == "dense" else args.bits
    records = [
        run_bench(
            args.m,
            args.n,
            q,
            group_size=args.group_size,
            mu=args.mu,
            threads=args.threads,
            kernel=args.kernel,
            reps=args.reps,
            warmup=args.warmup,
            seed=args.seed,
            bias=args.bias,
            memory_budget=int(args.memory_budget * 2**30),
        )
        for q in bits_list
    ]
    _write_csv(records_to_frame(records), args.out)
    return EXIT_OK


def _sweep_kwargs(args):
    return dict(
        kernel=args.kernel,
        reps=args.reps,
        warmup=args.warmup,
        threads=args.threads,
        bias=args.bias,
        memory_budget=int(args.memory_budget * 2**30),
        verbose=args.verbose,
    )


def _task_sweep(params_path, task_id, args):
    config = task_config(read_task_parameters(params_path, task_id))
    return run_sweep(
        config["m"],
        config["n"],
        [config["q"]],
        [config["g"]],
        [config["method"]],
        mu=config["mu"],
        iters=config["iters"],
        seeds=range(config["seeds"]),
        **_sweep_kwargs(args),
    )


def cmd_sweep(args):
    if args.params is not None:
        task_id = args.task_id if args.task_id is not None else env_task_id()
        ids = [task_id] if task_id is not None else task_ids(args.params)
        frames = [_task_sweep(args.params, i, args) for i in ids]
        df = pd.concat(frames, ignore_index=True)
        df = df.sort_values("compression_ratio", kind="stable").reset_index(drop=True)
    else:
        if args.m is None or args.n is None:
            raise ValueError("sweep needs --m and --n, or --params")
        df = run_sweep(
            args.m,
            args.n,
            args.bits_list,
            args.group_list,
            args.method,
            mu=args.mu,
            iters=args.iters,
            seeds=range(args.seeds),
            **_sweep_kwargs(args),
        )
    _write_csv(df, args.out)
    return EXIT_OK


def cmd_params(args):
    df_params = generate_sweep_parameters(
        args.m,
        args.n,
        args.bits_list,
        args.group_list,
        args.method,
        mu=args.mu,
        iters=args.iters,
        seeds=args.seeds,
    )
    write_sweep_parameters(df_params, args.out)
    print("wrote %d tasks to %s" % (df_params.shape[1], args.out), file=sys.stderr)
    return EXIT_OK


def _add_timing_args(p):
    p.add_argument("--mu", type=positive_int, default=8, help="LUT sub-vector length")
    p.add_argument("--threads", type=nonnegative_int, default=1, help="0 uses all cores")
    p.add_argument("--kernel", choices=KERNELS, default="lut")
    p.add_argument("--warmup", type=nonnegative_int, default=1)
    p.add_argument("--bias", action="store_true", help="asymmetric BCQ (per-group bias)")
    p.add_argument(
        "--memory-budget",
        type=float,
        default=DEFAULT_MEMORY_BUDGET / 2**30,
        help="GiB",
    )
    p.add_argument("--out", default=None, help="csv file, standard output if omitted")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lutgemm", description="LUT-based GEMV on binary-coding quantized weights"
    )
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("quantize", help="quantize a matrix to a QTensorFile")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--in", dest="input", help="DENM dense matrix file")
    source.add_argument(
        "--random", nargs=3, type=nonnegative_int, metavar=("M", "N", "SEED")
    )
    p.add_argument("--bits", type=positive_int, default=3)
    p.add_argument("--group-size", type=group_size_arg, default=0)
    p.add_argument("--method", choices=QuantMethod.NAMES, default="greedy")
    p.add_argument("--iters", type=positive_int, default=3)
    p.add_argument("--bias", action="store_true", help="asymmetric BCQ (per-group bias)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("verify", help="check lut_gemv against the reference kernels")
    p.add_argument("--qtensor", required=True)
    p.add_argument("--trials", type=positive_int, default=10)
    p.add_argument("--mu", type=positive_int, default=8)
    p.add_argument("--seed", type=nonnegative_int, default=0)
    p.add_argument("--threads", type=nonnegative_int, default=1, help="0 uses all cores")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time one kernel")
    p.add_argument("--m", type=positive_int, required=True)
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--bits", type=positive_int, nargs="+", default=[3])
    p.add_argument("--group-size", type=group_size_arg, default=0)
    p.add_argument("--reps", type=positive_int, default=10)
    p.add_argument("--seed", type=nonnegative_int, default=0)
    _add_timing_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="sweep (q, g, method) configurations")
    p.add_argument("--m", type=positive_int, default=None)
    p.add_argument("--n", type=positive_int, default=None)
    p.add_argument("--bits-list", type=positive_int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--group-list", type=group_size_arg, nargs="+", default=[0])
    p.add_argument("--method", choices=QuantMethod.NAMES, nargs="+", default=["greedy"])
    p.add_argument("--iters", type=positive_int, default=3)
    p.add_argument("--seeds", type=positive_int, default=1, help="average over seeds 0..N-1")
    p.add_argument("--reps", type=positive_int, default=5)
    p.add_argument("--params", default=None, help="parameters.csv from lutgemm params")
    p.add_argument("--task-id", default=None, help="column of --params, default $SLURM_ARRAY_TASK_ID")
    p.add_argument("--verbose", action="store_true")
    _add_timing_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("params", help="write a parameters.csv for batch sweeps")
    p.add_argument("--m", type=positive_int, required=True)
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--bits-list", type=positive_int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--group-list", type=group_size_arg, nargs="+", default=[0])
    p.add_argument("--method", choices=QuantMethod.NAMES, nargs="+", default=["greedy"])
    p.add_argument("--mu", type=positive_int, default=8)
    p.add_argument("--iters", type=positive_int, default=3)
    p.add_argument("--seeds", type=positive_int, default=1)
    p.add_argument("--out", default="parameters.csv")
    p.set_defaults(func=cmd_params)

    return parser


def main(argv=None):
    """Run the command line. Returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE

    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as err:
        message = err.args[0] if isinstance(err, KeyError) and err.args else err
        print("lutgemm: error: %s" % message, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
