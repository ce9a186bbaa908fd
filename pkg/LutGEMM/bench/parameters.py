"""
Sweep parameter files. A parameters.csv has one row per parameter name and
one column per task id, so that a batch array task can pick its column with

    pd.read_csv('parameters.csv', index_col=0)[task_id]

Date: 17 Oct 2026
"""

import os
from itertools import product

import pandas as pd

from ..quantizers.bcq_quantizers import QuantMethod

TASK_ID_VARIABLE = "SLURM_ARRAY_TASK_ID"

PARAMETER_NAMES = ("m", "n", "q", "g", "method", "mu", "iters", "seeds")
INT_PARAMETERS = ("m", "n", "q", "g", "mu", "iters", "seeds")


def generate_sweep_parameters(
    m, n, bits_list, group_list, methods=("greedy",), mu=8, iters=3, seeds=1
):
    """
    One task per (method, q, g) combination.

    Parameters
    ----------
    m, n: int
        Matrix shape.
    bits_list: iterable of int
    group_list: iterable of int
        0 for row-wise.
    methods: iterable of str
        Default: ('greedy',)
    mu: int
        Default: 8
    iters: int
        Default: 3
    seeds: int
        Number of seeds each task averages over (seeds 0 .. seeds-1).
        Default: 1

    Returns
    -------
    DataFrame indexed by parameter name with task ids 0..N-1 as columns.
    """
    if isinstance(methods, str):
        methods = [methods]
    methods = [QuantMethod(name, iters).name for name in methods]
    if seeds < 1:
        raise ValueError("seeds must be >= 1, got %s" % seeds)

    prod = list(product(methods, bits_list, group_list))
    if not prod:
        raise ValueError("bits, group and method lists must be non-empty")
    df_params = pd.DataFrame(prod, columns=["method", "q", "g"])
    df_params["m"] = m
    df_params["n"] = n
    df_params["mu"] = mu
    df_params["iters"] = iters
    df_params["seeds"] = seeds
    return df_params[list(PARAMETER_NAMES)].T


def write_sweep_parameters(df_params, path):
    """Write a parameter table to csv, parameter names as the index."""
    df_params.to_csv(path, index=True)


def read_task_parameters(path, task_id):
    """
    Parameters of one task, numbers as floats and everything else as str.

    Raises
    ------
    FileNotFoundError if path does not exist, KeyError if the task id is not
    a column of the file.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(
            "Supply a parameter file, '%s' with column title equal to the task id" % path
        )
    task_id = str(task_id)
    df = pd.read_csv(path, index_col=0)
    if task_id not in df.columns:
        raise KeyError("task id %s not found in %s" % (task_id, path))
    df_params = df[task_id].astype(object)

    for ind in df_params.index:
        try:
            df_params[ind] = float(df_params[ind])
        except ValueError:
            df_params[ind] = str(df_params[ind])
    return df_params


def task_ids(path):
    """All task ids (column titles) of a parameter file."""
    if not os.path.exists(path):
        raise FileNotFoundError("parameter file %s does not exist" % path)
    return list(pd.read_csv(path, index_col=0).columns)


def task_config(df_params):
    """Typed keyword arguments of a task: ints, and method as str."""
    missing = [name for name in PARAMETER_NAMES if name not in df_params.index]
    if missing:
        raise KeyError("parameter file lacks %s" % ", ".join(missing))
    config = {name: int(df_params[name]) for name in INT_PARAMETERS}
    config["method"] = str(df_params["method"])
    return config


def env_task_id():
    """Task id of a SLURM array job, or None outside one."""
    return os.environ.get(TASK_ID_VARIABLE)
