"""
Tests of the LutGEMM sweep parameter files.

Date: 17 Oct 2026
"""

import pandas as pd
import pytest
from numpy.testing import assert_equal

from LutGEMM.bench import (
    generate_sweep_parameters,
    read_task_parameters,
    task_config,
    write_sweep_parameters,
)
from LutGEMM.bench.parameters import PARAMETER_NAMES, env_task_id, task_ids


def test_generate_sweep_parameters():
    """
    One column per (method, q, g) task, parameter names as the index.
    """
    df = generate_sweep_parameters(
        64, 128, [2, 3], [0, 32], methods=["bcq_greedy", "alternating"], iters=4
    )
    assert_equal(list(df.index), list(PARAMETER_NAMES))
    assert_equal(df.shape, (8, 8))
    assert_equal(df[0]["method"], "greedy")
    assert_equal(df[7]["method"], "alternating")
    assert_equal(int(df[3]["q"]), 3)
    assert_equal(int(df[3]["g"]), 32)
    assert_equal(int(df[5]["iters"]), 4)

    with pytest.raises(ValueError):
        generate_sweep_parameters(64, 128, [], [0])
    with pytest.raises(ValueError):
        generate_sweep_parameters(64, 128, [2], [0], methods=["kmeans"])
    with pytest.raises(ValueError):
        generate_sweep_parameters(64, 128, [2], [0], seeds=0)


def test_parameter_file_round_trip(tmpdir):
    """
    A task read back from csv gives the typed configuration it was made from.
    """
    path = tmpdir.join("parameters.csv").strpath
    df = generate_sweep_parameters(64, 128, [1, 2, 3], [16], methods="rtn", mu=4, seeds=2)
    write_sweep_parameters(df, path)
    assert_equal(task_ids(path), ["0", "1", "2"])

    df_params = read_task_parameters(path, 1)
    assert_equal(df_params["q"], 2.0)
    assert_equal(df_params["method"], "rtn")

    config = task_config(df_params)
    assert_equal(
        config,
        {"m": 64, "n": 128, "q": 2, "g": 16, "mu": 4, "iters": 3, "seeds": 2, "method": "rtn"},
    )


def test_parameter_file_errors(tmpdir):
    """
    Test a missing file, a missing task id and missing parameter rows.
    """
    with pytest.raises(FileNotFoundError):
        read_task_parameters(tmpdir.join("absent.csv").strpath, 0)

    path = tmpdir.join("parameters.csv").strpath
    write_sweep_parameters(generate_sweep_parameters(8, 8, [1], [0]), path)
    with pytest.raises(KeyError):
        read_task_parameters(path, 5)

    with pytest.raises(KeyError):
        task_config(pd.Series({"m": 8.0, "n": 8.0}))


def test_env_task_id(monkeypatch):
    monkeypatch.delenv("SLURM_ARRAY_TASK_ID", raising=False)
    assert env_task_id() is None
    monkeypatch.setenv("SLURM_ARRAY_TASK_ID", "4")
    assert_equal(env_task_id(), "4")
