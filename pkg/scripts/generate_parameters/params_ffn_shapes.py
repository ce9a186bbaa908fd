"""
Generate parameters for a sweep on the (4m x m) shapes of transformer
feed-forward layers, bits 2 to 4 with group size 128, one seed. Quantizing
the larger shapes takes a while; use long job times.

Each array task writes its own column to parameters.csv.
"""
import os

import pandas as pd

from LutGEMM.bench.parameters import generate_sweep_parameters

task_id = os.environ['SLURM_ARRAY_TASK_ID']
ID = int(task_id)

hidden_all = [1024, 2048, 4096]

df_params = pd.concat(
    [
        generate_sweep_parameters(4 * h, h, [2, 3, 4], [128], ['greedy'], seeds=1)
        for h in hidden_all
    ],
    axis=1,
    ignore_index=True,
)

df_params[[ID]].to_csv('parameters.csv', index=True)
