"""
Generate parameters for the quantization trade-off sweep: bits 1 to 4, group
sizes 32, 128 and row-wise, greedy and alternating BCQ plus round-to-nearest,
on 2048 x 2048 Gaussian matrices averaged over 5 seeds.

Each array task writes its own column to parameters.csv.
"""
import os

from LutGEMM.bench.parameters import generate_sweep_parameters

task_id = os.environ['SLURM_ARRAY_TASK_ID']
ID = int(task_id)

bits_all = [1, 2, 3, 4]
groups_all = [32, 128, 0]
methods_all = ['rtn', 'greedy', 'alternating']

df_params = generate_sweep_parameters(
    2048,
    2048,
    bits_all,
    groups_all,
    methods_all,
    mu=8,
    iters=3,
    seeds=5,
)

df_params[[ID]].to_csv('parameters.csv', index=True)
