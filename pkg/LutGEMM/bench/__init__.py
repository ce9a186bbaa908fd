from .benchmark_funcs import (
    SweepRecord,
    Sweep,
    gaussian_matrix,
    gaussian_vector,
    random_bcq_tensor,
    time_kernel,
    latency_summary,
    run_bench,
    run_sweep,
)
from .parameters import (
    generate_sweep_parameters,
    write_sweep_parameters,
    read_task_parameters,
    task_config,
)
