from .perf_funcs import (
    FootprintReport,
    memory_footprint,
    cost_model,
    lut_memory_bytes,
    max_lut_columns,
    compression_search_space,
    pareto_front,
)
