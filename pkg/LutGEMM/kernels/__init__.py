from .lut_kernel import (
    KernelConfig,
    KernelCounters,
    LutBank,
    build_luts,
    lut_gemv,
    lut_gemv_into,
    op_counts,
    chunk_keys,
)
from .reference_kernels import dense_gemv, dequant_gemv, bcq_gemv_naive
