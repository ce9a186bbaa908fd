from .bcq.bcq_tensor import BcqTensor, dequantize
from .quantizers import (
    UniformQuant,
    QuantMethod,
    quantize_rtn,
    uniform_to_bcq,
    quantize_bcq_greedy,
    quantize_bcq_alternating,
    quantize_matrix,
)
from .kernels import (
    KernelConfig,
    KernelCounters,
    build_luts,
    lut_gemv,
    dense_gemv,
    dequant_gemv,
    bcq_gemv_naive,
)
from .perf_functions import memory_footprint, cost_model
from .file_formats import read_qtensor, write_qtensor
