from .uniform_quantizers import UniformQuant, quantize_rtn, uniform_to_bcq
from .bcq_quantizers import (
    QuantMethod,
    quantize_bcq_greedy,
    quantize_bcq_alternating,
    quantize_matrix,
    quantization_error,
)
