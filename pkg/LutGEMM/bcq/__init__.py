from .bcq_tensor import (
    BcqTensor,
    pack_planes,
    unpack_planes,
    dequantize,
    num_groups,
    resolve_group_size,
    words_per_row,
    as_dense_matrix,
    as_dense_vector,
)
