from .tensor_io import (
    QTensorFormatError,
    qtensor_nbytes,
    qtensor_to_bytes,
    qtensor_from_bytes,
    write_qtensor,
    read_qtensor,
    write_dense,
    read_dense,
)
