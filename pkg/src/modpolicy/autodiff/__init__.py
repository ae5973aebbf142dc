from .tensor import (
    AutodiffError,
    ShapeError,
    Tensor,
    add,
    as_tensor,
    avg_pool1d,
    backward,
    concat,
    conv1d,
    gelu,
    layer_norm,
    matmul,
    mean,
    mul,
    no_grad,
    reshape,
    scale,
    silu,
    softmax,
    sub,
    swap_last_axes,
    transpose,
    tslice,
    tsum,
    upsample_nearest,
)
from .module import MLP, Conv1d, Linear, LayerNorm, Module, ModuleList, Parameter
from .gradcheck import GradCheckReport, grad_check
from .optim import AdamW, cosine_lr

__all__ = [
    "AutodiffError", "ShapeError", "Tensor", "add", "as_tensor", "avg_pool1d",
    "backward", "concat", "conv1d", "gelu", "layer_norm", "matmul", "mean",
    "mul", "no_grad", "reshape", "scale", "silu", "softmax", "sub",
    "swap_last_axes", "transpose", "tslice", "tsum", "upsample_nearest",
    "MLP", "Conv1d", "Linear", "LayerNorm", "Module", "ModuleList", "Parameter",
    "GradCheckReport", "grad_check", "AdamW", "cosine_lr",
]
