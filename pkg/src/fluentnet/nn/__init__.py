"""Minimal reverse-mode autodiff kernel on numpy arrays.

Deterministic by construction: no threading, no global RNG, and every
stochastic operation (initialization, dropout) takes an explicit generator.
"""

from .tensor import Tensor, concatenate, no_grad
from .ops import (
    batch_norm,
    clamp,
    conv2d,
    dense,
    dropout,
    global_avg_pool,
    relu,
    sigmoid,
    softmax,
    tanh,
)
from .layers import (
    BatchNorm2d,
    BlstmLayer,
    Conv2d,
    Dense,
    GlobalAttention,
    Lstm,
    LstmParams,
    SEResNetBlock,
    SEUnit,
    blstm_layer,
    global_attention,
    lstm_cell,
)
from .gradcheck import GradCheckReport, finite_diff_check

__all__ = [
    "Tensor", "concatenate", "no_grad",
    "batch_norm", "clamp", "conv2d", "dense", "dropout", "global_avg_pool",
    "relu", "sigmoid", "softmax", "tanh",
    "BatchNorm2d", "BlstmLayer", "Conv2d", "Dense", "GlobalAttention", "Lstm",
    "LstmParams", "SEResNetBlock", "SEUnit", "blstm_layer", "global_attention",
    "lstm_cell", "GradCheckReport", "finite_diff_check",
]
