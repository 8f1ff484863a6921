from lungfuse.nn.gradcheck import GradCheckReport, check_gradients, numeric_gradient, relative_error
from lungfuse.nn.layers import (
    Conv3DLayer,
    DenseLayer,
    conv3d_backward,
    conv3d_forward,
    dense_backward,
    dense_forward,
    global_avg_pool,
    global_avg_pool_backward,
    he_uniform,
    relu,
    relu_backward,
    softmax,
    softmax_ce,
    window_intensity,
)
from lungfuse.nn.optim import EarlyStopping, sgd_step

__all__ = [
    "Conv3DLayer",
    "DenseLayer",
    "EarlyStopping",
    "GradCheckReport",
    "check_gradients",
    "conv3d_backward",
    "conv3d_forward",
    "dense_backward",
    "dense_forward",
    "global_avg_pool",
    "global_avg_pool_backward",
    "he_uniform",
    "numeric_gradient",
    "relative_error",
    "relu",
    "relu_backward",
    "sgd_step",
    "softmax",
    "softmax_ce",
    "window_intensity",
]
