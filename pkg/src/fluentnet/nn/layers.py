"""Network building blocks: SE-ResNet pieces, LSTM machinery, attention.

Every layer takes its random generator at construction so initialization is
reproducible, exposes ``parameters()`` as (name, tensor) pairs for the
optimizer and checkpoints, and ``state()`` for non-trained buffers.
"""

from __future__ import annotations

import numpy as np

from .ops import batch_norm, conv2d, dense, global_avg_pool, relu, sigmoid, softmax, tanh
from .tensor import Tensor, concatenate


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int,
               dtype=np.float64) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, shape).astype(dtype)


def plain_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan: int,
                  dtype=np.float64) -> np.ndarray:
    limit = 1.0 / np.sqrt(fan)
    return rng.uniform(-limit, limit, shape).astype(dtype)


class Conv2d:
    def __init__(self, rng, in_ch: int, out_ch: int, kernel: int = 3,
                 stride: tuple[int, int] = (1, 1), padding: int = 1,
                 dtype=np.float64):
        fan_in = in_ch * kernel * kernel
        self.weight = Tensor(he_uniform(rng, (out_ch, in_ch, kernel, kernel),
                                        fan_in, dtype), requires_grad=True)
        self.stride = stride
        self.padding = (padding, padding)

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.stride, self.padding)

    def parameters(self):
        return [("weight", self.weight)]

    def state(self):
        return []


class BatchNorm2d:
    def __init__(self, channels: int, momentum: float = 0.9, eps: float = 1e-5,
                 dtype=np.float64):
        self.gamma = Tensor(np.ones(channels, dtype=dtype), requires_grad=True)
        self.beta = Tensor(np.zeros(channels, dtype=dtype), requires_grad=True)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.momentum = momentum
        self.eps = eps

    def __call__(self, x: Tensor, training: bool) -> Tensor:
        return batch_norm(x, self.gamma, self.beta, self.running_mean,
                          self.running_var, training, self.momentum, self.eps)

    def parameters(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def state(self):
        return [("running_mean", self.running_mean), ("running_var", self.running_var)]


class Dense:
    def __init__(self, rng, in_dim: int, out_dim: int, bias: bool = True,
                 dtype=np.float64):
        self.weight = Tensor(he_uniform(rng, (out_dim, in_dim), in_dim, dtype),
                             requires_grad=True)
        self.bias = Tensor(np.zeros(out_dim, dtype=dtype), requires_grad=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return dense(x, self.weight, self.bias)

    def parameters(self):
        out = [("weight", self.weight)]
        if self.bias is not None:
            out.append(("bias", self.bias))
        return out

    def state(self):
        return []


class SEUnit:
    """Squeeze-and-excitation: channel-wise rescaling from global context."""

    def __init__(self, rng, channels: int, reduction: int = 16, dtype=np.float64):
        reduced = max(1, -(-channels // reduction))
        self.fc1 = Dense(rng, channels, reduced, dtype=dtype)
        self.fc2 = Dense(rng, reduced, channels, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        n, c = x.shape[0], x.shape[1]
        z = global_avg_pool(x)
        s = sigmoid(self.fc2(relu(self.fc1(z))))
        return x * s.reshape(n, c, 1, 1)

    def parameters(self):
        return ([("fc1." + n, t) for n, t in self.fc1.parameters()]
                + [("fc2." + n, t) for n, t in self.fc2.parameters()])

    def state(self):
        return []


class SEResNetBlock:
    """Three 3x3 conv/bn stages, SE rescaling, projected residual, final relu.

    The block's stride applies to the first conv and the 1x1 shortcut
    projection so main path and residual stay aligned.
    """

    def __init__(self, rng, in_ch: int, out_ch: int,
                 stride: tuple[int, int] = (1, 1), reduction: int = 16,
                 dtype=np.float64):
        self.conv1 = Conv2d(rng, in_ch, out_ch, 3, stride, 1, dtype)
        self.bn1 = BatchNorm2d(out_ch, dtype=dtype)
        self.conv2 = Conv2d(rng, out_ch, out_ch, 3, (1, 1), 1, dtype)
        self.bn2 = BatchNorm2d(out_ch, dtype=dtype)
        self.conv3 = Conv2d(rng, out_ch, out_ch, 3, (1, 1), 1, dtype)
        self.bn3 = BatchNorm2d(out_ch, dtype=dtype)
        self.se = SEUnit(rng, out_ch, reduction, dtype)
        self.proj = Conv2d(rng, in_ch, out_ch, 1, stride, 0, dtype)
        self.proj_bn = BatchNorm2d(out_ch, dtype=dtype)

    def __call__(self, x: Tensor, training: bool) -> Tensor:
        h = relu(self.bn1(self.conv1(x), training))
        h = relu(self.bn2(self.conv2(h), training))
        h = self.bn3(self.conv3(h), training)
        h = self.se(h)
        shortcut = self.proj_bn(self.proj(x), training)
        return relu(h + shortcut)

    def _children(self):
        return [("conv1", self.conv1), ("bn1", self.bn1), ("conv2", self.conv2),
                ("bn2", self.bn2), ("conv3", self.conv3), ("bn3", self.bn3),
                ("se", self.se), ("proj", self.proj), ("proj_bn", self.proj_bn)]

    def parameters(self):
        return [(f"{cn}.{n}", t) for cn, child in self._children()
                for n, t in child.parameters()]

    def state(self):
        return [(f"{cn}.{n}", a) for cn, child in self._children()
                for n, a in child.state()]


class LstmParams:
    """Gate weights acting on [h_prev, x_t]; forget gate bias starts at one."""

    def __init__(self, rng, input_dim: int, hidden: int, dtype=np.float64):
        self.input_dim = input_dim
        self.hidden = hidden
        fan = hidden + input_dim
        self.w_f = Tensor(plain_uniform(rng, (hidden, fan), fan, dtype), requires_grad=True)
        self.w_i = Tensor(plain_uniform(rng, (hidden, fan), fan, dtype), requires_grad=True)
        self.w_c = Tensor(plain_uniform(rng, (hidden, fan), fan, dtype), requires_grad=True)
        self.w_o = Tensor(plain_uniform(rng, (hidden, fan), fan, dtype), requires_grad=True)
        self.b_f = Tensor(np.ones(hidden, dtype=dtype), requires_grad=True)
        self.b_i = Tensor(np.zeros(hidden, dtype=dtype), requires_grad=True)
        self.b_c = Tensor(np.zeros(hidden, dtype=dtype), requires_grad=True)
        self.b_o = Tensor(np.zeros(hidden, dtype=dtype), requires_grad=True)

    def parameters(self):
        return [("w_f", self.w_f), ("w_i", self.w_i), ("w_c", self.w_c),
                ("w_o", self.w_o), ("b_f", self.b_f), ("b_i", self.b_i),
                ("b_c", self.b_c), ("b_o", self.b_o)]

    def state(self):
        return []


def lstm_cell(x_t: Tensor, h_prev: Tensor, c_prev: Tensor,
              p: LstmParams) -> tuple[Tensor, Tensor]:
    """One step: gates read the concatenation [h_prev, x_t].

    f = sig(W_f.[h,x] + b_f), i = sig(W_i.[h,x] + b_i),
    c = f*c_prev + i*tanh(W_c.[h,x] + b_c),
    o = sig(W_o.[h,x] + b_o), h = o*tanh(c).
    """
    z = concatenate([h_prev, x_t], axis=1)
    f = sigmoid(dense(z, p.w_f, p.b_f))
    i = sigmoid(dense(z, p.w_i, p.b_i))
    c_bar = tanh(dense(z, p.w_c, p.b_c))
    c = f * c_prev + i * c_bar
    o = sigmoid(dense(z, p.w_o, p.b_o))
    h = o * tanh(c)
    return h, c


def _run_direction(x: Tensor, p: LstmParams, reverse: bool) -> Tensor:
    n, t_len, _ = x.shape
    h = Tensor(np.zeros((n, p.hidden), dtype=x.dtype))
    c = Tensor(np.zeros((n, p.hidden), dtype=x.dtype))
    steps = range(t_len - 1, -1, -1) if reverse else range(t_len)
    outputs: list[Tensor | None] = [None] * t_len
    for t in steps:
        h, c = lstm_cell(x[:, t, :], h, c, p)
        outputs[t] = h.reshape(n, 1, p.hidden)
    return concatenate(outputs, axis=1)


def blstm_layer(x: Tensor, forward: LstmParams, backward: LstmParams,
                merge: str = "product") -> Tensor:
    """Bidirectional pass over (N, T, I).

    Output at step t combines the forward state after reading x[..t] and the
    backward state after reading x[t..]; ``product`` merges them elementwise,
    ``concat`` stacks them to 2H features.
    """
    fwd = _run_direction(x, forward, reverse=False)
    bwd = _run_direction(x, backward, reverse=True)
    if merge == "product":
        return fwd * bwd
    if merge == "concat":
        return concatenate([fwd, bwd], axis=2)
    raise ValueError(f"unknown merge mode {merge!r}")


class Lstm:
    def __init__(self, rng, input_dim: int, hidden: int, reverse: bool = False,
                 dtype=np.float64):
        self.params = LstmParams(rng, input_dim, hidden, dtype)
        self.reverse = reverse

    def __call__(self, x: Tensor) -> Tensor:
        return _run_direction(x, self.params, self.reverse)

    def parameters(self):
        return self.params.parameters()

    def state(self):
        return []


class BlstmLayer:
    def __init__(self, rng, input_dim: int, hidden: int, merge: str = "product",
                 dtype=np.float64):
        if merge not in ("product", "concat"):
            raise ValueError(f"unknown merge mode {merge!r}")
        self.fwd = LstmParams(rng, input_dim, hidden, dtype)
        self.bwd = LstmParams(rng, input_dim, hidden, dtype)
        self.merge = merge
        self.out_dim = hidden if merge == "product" else 2 * hidden

    def __call__(self, x: Tensor) -> Tensor:
        return blstm_layer(x, self.fwd, self.bwd, self.merge)

    def parameters(self):
        return ([("fwd." + n, t) for n, t in self.fwd.parameters()]
                + [("bwd." + n, t) for n, t in self.bwd.parameters()])

    def state(self):
        return []


def global_attention(seq: Tensor, w_c: Tensor) -> tuple[Tensor, Tensor]:
    """Attention over the whole sequence, queried by the final step.

    scores_t = <h_T, h_t>, alpha = softmax(scores), context = sum_t alpha_t h_t,
    output = tanh(W_c.[context; h_T]). Returns (output, alpha).
    """
    n, t_len, hidden = seq.shape
    h_last = seq[:, -1, :]
    scores = (seq * h_last.reshape(n, 1, hidden)).sum(axis=2)
    alpha = softmax(scores, axis=1)
    context = (seq * alpha.reshape(n, t_len, 1)).sum(axis=1)
    out = tanh(dense(concatenate([context, h_last], axis=1), w_c))
    return out, alpha


class GlobalAttention:
    def __init__(self, rng, hidden: int, dtype=np.float64):
        self.w_c = Tensor(he_uniform(rng, (hidden, 2 * hidden), 2 * hidden, dtype),
                          requires_grad=True)

    def __call__(self, seq: Tensor) -> tuple[Tensor, Tensor]:
        return global_attention(seq, self.w_c)

    def parameters(self):
        return [("w_c", self.w_c)]

    def state(self):
        return []
