"""Differentiable operations built on the Tensor graph.

Convolution gathers kernel-tap patches into a matrix and runs one GEMM per
slab of images; the slab size adapts so the patch scratch stays within a
fixed byte budget regardless of network width.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * mask)

    return Tensor._op(np.maximum(x.data, 0.0), (x,), backward)


def sigmoid(x: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-x.data))

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * s * (1.0 - s))

    return Tensor._op(s, (x,), backward)


def tanh(x: Tensor) -> Tensor:
    t = np.tanh(x.data)

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * (1.0 - t * t))

    return Tensor._op(t, (x,), backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        if x.requires_grad:
            inner = (g * s).sum(axis=axis, keepdims=True)
            x._accumulate(s * (g - inner))

    return Tensor._op(s, (x,), backward)


def dense(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map: x (..., in) with weight (out, in) -> (..., out)."""
    y = x.matmul(weight.transpose())
    if bias is not None:
        y = y + bias
    return y


def _conv_geometry(x_shape, w_shape, stride, padding):
    n, c, h, w = x_shape
    out_ch, in_ch, kh, kw = w_shape
    if in_ch != c:
        raise ValueError(f"conv input has {c} channels, kernel expects {in_ch}")
    sh, sw = stride
    ph, pw = padding
    h_out = (h + 2 * ph - kh) // sh + 1
    w_out = (w + 2 * pw - kw) // sw + 1
    if h_out < 1 or w_out < 1:
        raise ValueError("conv output would be empty")
    return sh, sw, ph, pw, kh, kw, h_out, w_out


# Patch-matrix scratch per image slab is capped at this many bytes, so wide
# configurations trade a few extra GEMM calls instead of gigabytes of im2col.
_CONV_SCRATCH_BYTES = 128 * 1024 * 1024


def _conv_slab(n: int, l_out: int, k: int, itemsize: int) -> int:
    per_image = l_out * k * itemsize
    return max(1, min(n, _CONV_SCRATCH_BYTES // max(1, per_image)))


def _fill_patches(buf: np.ndarray, xp: np.ndarray, kh, kw, sh, sw, h_out, w_out):
    """Copy every kernel tap of the padded slab into (m, c, kh, kw, ho, wo).

    Source and destination share their axis order, so each tap is an
    axis-aligned strided copy with long contiguous runs along the width.
    """
    for di in range(kh):
        for dj in range(kw):
            buf[:, :, di, dj] = xp[:, :, di : di + h_out * sh : sh,
                                   dj : dj + w_out * sw : sw]


def conv2d(x: Tensor, weight: Tensor, stride: tuple[int, int] = (1, 1),
           padding: tuple[int, int] = (1, 1)) -> Tensor:
    """2D cross-correlation, NCHW layout, bias-free.

    Computed as patch-matrix GEMMs over slabs of a few images at a time,
    against the (out_ch, c*kh*kw) weight view, without materializing the
    whole batch's kernel-expanded buffer.
    """
    sh, sw, ph, pw, kh, kw, h_out, w_out = _conv_geometry(
        x.shape, weight.shape, stride, padding)
    n, c = x.shape[0], x.shape[1]
    out_ch = weight.shape[0]
    l_out = h_out * w_out
    k = kh * kw * c
    dt = x.data.dtype

    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    w2 = weight.data.reshape(out_ch, k)
    slab = _conv_slab(n, l_out, k, dt.itemsize)
    scratch = np.empty((slab, c, kh, kw, h_out, w_out), dtype=dt)
    out = np.empty((n, out_ch, h_out, w_out), dtype=dt)
    for s0 in range(0, n, slab):
        s1 = min(s0 + slab, n)
        m = s1 - s0
        buf = scratch[:m]
        _fill_patches(buf, xp[s0:s1], kh, kw, sh, sw, h_out, w_out)
        res = np.matmul(w2, buf.reshape(m, k, l_out))
        out[s0:s1] = res.reshape(m, out_ch, h_out, w_out)

    def backward(g):
        need_w = weight.requires_grad
        need_x = x.requires_grad
        if not (need_w or need_x):
            return
        gw2 = np.zeros((out_ch, k), dtype=dt) if need_w else None
        gxp = np.zeros_like(xp) if need_x else None
        scratch = np.empty((slab, c, kh, kw, h_out, w_out), dtype=dt)
        for s0 in range(0, n, slab):
            s1 = min(s0 + slab, n)
            m = s1 - s0
            gt = g[s0:s1].reshape(m, out_ch, l_out)
            if need_w:
                buf = scratch[:m]
                _fill_patches(buf, xp[s0:s1], kh, kw, sh, sw, h_out, w_out)
                pt = buf.reshape(m, k, l_out).transpose(0, 2, 1)
                gw2 += np.matmul(gt, pt).sum(axis=0)
            if need_x:
                gp = np.matmul(w2.T, gt).reshape(m, c, kh, kw, h_out, w_out)
                sub = gxp[s0:s1]
                for di in range(kh):
                    for dj in range(kw):
                        sub[:, :, di : di + h_out * sh : sh,
                            dj : dj + w_out * sw : sw] += gp[:, :, di, dj]
        if need_w:
            weight._accumulate(gw2.reshape(weight.shape))
        if need_x:
            h, w = x.shape[2], x.shape[3]
            x._accumulate(gxp[:, :, ph : ph + h, pw : pw + w])

    return Tensor._op(out, (x, weight), backward)


def batch_norm(x: Tensor, gamma: Tensor, beta: Tensor, running_mean: np.ndarray,
               running_var: np.ndarray, training: bool, momentum: float = 0.9,
               eps: float = 1e-5) -> Tensor:
    """Per-channel normalization for NCHW activations.

    In training mode the batch statistics normalize, and the running buffers
    are updated in place as running = momentum * running + (1-momentum) * batch
    (biased variance throughout). In eval mode the running buffers normalize.
    """
    if x.ndim != 4:
        raise ValueError("batch_norm expects NCHW input")
    axes = (0, 2, 3)
    c = x.shape[1]
    gview = (1, c, 1, 1)

    if training:
        mu = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mu
        running_var *= momentum
        running_var += (1.0 - momentum) * var
        inv = 1.0 / np.sqrt(var + eps)
        xhat = (x.data - mu.reshape(gview)) * inv.reshape(gview)
        out = gamma.data.reshape(gview) * xhat + beta.data.reshape(gview)
        m = x.data.size // c

        def backward(g):
            if gamma.requires_grad:
                gamma._accumulate((g * xhat).sum(axis=axes))
            if beta.requires_grad:
                beta._accumulate(g.sum(axis=axes))
            if x.requires_grad:
                dxhat = g * gamma.data.reshape(gview)
                sum_dxhat = dxhat.sum(axis=axes, keepdims=True)
                sum_dxhat_xhat = (dxhat * xhat).sum(axis=axes, keepdims=True)
                dx = (inv.reshape(gview) / m) * (
                    m * dxhat - sum_dxhat - xhat * sum_dxhat_xhat)
                x._accumulate(dx)

        return Tensor._op(out, (x, gamma, beta), backward)

    inv = 1.0 / np.sqrt(running_var + eps)
    xhat = (x.data - running_mean.reshape(gview)) * inv.reshape(gview)
    out = gamma.data.reshape(gview) * xhat + beta.data.reshape(gview)

    def backward(g):
        if gamma.requires_grad:
            gamma._accumulate((g * xhat).sum(axis=axes))
        if beta.requires_grad:
            beta._accumulate(g.sum(axis=axes))
        if x.requires_grad:
            x._accumulate(g * (gamma.data * inv).reshape(gview))

    return Tensor._op(out, (x, gamma, beta), backward)


def global_avg_pool(x: Tensor) -> Tensor:
    """NCHW -> (N, C) spatial mean."""
    if x.ndim != 4:
        raise ValueError("global_avg_pool expects NCHW input")
    return x.mean(axis=(2, 3))


def clamp(x: Tensor, lo: float, hi: float) -> Tensor:
    """Clip values to [lo, hi]; gradient flows only through unclipped entries."""
    if not lo < hi:
        raise ValueError(f"clamp needs lo < hi, got {lo} and {hi}")
    mask = (x.data > lo) & (x.data < hi)

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * mask)

    return Tensor._op(np.clip(x.data, lo, hi), (x,), backward)


def dropout(x: Tensor, p: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: active only in training; eval is the identity."""
    if not 0.0 <= p < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    if not training or p == 0.0:
        return x
    mask = (rng.random(x.shape) >= p).astype(x.data.dtype) / (1.0 - p)
    return x * Tensor(mask)
