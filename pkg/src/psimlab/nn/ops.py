"""Dense numeric ops with hand-written backward passes.

All tensors are float64 numpy arrays laid out (batch, channels, height,
width).  Convolutions are cross-correlations with zero padding; weight
layouts follow (out, in, kh, kw) for conv and (in, out, kh, kw) for
transposed conv.
"""

from __future__ import annotations

import numpy as np


class NumericError(RuntimeError):
    """Raised when an op produces NaN/Inf (poisoning is never silent)."""


def check_finite(arr: np.ndarray, context: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values produced by {context}")
    return arr


def conv2d_forward(x, w, b, stride=1, padding=0):
    n, c, h, width = x.shape
    out_c, in_c, kh, kw = w.shape
    if in_c != c:
        raise ValueError(f"input has {c} channels, kernel expects {in_c}")
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (width + 2 * padding - kw) // stride + 1
    if ho < 1 or wo < 1:
        raise ValueError("kernel larger than padded input")
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    y = np.zeros((n, out_c, ho, wo))
    for u in range(kh):
        for v in range(kw):
            xs = xp[:, :, u:u + (ho - 1) * stride + 1:stride,
                    v:v + (wo - 1) * stride + 1:stride]
            y += np.einsum('nchw,oc->nohw', xs, w[:, :, u, v], optimize=True)
    return y + b[None, :, None, None]


def conv2d_backward(x, w, grad_y, stride=1, padding=0):
    n, c, h, width = x.shape
    out_c, _, kh, kw = w.shape
    ho, wo = grad_y.shape[2], grad_y.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    grad_xp = np.zeros_like(xp)
    grad_w = np.zeros_like(w)
    for u in range(kh):
        for v in range(kw):
            sl = (slice(None), slice(None),
                  slice(u, u + (ho - 1) * stride + 1, stride),
                  slice(v, v + (wo - 1) * stride + 1, stride))
            grad_w[:, :, u, v] = np.einsum('nohw,nchw->oc', grad_y, xp[sl],
                                           optimize=True)
            grad_xp[sl] += np.einsum('nohw,oc->nchw', grad_y, w[:, :, u, v],
                                     optimize=True)
    grad_x = grad_xp[:, :, padding:padding + h, padding:padding + width]
    grad_b = grad_y.sum(axis=(0, 2, 3))
    return grad_x, grad_w, grad_b


def conv_transpose2d_forward(x, w, b, stride=1, padding=0):
    n, c, h, width = x.shape
    in_c, out_c, kh, kw = w.shape
    if in_c != c:
        raise ValueError(f"input has {c} channels, kernel expects {in_c}")
    hf = (h - 1) * stride + kh
    wf = (width - 1) * stride + kw
    yf = np.zeros((n, out_c, hf, wf))
    for u in range(kh):
        for v in range(kw):
            yf[:, :, u:u + (h - 1) * stride + 1:stride,
               v:v + (width - 1) * stride + 1:stride] += \
                np.einsum('nchw,co->nohw', x, w[:, :, u, v], optimize=True)
    if padding:
        yf = yf[:, :, padding:hf - padding, padding:wf - padding]
    return yf + b[None, :, None, None]


def conv_transpose2d_backward(x, w, grad_y, stride=1, padding=0):
    n, c, h, width = x.shape
    in_c, out_c, kh, kw = w.shape
    hf = (h - 1) * stride + kh
    wf = (width - 1) * stride + kw
    grad_yf = np.zeros((n, out_c, hf, wf))
    grad_yf[:, :, padding:hf - padding, padding:wf - padding] = grad_y
    grad_x = np.zeros_like(x)
    grad_w = np.zeros_like(w)
    for u in range(kh):
        for v in range(kw):
            gys = grad_yf[:, :, u:u + (h - 1) * stride + 1:stride,
                          v:v + (width - 1) * stride + 1:stride]
            grad_x += np.einsum('nohw,co->nchw', gys, w[:, :, u, v],
                                optimize=True)
            grad_w[:, :, u, v] = np.einsum('nchw,nohw->co', x, gys,
                                           optimize=True)
    grad_b = grad_y.sum(axis=(0, 2, 3))
    return grad_x, grad_w, grad_b


def leaky_relu_forward(x, alpha=0.2):
    return np.where(x >= 0, x, alpha * x)


def leaky_relu_backward(x, grad_y, alpha=0.2):
    return np.where(x >= 0, grad_y, alpha * grad_y)


def relu_forward(x):
    return np.maximum(x, 0.0)


def relu_backward(x, grad_y):
    return np.where(x > 0, grad_y, 0.0)


def tanh_forward(x):
    return np.tanh(x)


def tanh_backward(y, grad_y):
    return grad_y * (1.0 - y * y)


def sigmoid_forward(x):
    # branch on sign for stability at large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(y, grad_y):
    return grad_y * y * (1.0 - y)


def instance_norm_forward(x, gamma, beta, eps=1e-5):
    """Per-(sample, channel) standardization followed by affine scale/shift."""
    n, c, h, w = x.shape
    if h * w < 2:
        raise ValueError("instance norm needs spatial size >= 2")
    mu = x.mean(axis=(2, 3), keepdims=True)
    var = x.var(axis=(2, 3), keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv_std
    y = gamma[None, :, None, None] * xhat + beta[None, :, None, None]
    cache = (xhat, inv_std, gamma)
    return y, cache


def instance_norm_backward(grad_y, cache):
    xhat, inv_std, gamma = cache
    n, c, h, w = grad_y.shape
    m = h * w
    grad_gamma = np.einsum('nchw,nchw->c', grad_y, xhat, optimize=True)
    grad_beta = grad_y.sum(axis=(0, 2, 3))
    g = grad_y * gamma[None, :, None, None]
    g_mean = g.mean(axis=(2, 3), keepdims=True)
    gx_mean = (g * xhat).mean(axis=(2, 3), keepdims=True)
    grad_x = inv_std * (g - g_mean - xhat * gx_mean)
    return grad_x, grad_gamma, grad_beta
