"""Stateful layer objects wrapping the functional ops.

Each layer caches what its backward pass needs; ``parameters()`` /
``gradients()`` expose (name, array) pairs in declaration order, which is
also the checkpoint serialization order.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .ops import check_finite

WEIGHT_INIT_SIGMA = 0.02


class Layer:
    name = "layer"

    def parameters(self):
        return []

    def gradients(self):
        return []

    def zero_grad(self):
        for _, g in self.gradients():
            g[...] = 0.0

    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad_y):
        raise NotImplementedError


class Conv2d(Layer):
    def __init__(self, in_ch, out_ch, kernel, stride=1, padding=0, rng=None,
                 bias=True):
        self.stride = stride
        self.padding = padding
        # bias=False for convs feeding a normalization layer, where a bias
        # would be cancelled exactly and its gradient structurally zero
        self.has_bias = bias
        rng = rng or np.random.default_rng(0)
        self.w = rng.normal(0.0, WEIGHT_INIT_SIGMA, (out_ch, in_ch, kernel, kernel))
        self.b = np.zeros(out_ch)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.name = f"conv{kernel}x{kernel}s{stride}_{in_ch}to{out_ch}"

    def parameters(self):
        out = [(self.name + ".w", self.w)]
        if self.has_bias:
            out.append((self.name + ".b", self.b))
        return out

    def gradients(self):
        out = [(self.name + ".w", self.gw)]
        if self.has_bias:
            out.append((self.name + ".b", self.gb))
        return out

    def forward(self, x):
        self.x = x
        y = ops.conv2d_forward(x, self.w, self.b, self.stride, self.padding)
        return check_finite(y, self.name)

    def backward(self, grad_y):
        gx, gw, gb = ops.conv2d_backward(self.x, self.w, grad_y,
                                         self.stride, self.padding)
        self.gw += gw
        self.gb += gb
        return gx


class ConvTranspose2d(Layer):
    def __init__(self, in_ch, out_ch, kernel, stride=1, padding=0, rng=None,
                 bias=True):
        self.stride = stride
        self.padding = padding
        self.has_bias = bias
        rng = rng or np.random.default_rng(0)
        self.w = rng.normal(0.0, WEIGHT_INIT_SIGMA, (in_ch, out_ch, kernel, kernel))
        self.b = np.zeros(out_ch)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.name = f"convT{kernel}x{kernel}s{stride}_{in_ch}to{out_ch}"

    def parameters(self):
        out = [(self.name + ".w", self.w)]
        if self.has_bias:
            out.append((self.name + ".b", self.b))
        return out

    def gradients(self):
        out = [(self.name + ".w", self.gw)]
        if self.has_bias:
            out.append((self.name + ".b", self.gb))
        return out

    def forward(self, x):
        self.x = x
        y = ops.conv_transpose2d_forward(x, self.w, self.b,
                                         self.stride, self.padding)
        return check_finite(y, self.name)

    def backward(self, grad_y):
        gx, gw, gb = ops.conv_transpose2d_backward(self.x, self.w, grad_y,
                                                   self.stride, self.padding)
        self.gw += gw
        self.gb += gb
        return gx


class InstanceNorm(Layer):
    def __init__(self, channels, eps=1e-5):
        self.eps = eps
        self.gamma = np.ones(channels)
        self.beta = np.zeros(channels)
        self.ggamma = np.zeros_like(self.gamma)
        self.gbeta = np.zeros_like(self.beta)
        self.name = f"inorm_{channels}"

    def parameters(self):
        return [(self.name + ".gamma", self.gamma),
                (self.name + ".beta", self.beta)]

    def gradients(self):
        return [(self.name + ".gamma", self.ggamma),
                (self.name + ".beta", self.gbeta)]

    def forward(self, x):
        y, self.cache = ops.instance_norm_forward(x, self.gamma, self.beta,
                                                  self.eps)
        return check_finite(y, self.name)

    def backward(self, grad_y):
        gx, ggamma, gbeta = ops.instance_norm_backward(grad_y, self.cache)
        self.ggamma += ggamma
        self.gbeta += gbeta
        return gx


class LeakyReLU(Layer):
    name = "leaky_relu"

    def __init__(self, alpha=0.2):
        self.alpha = alpha

    def forward(self, x):
        self.x = x
        return ops.leaky_relu_forward(x, self.alpha)

    def backward(self, grad_y):
        return ops.leaky_relu_backward(self.x, grad_y, self.alpha)


class ReLU(Layer):
    name = "relu"

    def forward(self, x):
        self.x = x
        return ops.relu_forward(x)

    def backward(self, grad_y):
        return ops.relu_backward(self.x, grad_y)


class Tanh(Layer):
    name = "tanh"

    def forward(self, x):
        self.y = ops.tanh_forward(x)
        return self.y

    def backward(self, grad_y):
        return ops.tanh_backward(self.y, grad_y)


class Sigmoid(Layer):
    name = "sigmoid"

    def forward(self, x):
        self.y = ops.sigmoid_forward(x)
        return check_finite(self.y, self.name)

    def backward(self, grad_y):
        return ops.sigmoid_backward(self.y, grad_y)


class Sequential(Layer):
    name = "sequential"

    def __init__(self, *layers):
        self.layers = list(layers)

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]

    def gradients(self):
        return [g for layer in self.layers for g in layer.gradients()]

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad_y):
        for layer in reversed(self.layers):
            grad_y = layer.backward(grad_y)
        return grad_y
