"""Adam optimizer with bias correction, operating on (name, array) pairs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params, grads, state: AdamState) -> AdamState:
    """One Adam update in place.

    ``params`` and ``grads`` are matching lists of (name, array) pairs.
    Moments always update, even at lr = 0, so the step counter stays honest.
    """
    if len(params) != len(grads):
        raise ValueError("params and grads must pair up")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for (name, p), (gname, g) in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch for {name}: {p.shape} vs {g.shape}")
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        if state.lr != 0.0:
            p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return state
