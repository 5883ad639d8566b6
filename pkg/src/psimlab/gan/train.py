"""Conditional-GAN training loop, losses, and single-shot inference."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..image import Image, PhaseMap
from ..nn.adam import AdamState, adam_step
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.ops import NumericError, sigmoid_forward
from ..simulate import DEFAULT_SHIFTS, ForwardModelSpec, InterferogramStack
from .data import denormalize, normalize
from .models import PatchDiscriminator, UNetGenerator


@dataclass
class GanSpec:
    mode: str = "phase"  # "frames" or "phase"
    depth: int = 4
    base: int = 16
    skips: bool = True
    disc_blocks: int = 3
    disc_base: int = 16
    lambda_l1: float = 100.0
    image_side: int = 64
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999

    def __post_init__(self):
        if self.mode not in ("frames", "phase"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.image_side % (2 ** self.depth) != 0:
            raise ValueError("image side must be divisible by 2^depth")
        if self.lambda_l1 < 0:
            raise ValueError("lambda_l1 must be >= 0")

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class GanState:
    spec: GanSpec
    generator: UNetGenerator
    discriminator: PatchDiscriminator
    g_opt: AdamState
    d_opt: AdamState
    step: int = 0
    seed: int = 0
    norm_info: dict = field(default_factory=dict)
    history: list = field(default_factory=list)  # (L_D, L_G_adv, L_G_l1)


def init_gan(spec: GanSpec, seed: int = 0, norm_info=None) -> GanState:
    rng = np.random.default_rng(seed)
    gen = UNetGenerator(depth=spec.depth, base=spec.base, skips=spec.skips,
                        rng=rng)
    disc = PatchDiscriminator(blocks=spec.disc_blocks, base=spec.disc_base,
                              in_ch=2, rng=rng)
    return GanState(spec, gen, disc,
                    AdamState(lr=spec.lr, beta1=spec.beta1, beta2=spec.beta2),
                    AdamState(lr=spec.lr, beta1=spec.beta1, beta2=spec.beta2),
                    step=0, seed=seed, norm_info=norm_info or {})


def bce_with_logits(logits, target):
    """Numerically stable mean BCE on logits; returns (loss, grad)."""
    z = logits
    loss = np.maximum(z, 0.0) - z * target + np.log1p(np.exp(-np.abs(z)))
    n = z.size
    grad = (sigmoid_forward(z) - target) / n
    return float(loss.mean()), grad


def gan_losses(real_logits, fake_logits, g_out, target, lambda_l1):
    """(L_D, L_G) under the standard conditional-GAN objective with L1."""
    bce_real, _ = bce_with_logits(real_logits, 1.0)
    bce_fake, _ = bce_with_logits(fake_logits, 0.0)
    l_d = 0.5 * (bce_real + bce_fake)
    bce_gen, _ = bce_with_logits(fake_logits, 1.0)
    l1 = float(np.mean(np.abs(g_out - target)))
    return l_d, bce_gen + lambda_l1 * l1


def _as_batch(pairs):
    x = np.stack([p.input for p in pairs])[:, None, :, :]
    y = np.stack([p.target for p in pairs])[:, None, :, :]
    return x, y


def train_step(state: GanState, batch) -> GanState:
    """One discriminator update then one generator update, in place."""
    if not batch:
        raise ValueError("empty batch")
    x, target = _as_batch(batch)
    gen, disc = state.generator, state.discriminator
    lam = state.spec.lambda_l1

    # discriminator step, generator frozen
    fake = gen.forward(x)
    disc.zero_grad()
    real_logits = disc.forward(x, target)
    bce_real, grad_real = bce_with_logits(real_logits, 1.0)
    disc.backward(0.5 * grad_real)
    fake_logits = disc.forward(x, fake)
    bce_fake, grad_fake = bce_with_logits(fake_logits, 0.0)
    disc.backward(0.5 * grad_fake)
    l_d = 0.5 * (bce_real + bce_fake)
    if not np.isfinite(l_d):
        raise NumericError(f"discriminator loss is not finite at step {state.step}")
    adam_step(disc.parameters(), disc.gradients(), state.d_opt)

    # generator step, discriminator frozen
    gen.zero_grad()
    fake = gen.forward(x)
    disc.zero_grad()
    fake_logits = disc.forward(x, fake)
    l_g_adv, grad_logits = bce_with_logits(fake_logits, 1.0)
    _, grad_fake_img = disc.backward(grad_logits)
    l1 = float(np.mean(np.abs(fake - target)))
    grad_l1 = lam * np.sign(fake - target) / fake.size
    if not np.isfinite(l_g_adv) or not np.isfinite(l1):
        raise NumericError(f"generator loss is not finite at step {state.step}")
    gen.backward(grad_fake_img + grad_l1)
    disc.zero_grad()  # frozen: discard grads from the generator pass
    adam_step(gen.parameters(), gen.gradients(), state.g_opt)

    state.step += 1
    state.history.append((l_d, l_g_adv, lam * l1))
    return state


def train(state: GanState, pairs, steps, batch_size=1, seed=None):
    """Run ``steps`` updates cycling pairs in a seeded shuffled order.

    Sample order is a pure function of (seed, global step), so a run resumed
    from a checkpoint continues exactly where an uninterrupted run would be.
    """
    if seed is None:
        seed = state.seed
    n = len(pairs)
    orders = {}
    for _ in range(steps):
        pos = state.step * batch_size
        batch = []
        for i in range(pos, pos + batch_size):
            epoch, off = divmod(i, n)
            if epoch not in orders:
                orders = {epoch: np.random.default_rng(
                    (seed, epoch)).permutation(n)}
            batch.append(pairs[orders[epoch][off]])
        train_step(state, batch)
    return state


def generator_apply(state: GanState, normalized: np.ndarray) -> np.ndarray:
    """Run the generator on one normalized 2D grid."""
    out = state.generator.forward(normalized[None, None, :, :])
    return out[0, 0]


def chain_infer_frames(state: GanState, i1: Image, intensity_range=None,
                       generator_fn=None):
    """Approach 1 inference: predict frames 2..5 by chaining the generator.

    ``generator_fn`` (normalized grid -> normalized grid) can replace the
    trained network, e.g. with an analytic advance oracle, to validate the
    chaining plumbing.  Returns (list of four Images, assembled stack).
    """
    if state.spec.mode != "frames":
        raise ValueError("chain inference requires a frames-mode model")
    if intensity_range is None:
        intensity_range = state.norm_info.get("intensity_range")
    if intensity_range is None:
        intensity_range = (float(i1.data.min()), float(i1.data.max()))
    lo, hi = intensity_range
    fn = generator_fn or (lambda g: generator_apply(state, g))

    current = normalize(i1.data, lo, hi)
    frames = [i1]
    for _ in range(4):
        current = fn(current)
        frames.append(Image(denormalize(current, lo, hi)))
    stack = InterferogramStack(frames, DEFAULT_SHIFTS,
                               ForwardModelSpec(), seed=None)
    return frames[1:], stack


def infer_phase(state: GanState, i1: Image, intensity_range=None) -> PhaseMap:
    """Approach 2 inference: single interferogram straight to unwrapped phase."""
    if state.spec.mode != "phase":
        raise ValueError("direct phase inference requires a phase-mode model")
    phase_range = state.norm_info.get("phase_range")
    if phase_range is None:
        raise ValueError("state carries no recorded phase range")
    if intensity_range is None:
        intensity_range = state.norm_info.get("intensity_range")
    if intensity_range is None:
        intensity_range = (float(i1.data.min()), float(i1.data.max()))
    lo, hi = intensity_range
    out = generator_apply(state, normalize(i1.data, lo, hi))
    return PhaseMap(denormalize(out, *phase_range), wrapped=False)


def _opt_entries(prefix, opt: AdamState, params):
    entries = []
    for name, p in params:
        entries.append((f"{prefix}.m.{name}", opt.m.get(name, np.zeros_like(p))))
    for name, p in params:
        entries.append((f"{prefix}.v.{name}", opt.v.get(name, np.zeros_like(p))))
    return entries


def save_gan(path, state: GanState):
    params = state.generator.parameters() + state.discriminator.parameters()
    entries = list(params)
    entries += _opt_entries("opt.g", state.g_opt, state.generator.parameters())
    entries += _opt_entries("opt.d", state.d_opt,
                            state.discriminator.parameters())
    meta = {
        "spec": state.spec.to_dict(),
        "step": state.step,
        "seed": state.seed,
        "norm_info": state.norm_info,
        "g_opt_t": state.g_opt.t,
        "d_opt_t": state.d_opt.t,
    }
    save_checkpoint(path, entries, meta)


def load_gan(path) -> GanState:
    entries, meta = load_checkpoint(path)
    spec = GanSpec(**meta["spec"])
    state = init_gan(spec, seed=meta["seed"], norm_info=meta["norm_info"])
    state.step = meta["step"]
    state.g_opt.t = meta["g_opt_t"]
    state.d_opt.t = meta["d_opt_t"]
    by_name = dict(entries)
    model_params = state.generator.parameters() + \
        state.discriminator.parameters()
    for name, dst in model_params:
        dst[...] = by_name[name]
    for prefix, opt, params in (("opt.g", state.g_opt,
                                 state.generator.parameters()),
                                ("opt.d", state.d_opt,
                                 state.discriminator.parameters())):
        for name, _ in params:
            opt.m[name] = by_name[f"{prefix}.m.{name}"].copy()
            opt.v[name] = by_name[f"{prefix}.v.{name}"].copy()
    return state
