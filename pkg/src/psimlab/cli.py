"""Command-line pipeline: simulate, reconstruct, train, infer, eval.

Exit codes are a stable contract: 0 success, 2 config error, 3 I/O error,
4 data-shape error, 5 mode mismatch, 6 checkpoint integrity failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io
from .gan import (build_pairs, chain_infer_frames, infer_phase, init_gan,
                  load_gan, rotations_12, save_gan, split_dataset, train)
from .gan.train import GanSpec
from .image import Image, PhaseMap
from .metrics import (SsimParams, align_global_offset, foreground_mask,
                      masked_mean_ssim, rms_error, ssim,
                      stitched_line_profile)
from .nn.checkpoint import CheckpointError
from .reconstruct import reconstruct_stack
from .simulate import (DEFAULT_SHIFTS, ForwardModelSpec, InterferogramStack,
                       PhaseObjectSpec, SourceSpec, synth_dataset)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_MODE = 5
EXIT_INTEGRITY = 6

log = logging.getLogger("psimlab")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _setup_logging():
    level = os.environ.get("PSIM_LOG", "info").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config {path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"malformed JSON in {path}: {exc}")


def _model_from_config(cfg):
    try:
        source = SourceSpec(**cfg.get("source", {}))
        fields = {k: v for k, v in cfg.items() if k != "source"}
        return ForwardModelSpec(source=source, **fields)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"bad forward model config: {exc}")


def _write_manifest(out_dir, command, config_hash, seeds, inputs, outputs,
                    started, timings):
    manifest = {
        "command": command,
        "config_hash": config_hash,
        "seeds": seeds,
        "inputs": inputs,
        "outputs": outputs,
        "tool_version": __version__,
        "wall_clock_s": round(time.monotonic() - started, 3),
        "timings_s": {k: round(v, 3) for k, v in timings.items()},
    }
    path = Path(out_dir) / "manifest.json"
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _hash_obj(obj):
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _sample_dirs(data_dir):
    root = Path(data_dir)
    if not root.is_dir():
        raise CliError(EXIT_IO, f"data directory {data_dir} does not exist")
    dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not dirs:
        raise CliError(EXIT_DATA, f"no sample directories under {data_dir}")
    return dirs


def _load_stack(sample_dir):
    frames = []
    for k in range(1, 6):
        path = sample_dir / f"frame_{k}.pfm"
        if not path.exists():
            raise CliError(EXIT_DATA,
                           f"stack {sample_dir} is missing frame_{k}.pfm")
        frames.append(Image(io.read_pfm(path)))
    meta = io.read_sidecar(sample_dir / "frame_1.pfm")
    shifts = meta.get("realized_shifts", list(DEFAULT_SHIFTS))
    return InterferogramStack(frames, shifts, ForwardModelSpec(),
                              seed=meta.get("seed")), meta


def _load_dataset(data_dir):
    dataset = []
    for d in _sample_dirs(data_dir):
        stack, _ = _load_stack(d)
        truth_path = d / "phase_gt.pfm"
        if not truth_path.exists():
            raise CliError(EXIT_DATA, f"{d} has no phase_gt.pfm")
        dataset.append((stack, io.load_phase(truth_path)))
    return dataset


def cmd_simulate(args):
    started = time.monotonic()
    cfg = _load_config(args.config)
    try:
        count = int(cfg["count"])
        width = int(cfg.get("width", 64))
        height = int(cfg.get("height", 64))
        family = cfg.get("object_family", "cell_blobs")
        seed = int(cfg.get("seed", args.seed or 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"bad simulate config field: {exc}")
    model = _model_from_config(cfg.get("model", {}))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()
    dataset = synth_dataset(count, width, height, family, model, seed)
    sim_time = time.monotonic() - t0

    outputs = []
    for idx, (stack, truth) in enumerate(dataset):
        d = out / f"sample_{idx:05d}"
        d.mkdir(exist_ok=True)
        for k, frame in enumerate(stack.frames, start=1):
            p = d / f"frame_{k}.pfm"
            io.save_image(p, frame, seed=stack.seed,
                          realized_shifts=list(stack.realized_shifts),
                          lambda0_nm=model.source.lambda0)
        io.save_phase(d / "phase_gt.pfm", truth,
                      lambda0_nm=model.source.lambda0, seed=stack.seed)
        outputs.append(str(d))
    _write_manifest(out, "simulate", _hash_obj(cfg), {"master": seed},
                    [str(args.config)], outputs, started,
                    {"simulate": sim_time})
    log.info("wrote %d samples to %s", count, out)
    return EXIT_OK


def cmd_reconstruct(args):
    started = time.monotonic()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for d in _sample_dirs(args.data):
        stack, meta = _load_stack(d)
        lambda0 = meta.get("lambda0_nm")
        wrapped, quality, unwrapped, height = reconstruct_stack(stack, lambda0)
        dest = out / d.name
        dest.mkdir(exist_ok=True)
        io.save_phase(dest / "phase_wrapped.pfm", wrapped)
        io.save_phase(dest / "phase_unwrapped.pfm", unwrapped)
        io.write_pfm(dest / "quality.pfm", quality.data)
        io.write_sidecar(dest / "quality.pfm", role="quality",
                         units="intensity")
        if height is not None:
            io.write_pfm(dest / "height.pfm", height.data)
            io.write_sidecar(dest / "height.pfm", role="height", units="nm",
                             lambda0_nm=lambda0)
        outputs.append(str(dest))
    _write_manifest(out, "reconstruct", "", {}, [str(args.data)], outputs,
                    started, {})
    return EXIT_OK


def cmd_train(args):
    started = time.monotonic()
    cfg = _load_config(args.config)
    try:
        spec = GanSpec(**cfg.get("spec", {}))
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"bad GAN spec: {exc}")
    if args.mode and args.mode != spec.mode:
        raise CliError(EXIT_MODE,
                       f"--mode {args.mode} != config mode {spec.mode}")
    steps = args.steps if args.steps is not None else int(cfg.get("steps", 1000))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    batch_size = int(cfg.get("batch_size", 1))

    dataset = _load_dataset(args.data)
    train_set, _ = split_dataset(dataset,
                                 train_fraction=cfg.get("train_fraction", 0.8),
                                 seed=int(cfg.get("split_seed", 0)),
                                 train_count=cfg.get("train_count"))
    pairs, norm_info = build_pairs(train_set, spec.mode)
    if cfg.get("augment", False):
        pairs = rotations_12(pairs)

    if args.checkpoint:
        try:
            state = load_gan(args.checkpoint)
        except CheckpointError as exc:
            raise CliError(EXIT_INTEGRITY, str(exc))
        if state.spec.mode != spec.mode:
            raise CliError(EXIT_MODE, "checkpoint mode differs from config")
    else:
        state = init_gan(spec, seed=seed, norm_info=norm_info)

    t0 = time.monotonic()
    train(state, pairs, steps, batch_size=batch_size)
    train_time = time.monotonic() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "checkpoint.ckpt"
    save_gan(ckpt, state)
    with open(out / "loss.csv", "w") as fh:
        fh.write("step,L_D,L_G_adv,L_G_l1\n")
        for i, (ld, lga, lgl1) in enumerate(state.history, start=1):
            fh.write(f"{i},{ld!r},{lga!r},{lgl1!r}\n")
    _write_manifest(out, "train", _hash_obj(cfg), {"train": seed},
                    [str(args.data)], [str(ckpt)], started,
                    {"train": train_time})
    return EXIT_OK


def cmd_infer(args):
    started = time.monotonic()
    try:
        state = load_gan(args.checkpoint)
    except CheckpointError as exc:
        raise CliError(EXIT_INTEGRITY, str(exc))
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read checkpoint: {exc}")
    if args.mode and args.mode != state.spec.mode:
        raise CliError(EXIT_MODE,
                       f"--mode {args.mode} != checkpoint mode {state.spec.mode}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for d in _sample_dirs(args.data):
        i1_path = d / "frame_1.pfm"
        if not i1_path.exists():
            raise CliError(EXIT_DATA, f"{d} has no frame_1.pfm")
        i1 = Image(io.read_pfm(i1_path))
        dest = out / d.name
        dest.mkdir(exist_ok=True)
        if state.spec.mode == "frames":
            frames, _ = chain_infer_frames(state, i1)
            io.save_image(dest / "frame_1.pfm", i1)
            for k, frame in enumerate(frames, start=2):
                io.save_image(dest / f"frame_{k}.pfm", frame, predicted=True)
        else:
            phase = infer_phase(state, i1)
            io.save_phase(dest / "phase_pred.pfm", phase, predicted=True)
        outputs.append(str(dest))
    _write_manifest(out, "infer", "", {}, [str(args.data)], outputs, started,
                    {})
    return EXIT_OK


def cmd_eval(args):
    started = time.monotonic()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pred_root = Path(args.pred) if args.pred else Path(args.data)
    per_sample = []
    for d in _sample_dirs(args.data):
        truth_path = d / "phase_gt.pfm"
        if not truth_path.exists():
            raise CliError(EXIT_DATA, f"{d} has no phase_gt.pfm")
        truth = io.load_phase(truth_path)
        pred_dir = pred_root / d.name
        entry = {"sample": d.name}

        pred_path = None
        for name in ("phase_pred.pfm", "phase_unwrapped.pfm"):
            if (pred_dir / name).exists():
                pred_path = pred_dir / name
                break
        if pred_path is None:
            raise CliError(EXIT_DATA, f"{pred_dir} has no predicted phase")
        pred = io.load_phase(pred_path)
        if pred.shape != truth.shape:
            raise CliError(EXIT_DATA, f"{pred_path}: shape mismatch vs truth")
        aligned = align_global_offset(pred, truth)
        span = truth.data.max() - truth.data.min()
        params = SsimParams(dynamic_range=span if span > 0 else 1.0)
        score, _ = ssim(aligned.data, truth.data, params)
        mask = foreground_mask(truth)
        entry["ssim_full"] = score
        entry["ssim_foreground"] = masked_mean_ssim(aligned.data, truth.data,
                                                    mask, params)
        entry["rms"] = rms_error(aligned.data, truth.data)

        # per-hop frame errors when predicted frames sit next to real ones
        hops = []
        for k in range(2, 6):
            pp = pred_dir / f"frame_{k}.pfm"
            tp = d / f"frame_{k}.pfm"
            if pp.exists() and tp.exists():
                hops.append(float(np.mean(np.abs(io.read_pfm(pp)
                                                 - io.read_pfm(tp)))))
        if hops:
            entry["hop_l1"] = hops

        if args.profile_row is not None:
            stack, _ = _load_stack(d)
            profile = stitched_line_profile(stack, args.profile_row)
            io.write_profile_csv(out / f"{d.name}_profile.csv", profile)
        per_sample.append(entry)

    report = {
        "metric": "phase-map comparison",
        "params": {"ssim_window": 11, "sigma": 1.5, "k1": 0.01, "k2": 0.03,
                   "dynamic_range": "truth peak-to-peak", "mask": args.mask},
        "mean_ssim_full": float(np.mean([e["ssim_full"] for e in per_sample])),
        "mean_ssim_foreground": float(np.mean(
            [e["ssim_foreground"] for e in per_sample])),
        "mean_rms": float(np.mean([e["rms"] for e in per_sample])),
        "per_image": per_sample,
    }
    (out / "metrics.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "eval", "", {}, [str(args.data)],
                    [str(out / "metrics.json")], started, {})
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="psimlab",
        description="Simulated phase-shifting interference microscopy lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=False, data=False, checkpoint=None):
        if config:
            p.add_argument("--config", required=True)
        if data:
            p.add_argument("--data", required=True)
        if checkpoint is not None:
            p.add_argument("--checkpoint", required=(checkpoint == "required"))
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("simulate", help="synthesize interferogram stacks")
    common(p, config=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="classical five-step reconstruction")
    common(p, data=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("train", help="train the conditional GAN")
    common(p, config=True, data=True, checkpoint="optional")
    p.add_argument("--mode", choices=("frames", "phase"))
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="single-shot inference")
    common(p, data=True, checkpoint="required")
    p.add_argument("--mode", choices=("frames", "phase"))
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="metric reports and profiles")
    common(p, data=True)
    p.add_argument("--pred", help="directory with predictions "
                   "(defaults to --data)")
    p.add_argument("--mask", choices=("none", "foreground"), default="none")
    p.add_argument("--profile-row", type=int, default=None)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        log.error("%s", exc)
        return exc.code
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
