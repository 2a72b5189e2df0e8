"""Command-line interface.

Every subcommand takes ``--seed`` and prints its resolved configuration as
a JSON line before doing any work, so runs are reproducible from the log
alone. Commands that produce an artifact write it to ``--out``; with a
fixed seed the written bytes are identical across runs.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io as mio
from .condition import ConditionRefiner, ConditionSet, HashEmbedder
from .denoiser import Denoiser, get_preset
from .diffusion import make_schedule, sample as run_sampler
from .errors import MotionKitError, ValidationError
from .layout import PART_NAMES, POSE_DIM, canonical_layout
from .masks import Task, TaskSpec, task_mask
from .resample import resample


def _print_config(command: str, args: argparse.Namespace, extra=None) -> None:
    resolved = {"command": command}
    resolved.update(
        {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    )
    if extra:
        resolved.update(extra)
    print(json.dumps(resolved, sort_keys=True))


def _write_or_print(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_conditions(args, width: int) -> ConditionSet:
    conditions = ConditionSet()
    payloads = {
        "text": getattr(args, "text", None),
        "speech": getattr(args, "speech", None),
        "music": getattr(args, "music", None),
        "video": getattr(args, "video", None),
    }
    if not any(v for v in payloads.values()):
        return conditions
    embedder = HashEmbedder(width=width, seed=args.seed)
    refiner = ConditionRefiner(width=width, seed=args.seed)
    for modality, payload in payloads.items():
        if payload:
            tokens = refiner.refine(embedder.embed(payload, modality))
            setattr(conditions, modality, tokens)
    return conditions


def _require_out(args) -> None:
    if not args.out:
        raise ValidationError("this command writes a file; pass --out")


def cmd_convert(args) -> int:
    _print_config("convert", args)
    _require_out(args)
    sequences = [
        mio.keypoints_to_unified(positions, fps, dataset=dataset)
        for positions, fps, dataset in mio.load_keypoints(args.infile)
    ]
    mio.save(sequences, args.out)
    print(f"wrote {len(sequences)} sequence(s) to {args.out}")
    return 0


def cmd_resample(args) -> int:
    _require_out(args)
    _print_config("resample", args)
    sequences = [resample(seq, args.factor) for seq in mio.load(args.infile)]
    mio.save(sequences, args.out)
    print(f"wrote {len(sequences)} sequence(s) to {args.out}")
    return 0


def cmd_mask(args) -> int:
    _print_config("mask", args)
    spec = TaskSpec(task=Task(args.task), k=args.k, k1=args.k1, k2=args.k2)
    mask = task_mask(spec, args.frames)
    record = {
        "task": args.task,
        "frames": args.frames,
        "convention": mask.convention.value,
        "grid": [[int(v) for v in row] for row in mask.grid],
    }
    _write_or_print(json.dumps(record, sort_keys=True) + "\n", args.out)
    return 0


def cmd_synth(args) -> int:
    _require_out(args)
    _print_config("synth", args)
    seq = mio.synth_motion(args.pattern, args.frames, args.fps, seed=args.seed)
    mio.save([seq], args.out)
    print(f"wrote 1 sequence to {args.out}")
    return 0


def cmd_plan(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        config = mio.BatchPlanConfig(
            weights=raw["weights"],
            all_replace_prob=raw.get("all_replace_prob", 0.10),
        )
    else:
        config = mio.BatchPlanConfig()
    _print_config("plan", args, extra={"all_replace_prob": config.all_replace_prob})
    pairs = mio.batch_plan(config, args.n, rng_seed=args.seed)
    text = "".join(f"{src}\t{eff}\n" for src, eff in pairs)
    _write_or_print(text, args.out)
    return 0


def cmd_forward(args) -> int:
    config = get_preset(args.preset)
    _print_config(
        "forward",
        args,
        extra={
            "latent_dim": config.latent_dim,
            "num_layers": config.num_layers,
            "num_experts": config.num_experts,
            "num_templates": config.num_templates,
        },
    )
    model = Denoiser(config, seed=args.seed)
    seq = mio.synth_motion(args.pattern, args.frames, args.fps, seed=args.seed)
    conditions = _build_conditions(args, config.condition_width)
    pred = model.forward(
        seq, args.t_step, conditions=conditions, dataset_id=args.dataset
    )
    stats = {
        "frames": pred.num_frames,
        "width": POSE_DIM,
        "mean": float(pred.data.mean()),
        "std": float(pred.data.std()),
        "min": float(pred.data.min()),
        "max": float(pred.data.max()),
    }
    print(json.dumps(stats, sort_keys=True))
    if args.out:
        mio.save([pred], args.out)
        print(f"wrote 1 sequence to {args.out}")
    return 0


def cmd_sample(args) -> int:
    _require_out(args)
    config = get_preset(args.preset)
    if args.steps > config.num_timesteps:
        raise ValidationError(
            f"steps must be <= {config.num_timesteps} for this preset"
        )
    _print_config(
        "sample",
        args,
        extra={
            "latent_dim": config.latent_dim,
            "num_layers": config.num_layers,
        },
    )
    model = Denoiser(config, seed=args.seed)
    schedule = make_schedule(args.steps)
    conditions = _build_conditions(args, config.condition_width)

    visibility = None
    known = None
    if args.mask:
        spec = TaskSpec(task=Task(args.mask), k=args.k, k1=args.k1, k2=args.k2)
        visibility = task_mask(spec, args.frames)
        known = mio.synth_motion("constant_velocity", args.frames, args.fps)

    def denoise_fn(seq_t, t_step, conds):
        return model.forward(
            seq_t, t_step, conditions=conds, dataset_id=args.dataset
        )

    result = run_sampler(
        denoise_fn,
        num_frames=args.frames,
        fps=args.fps,
        schedule=schedule,
        visibility=visibility,
        known=known,
        conditions=conditions,
        guidance_scale=args.guidance,
        rng_seed=args.seed,
        dataset=args.dataset,
    )
    mio.save([result], args.out)
    print(f"wrote 1 sequence to {args.out}")
    return 0


def cmd_inspect(args) -> int:
    _print_config("inspect", args)
    lines = []
    layout = canonical_layout()
    lines.append(f"unified pose width: {POSE_DIM}")
    lines.append("part layout (name: size @ ranges):")
    for name in PART_NAMES:
        spans = ", ".join(f"[{a}, {b})" for a, b in layout.ranges[name])
        lines.append(f"  {name}: {layout.size(name)} @ {spans}")
    if args.infile:
        for i, seq in enumerate(mio.load(args.infile)):
            present = [
                name for name, ok in zip(PART_NAMES, seq.parts_present) if ok
            ]
            lines.append(
                f"sequence {i}: frames={seq.num_frames} fps={seq.fps} "
                f"dataset={seq.dataset} duration={seq.num_frames / seq.fps:.3f}s"
            )
            lines.append(f"  parts present: {', '.join(present) if present else 'none'}")
    _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motionkit",
        description="Unified motion representation, masking, and diffusion toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0, help="rng seed")
        p.add_argument("--out", default=None, help="output path")

    p = sub.add_parser("convert", help="keypoints file -> unified motion file")
    p.add_argument("--in", dest="infile", required=True)
    add_common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("resample", help="integer-factor downsampling")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--factor", type=int, required=True)
    add_common(p)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("mask", help="task visibility mask")
    p.add_argument("--task", required=True, choices=[t.value for t in Task])
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k1", type=int, default=None)
    p.add_argument("--k2", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("synth", help="synthetic motion generator")
    p.add_argument("--pattern", default="sine_walk", choices=mio.SYNTH_PATTERNS)
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--fps", type=float, default=30.0)
    add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("plan", help="batch formation plan")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--config", default=None, help="JSON with weights/all_replace_prob")
    add_common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("forward", help="one denoiser forward pass")
    p.add_argument("--preset", default="desk", choices=["tiny", "small", "base", "large", "desk"])
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--fps", type=float, default=20.0)
    p.add_argument("--pattern", default="sine_walk", choices=mio.SYNTH_PATTERNS)
    p.add_argument("--t-step", type=int, default=500)
    p.add_argument("--dataset", default="synth")
    p.add_argument("--text", default=None)
    p.add_argument("--speech", default=None)
    p.add_argument("--music", default=None)
    p.add_argument("--video", default=None)
    add_common(p)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("sample", help="reverse diffusion demo")
    p.add_argument("--preset", default="desk", choices=["tiny", "small", "base", "large", "desk"])
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--guidance", type=float, default=1.0)
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--fps", type=float, default=20.0)
    p.add_argument("--dataset", default="synth")
    p.add_argument("--mask", default=None, choices=[t.value for t in Task])
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k1", type=int, default=None)
    p.add_argument("--k2", type=int, default=None)
    p.add_argument("--text", default=None)
    p.add_argument("--speech", default=None)
    p.add_argument("--music", default=None)
    p.add_argument("--video", default=None)
    add_common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("inspect", help="print layout and file contents")
    p.add_argument("--in", dest="infile", default=None)
    add_common(p)
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MotionKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
