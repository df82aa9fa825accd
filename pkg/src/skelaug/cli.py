"""Command-line surface: ingest, synth, learn, augment, analyze, inspect, bench.

Exit codes: 0 on success, 1 on runtime errors, 2 on flag/usage errors. Every
output file is written to a temporary sibling and renamed on success, so a
failing run never leaves partial output behind.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from ._version import __version__
from .diversity import ae_train, diversity_curve
from .errors import SkelAugError
from .ingest import (Corpus, SyntheticSpec, generate_synthetic,
                     parse_ntu_skeleton, read_corpus, select_primary_body,
                     write_corpus)
from .model import MotionSequence, PreprocessSpec, preprocess, resize_temporal
from .pipeline import (AugmentConfig, augment_batch, learn_priors,
                       load_priors, recover_and_resample, sample_rng,
                       save_priors)


def _atomic(path: str, write_fn) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _label_from_name(name: str) -> int | None:
    # NTU-style names carry the action class as A### (e.g. S001C001P001R001A042)
    import re
    m = re.search(r"A(\d+)", name)
    return int(m.group(1)) if m else None


def _build_config(args) -> AugmentConfig:
    base = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            base = json.load(fh)
    overrides = {
        "T": args.t, "J": args.j, "alpha": args.alpha, "lambda_T": args.lambda_t,
        "n_bkg": args.n_bkg, "n_tr": args.n_tr, "m_aug": getattr(args, "m_aug", None),
        "r_lo": args.r_lo, "r_hi": args.r_hi, "resize_mode": args.resize_mode,
        "seed": args.seed,
    }
    for key, val in overrides.items():
        if val is not None:
            base[key] = val
    return AugmentConfig.from_dict(base)


def cmd_ingest(args) -> int:
    paths: list[Path] = []
    for item in args.input:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.skeleton")))
        else:
            paths.append(p)
    if not paths:
        print("error: no input files found", file=sys.stderr)
        return 1
    sequences = []
    spec = PreprocessSpec(align_axes=not args.no_align)
    for p in paths:
        with open(p, "rb") as fh:
            recording = parse_ntu_skeleton(fh)
        seq = select_primary_body(recording)
        seq = MotionSequence(seq.frames, id=p.stem, label=_label_from_name(p.stem))
        if args.resize:
            seq = resize_temporal(seq, args.resize, mode="linear")
        if args.preprocess:
            seq = preprocess(seq, spec)
        sequences.append(seq)
    corpus = Corpus(sequences)
    _atomic(args.out, lambda tmp: write_corpus(corpus, tmp, format=args.format))
    print(f"ingested {len(sequences)} sequences (J={corpus.J}) -> {args.out}")
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_sequences=args.n, T_full=args.t, J=args.j, n_classes=args.classes,
        amplitude=args.amplitude, n_phases=args.phases, noise_std=args.noise,
        rest_seed=args.rest_seed, seed=args.seed or 0, profile=args.profile,
        id_prefix=args.prefix)
    corpus = generate_synthetic(spec)
    _atomic(args.out, lambda tmp: write_corpus(corpus, tmp, format=args.format))
    print(f"generated {len(corpus)} synthetic sequences -> {args.out}")
    return 0


def cmd_learn(args) -> int:
    corpus = read_corpus(args.corpus)
    cfg = _build_config(args)
    priors = learn_priors(corpus, cfg)
    _atomic(args.out, lambda tmp: save_priors(priors, tmp))
    flat_first = np.stack([s.frames[0].reshape(-1) for s in corpus.sequences]) \
        .astype(np.float64)
    pose_flat = priors.poses.poses.reshape(len(priors.poses), -1).astype(np.float64)
    d = ((flat_first[:, None, :] - pose_flat[None, :, :]) ** 2).sum(axis=2)
    inertia = float(d.min(axis=1).sum())
    print(f"learned {len(priors.poses)} boundary poses and "
          f"{len(priors.transforms)} transforms (pose inertia {inertia:.4f}) "
          f"-> {args.out}")
    return 0


def cmd_augment(args) -> int:
    corpus = read_corpus(args.corpus)
    priors = load_priors(args.priors)
    m_aug = priors.config.m_aug if args.m_aug is None else args.m_aug
    seed = priors.config.seed if args.seed is None else args.seed
    pairs = augment_batch(corpus.sequences, priors, m_aug, seed,
                          workers=args.threads)
    out_sequences = []
    for original, augmented in pairs:
        out_sequences.append(original)
        if augmented is not None:
            out_sequences.append(augmented)
    out = Corpus(out_sequences, coordinate_space=corpus.coordinate_space)
    _atomic(args.out, lambda tmp: write_corpus(out, tmp, format=args.format))
    n_aug = sum(1 for _, a in pairs if a is not None)
    print(f"augmented {n_aug}/{len(corpus)} sequences -> {args.out}")
    return 0


def cmd_analyze(args) -> int:
    corpus = read_corpus(args.corpus)
    model = None
    if args.autoencoder:
        model = ae_train(corpus, epochs=args.epochs, lr=args.lr,
                         momentum=args.momentum, batch_size=args.batch_size,
                         seed=args.seed or 0)
    curve = diversity_curve(corpus, model)

    def write(tmp):
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "diversity"])
            for t, v in enumerate(curve.values):
                w.writerow([t, f"{v:.9g}"])

    _atomic(args.out, write)
    print(f"wrote {len(curve)}-frame {curve.space} diversity curve -> {args.out}")
    return 0


def cmd_inspect(args) -> int:
    priors = load_priors(args.priors)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, w in enumerate(priors.transforms):
        grid = w.as_matrix().astype(int)
        path = out_dir / f"transform_{i:02d}.csv"
        _atomic(str(path), lambda tmp, g=grid: np.savetxt(tmp, g, fmt="%d", delimiter=","))
    for i, pose in enumerate(priors.poses.poses):
        path = out_dir / f"pose_{i:02d}.csv"
        _atomic(str(path), lambda tmp, p=pose: np.savetxt(tmp, p, fmt="%.8g", delimiter=","))
    print(f"wrote {len(priors.transforms)} transform grids and "
          f"{len(priors.poses)} pose tables -> {out_dir}")
    return 0


def cmd_bench(args) -> int:
    corpus = read_corpus(args.corpus)
    priors = load_priors(args.priors)
    seqs = corpus.sequences
    iters = args.iters

    start = time.perf_counter()
    for i in range(iters):
        seq = seqs[i % len(seqs)]
        recover_and_resample(seq, priors, sample_rng(0, f"{seq.id}/{i}"))
    single = iters / (time.perf_counter() - start)

    batch = [seqs[i % len(seqs)].with_frames(seqs[i % len(seqs)].frames,
                                             id=f"bench-{i}")
             for i in range(iters)]
    start = time.perf_counter()
    ref = augment_batch(batch, priors, 1.0, 0, workers=1)
    seq_rate = iters / (time.perf_counter() - start)
    start = time.perf_counter()
    par = augment_batch(batch, priors, 1.0, 0, workers=args.threads)
    par_rate = iters / (time.perf_counter() - start)
    identical = all(
        (a is None and b is None) or np.array_equal(a.frames, b.frames)
        for (_, a), (_, b) in zip(ref, par))
    print(f"recover_and_resample: {single:.0f} seq/s single call loop")
    print(f"augment_batch x1 worker:  {seq_rate:.0f} seq/s")
    print(f"augment_batch x{args.threads} workers: {par_rate:.0f} seq/s "
          f"(outputs identical: {identical})")
    return 0 if identical else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skelaug",
        description="Recover-and-resample augmentation for skeleton motion corpora")
    parser.add_argument("--version", action="version", version=f"skelaug {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    seed_p = argparse.ArgumentParser(add_help=False)
    seed_p.add_argument("--seed", type=int, default=None, help="master RNG seed")
    threads_p = argparse.ArgumentParser(add_help=False)
    threads_p.add_argument("--threads", type=int, default=1,
                           help="augmentation worker count")
    fmt_p = argparse.ArgumentParser(add_help=False)
    fmt_p.add_argument("--format", choices=["packed", "jsonl"], default="packed",
                       help="output corpus format")
    cfg_p = argparse.ArgumentParser(add_help=False)
    cfg_p.add_argument("--config", help="JSON config file mirroring AugmentConfig")
    cfg_p.add_argument("--t", type=int, default=None, help="canonical sequence length")
    cfg_p.add_argument("--j", type=int, default=None, help="joint count")
    cfg_p.add_argument("--alpha", type=float, default=None, help="Beta shape for t_p")
    cfg_p.add_argument("--lambda-t", type=float, default=None,
                       help="context smoothing coefficient")
    cfg_p.add_argument("--n-bkg", type=int, default=None, help="boundary pose count")
    cfg_p.add_argument("--n-tr", type=int, default=None, help="linear transform count")
    cfg_p.add_argument("--r-lo", type=float, default=None, help="resample ratio lower bound")
    cfg_p.add_argument("--r-hi", type=float, default=None, help="resample ratio upper bound")
    cfg_p.add_argument("--resize-mode", choices=["linear", "random_frame"], default=None)

    p = sub.add_parser("ingest", parents=[fmt_p],
                       help="parse .skeleton files into a corpus")
    p.add_argument("--input", nargs="+", required=True,
                   help="skeleton files or directories")
    p.add_argument("--out", required=True)
    p.add_argument("--resize", type=int, default=0,
                   help="resize sequences to this length (0 keeps raw lengths)")
    p.add_argument("--preprocess", action="store_true",
                   help="remove trajectory and camera rotation")
    p.add_argument("--no-align", action="store_true",
                   help="skip axis alignment during preprocessing")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("synth", parents=[seed_p, fmt_p],
                       help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--t", type=int, default=64)
    p.add_argument("--j", type=int, default=25)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--phases", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--rest-seed", type=int, default=0)
    p.add_argument("--profile", choices=["peak", "ramp"], default="peak")
    p.add_argument("--prefix", default="syn")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("learn", parents=[seed_p, cfg_p],
                       help="learn boundary poses and linear transforms")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--m-aug", type=float, default=None)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("augment", parents=[seed_p, threads_p, fmt_p],
                       help="apply recover-and-resample to a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--priors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--m-aug", type=float, default=None,
                   help="fraction of sequences to augment (default from priors)")
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("analyze", parents=[seed_p],
                       help="emit the per-frame diversity curve as CSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--autoencoder", action="store_true",
                   help="embed frames with a trained autoencoder")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch-size", type=int, default=256)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("inspect", help="dump priors as CSV grids for plotting")
    p.add_argument("--priors", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_inspect)

    p = sub.add_parser("bench", parents=[threads_p],
                       help="measure augmentation throughput")
    p.add_argument("--corpus", required=True)
    p.add_argument("--priors", required=True)
    p.add_argument("--iters", type=int, default=1000)
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SkelAugError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
