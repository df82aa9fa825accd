"""Acceptance suite: one test per release criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.
"""

import os
import time

import numpy as np
import pytest

from skelaug import (AugmentConfig, Corpus, MotionSequence, ParseError,
                     SyntheticSpec, augment_batch, diversity_curve,
                     extrapolate, generate_synthetic, kmeans_assign,
                     kmeans_fit, learn_priors, learn_transforms,
                     parse_ntu_skeleton, sample_tp,
                     similarity_matrix, transform_from_similarity,
                     write_corpus, write_ntu_skeleton)
from skelaug.diversity import AutoEncoder
from skelaug.model import resize_frames

from test_boundary import beta_symmetric_cdf
from test_diversity import max_rel_error, numeric_grads


def _report(name: str, started: float) -> None:
    print(f"[PASS] {name} ({time.perf_counter() - started:.2f}s)")


def scalar_seq(values):
    frames = np.zeros((len(values), 1, 3), dtype=np.float32)
    frames[:, 0, 0] = values
    return MotionSequence(frames)


def ramp_corpus(n, T=64, J=25, amplitude=10.0, seed=0):
    return generate_synthetic(SyntheticSpec(
        n_sequences=n, T_full=T, J=J, n_classes=min(n, 4), amplitude=amplitude,
        noise_std=0.0, profile="ramp", seed=seed, rest_seed=seed))


def test_similarity_hand_oracle():
    """Two-frame similarity and index map match the hand computation."""
    started = time.perf_counter()
    s = similarity_matrix(scalar_seq([0.0, 1.0]), scalar_seq([0.0, 1.0]), lambda_T=1.0)
    np.testing.assert_allclose(
        s, [[0.7311, 0.2689], [0.2689, 0.7311]], atol=1e-4)
    w = transform_from_similarity(s)
    np.testing.assert_array_equal(w.indices, [0, 1])
    _report("similarity/index hand oracle (T=2)", started)


def test_identity_recovery():
    """Full-window pairs on 200 ramps learn a transform within 1 of identity."""
    started = time.perf_counter()
    corpus = ramp_corpus(200)
    (w,) = learn_transforms(corpus, windows=((0.0, 1.0),), lambda_T=0.1,
                            n_tr=1, seed=0)
    dev = np.abs(w.indices - np.arange(64)).max()
    assert dev <= 1, f"identity deviation {dev} > 1"
    _report(f"identity recovery (max deviation {dev})", started)


def test_known_warp_recovery():
    """The half-window crop map T/2 + i/2 is recovered within +-2."""
    started = time.perf_counter()
    corpus = ramp_corpus(100, seed=1)
    transforms = learn_transforms(corpus, windows=((0.0, 1.0), (0.5, 1.0)),
                                  lambda_T=0.1, n_tr=2, seed=0)

    # brute-force nearest-frame matcher on one representative pair
    seq = corpus.sequences[0]
    T = seq.T
    start = round(0.5 * T)
    partial = resize_frames(seq.frames[start:], T)
    pf = partial.reshape(T, -1).astype(np.float64)
    ff = seq.frames.reshape(T, -1).astype(np.float64)
    dist = np.linalg.norm(pf[:, None] - ff[None], axis=2)
    matcher = dist.argmin(axis=1)

    i = np.arange(T)
    analytic = np.clip(T / 2 + i / 2, 0, T - 1)
    assert np.abs(matcher - analytic).max() <= 2  # matcher agrees with analytics

    best = min(np.abs(w.indices - analytic).max() for w in transforms)
    assert best <= 2, f"half-window map deviation {best} > 2"
    ident = min(np.abs(w.indices - i).max() for w in transforms)
    assert ident <= 2  # the other transform is the identity map
    _report(f"known-warp recovery (deviation {best})", started)


def test_beta_sampling():
    """t_p draws match the analytic mean and the CDF-oracle tail mass."""
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    draws = np.array([sample_tp(0.1, 64, rng) for _ in range(100_000)])
    mean = draws.mean()
    assert abs(mean - 16.0) <= 0.5, f"mean {mean} outside 16 +- 0.5"
    frac = ((draws <= 4) | (draws >= 28)).mean()
    expected = 2.0 * beta_symmetric_cdf(0.1, 4.5 / 32.0)
    assert expected >= 0.6
    assert frac >= 0.6, f"bimodal mass {frac} < 0.6"
    assert abs(frac - expected) < 0.01
    _report(f"beta sampling (mean {mean:.3f}, tail mass {frac:.3f} "
            f"vs oracle {expected:.3f})", started)


def test_extrapolation_contract():
    """1000 random extrapolations: exact boundary pose and exact squeezed tail."""
    started = time.perf_counter()
    rng = np.random.default_rng(7)
    T, J = 64, 25
    for _ in range(1000):
        frames = rng.normal(size=(T, J, 3)).astype(np.float32)
        pose = rng.normal(size=(J, 3)).astype(np.float32)
        t_p = int(rng.integers(1, T // 2 + 1))
        out = extrapolate(MotionSequence(frames), pose, t_p)
        assert out.frames[0].tobytes() == pose.tobytes()
        squeezed = resize_frames(frames, T - t_p)
        assert out.frames[t_p:].tobytes() == squeezed.tobytes()
    _report("extrapolation contract (1000 draws, bitwise)", started)


def test_diversity_pattern():
    """Rest-pose starts show less than half the mid-action diversity."""
    started = time.perf_counter()
    corpus = generate_synthetic(SyntheticSpec(
        n_sequences=200, n_classes=4, noise_std=0.03, seed=5, rest_seed=5))
    curve = diversity_curve(corpus)
    assert curve[0] < 0.5 * curve[32], \
        f"curve[0]={curve[0]:.4f} not < half of curve[32]={curve[32]:.4f}"
    _report(f"diversity pattern (curve[0]={curve[0]:.4f}, "
            f"curve[T/2]={curve[32]:.4f})", started)


def test_autoencoder_gradients():
    """Backprop matches central differences on 20 random mini-nets."""
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    checked = 0
    while checked < 20:
        d_in = int(rng.integers(2, 6))
        hidden = tuple(int(rng.integers(2, 6)) for _ in range(int(rng.integers(1, 4))))
        model = AutoEncoder(d_in, seed=int(rng.integers(10_000)), hidden_dims=hidden)
        x = rng.normal(size=(3, d_in))
        _, pre = model._forward_cached(x)
        if min(float(np.abs(z).min()) for z in pre[:-1]) < 1e-3:
            continue  # finite differences are invalid next to a rectifier kink
        _, gW, gb = model.loss_and_grads(x)
        nW, nb = numeric_grads(model, x)
        worst = max(worst, max_rel_error(gW, nW), max_rel_error(gb, nb))
        checked += 1
    assert worst < 1e-4, f"max relative gradient error {worst:.2e}"
    _report(f"autoencoder gradients (max rel err {worst:.2e})", started)


def test_kmeans_criteria():
    """Monotone inertia, two-blob recovery within 0.1, bitwise determinism."""
    started = time.perf_counter()
    rng = np.random.default_rng(0)
    a = rng.normal(loc=(-4.0, 0.0), scale=0.3, size=(200, 2))
    b = rng.normal(loc=(4.0, 1.0), scale=0.3, size=(200, 2))
    pts = np.concatenate([a, b])

    r1 = kmeans_fit(pts, k=2, seed=3)
    hist = np.asarray(r1.inertia_history)
    assert (np.diff(hist) <= 1e-9 * np.maximum(1.0, hist[:-1])).all()

    means = np.stack([a.mean(axis=0), b.mean(axis=0)])
    d = np.linalg.norm(r1.centers[:, None] - means[None], axis=2)
    order = d.argmin(axis=1)
    assert set(order) == {0, 1}
    worst = max(np.linalg.norm(c - m) for c, m in zip(r1.centers, means[order]))
    assert worst < 0.1, f"blob center error {worst}"

    r2 = kmeans_fit(pts, k=2, seed=3)
    assert r1.centers.tobytes() == r2.centers.tobytes()
    assert kmeans_assign(pts[17], r1.centers) == r1.assignments[17]
    _report(f"k-means (blob error {worst:.4f}, deterministic)", started)


def test_pipeline_determinism_and_closure(tmp_path):
    """10k augmentations: byte-identical across runs and worker counts, all finite."""
    started = time.perf_counter()
    base = generate_synthetic(SyntheticSpec(
        n_sequences=500, n_classes=4, noise_std=0.05, seed=9, rest_seed=9))
    priors = learn_priors(base, AugmentConfig(n_bkg=10, n_tr=20, seed=4))

    batch = []
    for rep in range(20):
        for seq in base.sequences:
            batch.append(seq.with_frames(seq.frames, id=f"{seq.id}/rep{rep}"))
    assert len(batch) == 10_000

    outputs = {}
    for tag, workers in (("run1", 1), ("run2", 1), ("run3", 2)):
        pairs = augment_batch(batch, priors, 1.0, master_seed=123, workers=workers)
        augmented = [aug for _, aug in pairs]
        assert all(a is not None for a in augmented)
        for a in augmented:
            assert a.frames.shape == (64, 25, 3)
            assert np.isfinite(a.frames).all()
        path = tmp_path / f"{tag}.pkd"
        write_corpus(Corpus(augmented), path, format="packed")
        outputs[tag] = path.read_bytes()
    assert outputs["run1"] == outputs["run2"], "reruns differ"
    assert outputs["run1"] == outputs["run3"], "worker counts change output"
    _report("pipeline determinism & closure (10k augmentations)", started)


def _valid_ntu_text(rng) -> str:
    n_frames = int(rng.integers(1, 4))
    n_joints = int(rng.integers(2, 8))
    lines = [str(n_frames)]
    for _ in range(n_frames):
        n_bodies = int(rng.integers(1, 3))
        lines.append(str(n_bodies))
        for b in range(n_bodies):
            lines.append(" ".join([str(1000 + b)] + ["0"] * 9))
            lines.append(str(n_joints))
            for _ in range(n_joints):
                xyz = rng.normal(size=3)
                lines.append(" ".join([f"{v:.6f}" for v in xyz] + ["0"] * 9))
    return "\n".join(lines) + "\n"


def test_parser_fuzz():
    """1000 mutated files: clean parses or ParseError, never anything else."""
    started = time.perf_counter()
    rng = np.random.default_rng(31337)
    n_parsed = n_rejected = 0
    for trial in range(1000):
        text = _valid_ntu_text(rng)
        lines = text.rstrip("\n").split("\n")
        mutation = trial % 5
        expect_wellformed = False
        if mutation == 0:
            expect_wellformed = True  # untouched
        elif mutation == 1:
            cut = int(rng.integers(1, len(lines)))
            lines = lines[:cut + 1] if cut + 1 < len(lines) else lines[:-1]
        elif mutation == 2:
            lines[0] = str(int(lines[0]) + int(rng.integers(1, 5)))
        elif mutation == 3:
            target = int(rng.integers(len(lines)))
            lines[target] = "@" + lines[target]
        else:
            expect_wellformed = True  # CRLF + trailing whitespace only
            lines = [ln + "  \r" for ln in lines]
        mutated = "\n".join(lines) + "\n"
        try:
            rec = parse_ntu_skeleton(mutated)
            n_parsed += 1
            if not expect_wellformed:
                # a mutation may cancel out (e.g. '@' on an ignored column);
                # what matters is it never produced garbage silently
                assert np.isfinite(rec.data).all()
            else:
                round_trip = parse_ntu_skeleton(write_ntu_skeleton(rec))
                assert round_trip.data.tobytes() == rec.data.tobytes()
        except ParseError:
            n_rejected += 1
            if expect_wellformed:
                raise AssertionError("well-formed input rejected")
    assert n_parsed > 0 and n_rejected > 0
    _report(f"parser fuzz ({n_parsed} parsed, {n_rejected} rejected, 0 panics)",
            started)


def _burn_cpu(seconds: float) -> int:
    t0 = time.process_time()
    x = 0
    while time.process_time() - t0 < seconds:
        x += 1
    return x


def _parallel_capacity(workers: int) -> float:
    """Measured hardware ceiling: speedup of pure CPU burns across processes.

    vCPU counts overstate what oversubscribed hosts actually deliver, so the
    scaling assertion is calibrated against this ceiling instead of nproc.
    """
    import multiprocessing
    ctx = multiprocessing.get_context("fork")
    per_task = 0.2
    t0 = time.perf_counter()
    _burn_cpu(per_task)
    serial = time.perf_counter() - t0
    with ctx.Pool(workers) as pool:
        t0 = time.perf_counter()
        pool.map(_burn_cpu, [per_task] * workers)
        wall = time.perf_counter() - t0
    return workers * serial / wall


def _throughput_fixture():
    base = generate_synthetic(SyntheticSpec(
        n_sequences=50, n_classes=4, noise_std=0.05, seed=13, rest_seed=13))
    priors = learn_priors(base, AugmentConfig(n_bkg=10, n_tr=20, seed=1))
    batch = []
    for rep in range(200):
        for seq in base.sequences[:50]:
            batch.append(seq.with_frames(seq.frames, id=f"{seq.id}/b{rep}"))
    return batch, priors


def test_throughput_rate_and_worker_equivalence():
    """>= 1000 seq/s single-threaded; 4 workers produce identical bytes."""
    started = time.perf_counter()
    batch, priors = _throughput_fixture()
    n = len(batch)

    t0 = time.perf_counter()
    single = augment_batch(batch, priors, 1.0, master_seed=5, workers=1)
    rate = n / (time.perf_counter() - t0)
    assert rate >= 1000, f"single-threaded rate {rate:.0f}/s < 1000/s"

    multi = augment_batch(batch, priors, 1.0, master_seed=5, workers=4)
    for (_, a), (_, b) in zip(single, multi):
        assert a.frames.tobytes() == b.frames.tobytes()
    _report(f"throughput ({rate:.0f} seq/s single-threaded, "
            f"4-worker output byte-identical)", started)


def test_throughput_scaling():
    """Near-linear scaling to 4 workers, relative to measured CPU capacity."""
    started = time.perf_counter()
    capacity = _parallel_capacity(4)
    if capacity < 2.0:
        pytest.skip(
            f"host delivers only {capacity:.2f}x parallel CPU capacity with 4 "
            f"processes ({os.cpu_count()} vCPUs); scaling cannot be expressed here")
    batch, priors = _throughput_fixture()

    t0 = time.perf_counter()
    augment_batch(batch, priors, 1.0, master_seed=5, workers=1)
    t_single = time.perf_counter() - t0
    t0 = time.perf_counter()
    augment_batch(batch, priors, 1.0, master_seed=5, workers=4)
    t_multi = time.perf_counter() - t0

    speedup = t_single / t_multi
    floor = 0.6 * min(capacity, 4.0)
    assert speedup >= floor, \
        f"speedup {speedup:.2f}x below {floor:.2f}x (capacity {capacity:.2f}x)"
    _report(f"throughput scaling ({speedup:.2f}x with 4 workers, "
            f"capacity {capacity:.2f}x)", started)
