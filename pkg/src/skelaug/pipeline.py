"""End-to-end recover-and-resample augmentation and prior persistence.

Recovery runs boundary-conditioned extrapolation followed by a sampled
linear transform; resampling crops a random segment and resizes it back.
Batch augmentation keys every sample's RNG stream off (master seed, sample
id), so results do not depend on batch composition, ordering or worker
count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .boundary import (BoundaryPoseSet, assign_boundary, extrapolate,
                       learn_boundary_poses, sample_tp)
from .errors import FormatError, InvalidInput
from .ingest import Corpus
from .model import FRAME_DTYPE, MotionSequence, resize_frames
from .transforms import DEFAULT_WINDOWS, LinearTransform, apply_transform, learn_transforms

PRIORS_VERSION = 1


@dataclass
class AugmentConfig:
    """All pipeline knobs, serializable to/from a JSON config file."""

    T: int = 64
    J: int = 25
    alpha: float = 0.1
    lambda_T: float = 0.1
    n_bkg: int = 10
    n_tr: int = 20
    m_aug: float = 0.75
    r_lo: float = 0.7
    r_hi: float = 1.0
    resize_mode: str = "linear"
    seed: int = 0
    windows: tuple = DEFAULT_WINDOWS

    def __post_init__(self):
        if not 0.0 < self.r_lo <= self.r_hi <= 1.0:
            raise InvalidInput(f"need 0 < r_lo <= r_hi <= 1, got ({self.r_lo}, {self.r_hi})")
        if not 0.0 <= self.m_aug <= 1.0:
            raise InvalidInput(f"m_aug must be in [0, 1], got {self.m_aug}")
        if self.resize_mode not in ("linear", "random_frame"):
            raise InvalidInput(f"unknown resize mode {self.resize_mode!r}")
        if self.T < 2 or self.J < 1:
            raise InvalidInput("T must be >= 2 and J >= 1")
        self.windows = tuple((float(a), float(b)) for a, b in self.windows)

    def to_dict(self) -> dict:
        return {
            "T": self.T, "J": self.J, "alpha": self.alpha, "lambda_T": self.lambda_T,
            "n_bkg": self.n_bkg, "n_tr": self.n_tr, "m_aug": self.m_aug,
            "r_lo": self.r_lo, "r_hi": self.r_hi, "resize_mode": self.resize_mode,
            "seed": self.seed, "windows": [list(w) for w in self.windows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidInput(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass
class PriorSet:
    """Learned boundary poses and linear transforms plus their provenance."""

    poses: BoundaryPoseSet
    transforms: list[LinearTransform]
    config: AugmentConfig
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.transforms:
            raise InvalidInput("PriorSet needs at least one transform")
        if len(self.poses) == 0:
            raise InvalidInput("PriorSet needs at least one boundary pose")
        for w in self.transforms:
            if w.T != self.config.T:
                raise InvalidInput(
                    f"transform length {w.T} does not match config T={self.config.T}")
        if self.poses.J != self.config.J:
            raise InvalidInput(
                f"pose joint count {self.poses.J} does not match config J={self.config.J}")


def learn_priors(corpus: Corpus, cfg: AugmentConfig) -> PriorSet:
    """Learn boundary poses and linear transforms from a preprocessed corpus.

    Sub-learners run on seeds (cfg.seed, cfg.seed + 1) so the whole prior set
    is deterministic under cfg.seed.
    """
    for seq in corpus.sequences:
        if seq.T != cfg.T:
            raise InvalidInput(
                f"sequence {seq.id!r} has T={seq.T}, expected canonical T={cfg.T}")
    if corpus.J != cfg.J:
        raise InvalidInput(f"corpus J={corpus.J} does not match config J={cfg.J}")
    poses = learn_boundary_poses(corpus, n_bkg=cfg.n_bkg, seed=cfg.seed)
    transforms = learn_transforms(corpus, windows=cfg.windows,
                                  lambda_T=cfg.lambda_T, n_tr=cfg.n_tr,
                                  seed=cfg.seed + 1)
    tag = hashlib.blake2b(
        "\n".join(s.id for s in corpus.sequences).encode("utf-8"),
        digest_size=8).hexdigest()
    provenance = {
        "corpus": tag,
        "n_sequences": len(corpus),
        "library": f"skelaug {__version__}",
    }
    return PriorSet(poses, transforms, cfg, provenance)


def save_priors(priors: PriorSet, path) -> None:
    """Write a PriorSet as a stable-field-order JSON document."""
    doc = {
        "version": PRIORS_VERSION,
        "config": priors.config.to_dict(),
        "poses": [[[float(v) for v in joint] for joint in pose]
                  for pose in priors.poses.poses],
        "transforms": [[int(i) for i in w.indices] for w in priors.transforms],
        "provenance": priors.provenance,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def load_priors(path) -> PriorSet:
    """Read and validate a PriorSet JSON document."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"malformed priors JSON at line {e.lineno}: {e.msg}") from None
    for key in ("version", "config", "poses", "transforms"):
        if key not in doc:
            raise FormatError(f"priors file is missing {key!r}")
    if doc["version"] != PRIORS_VERSION:
        raise FormatError(f"unsupported priors version {doc['version']!r}")
    try:
        cfg = AugmentConfig.from_dict(doc["config"])
        poses = BoundaryPoseSet(np.asarray(doc["poses"], dtype=FRAME_DTYPE))
        transforms = [LinearTransform(np.asarray(t)) for t in doc["transforms"]]
        return PriorSet(poses, transforms, cfg, doc.get("provenance", {}))
    except (InvalidInput, ValueError) as e:
        raise FormatError(f"invalid priors content: {e}") from None


def sample_rng(master_seed: int, sample_id: str) -> np.random.Generator:
    """Per-sample RNG stream keyed by (master seed, sample id).

    The id is hashed with BLAKE2b so streams are stable across platforms and
    independent of batch position.
    """
    digest = hashlib.blake2b(sample_id.encode("utf-8"), digest_size=16).digest()
    entropy = [int(master_seed) & (2 ** 64 - 1), int.from_bytes(digest, "little")]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def resample(x: MotionSequence, r_lo: float, r_hi: float,
             mode: str, rng: np.random.Generator) -> MotionSequence:
    """Crop a random segment of length ratio r ~ U(r_lo, r_hi) and resize back.

    The segment length is round(r*T) clamped to [2, T]; the start index is
    uniform over feasible positions. With r_lo == r_hi == 1 and linear mode
    this is the identity.
    """
    if not 0.0 < r_lo <= r_hi <= 1.0:
        raise InvalidInput(f"need 0 < r_lo <= r_hi <= 1, got ({r_lo}, {r_hi})")
    T = x.T
    r = rng.uniform(r_lo, r_hi)
    seg = int(np.clip(np.floor(r * T + 0.5), 2, T))
    start = int(rng.integers(0, T - seg + 1))
    cropped = x.frames[start:start + seg]
    return x.with_frames(resize_frames(cropped, T, mode=mode, rng=rng))


def recover_and_resample(x: MotionSequence, priors: PriorSet,
                         rng: np.random.Generator) -> MotionSequence:
    """Complete an action from its priors, then resample a segment of it.

    Steps, in order: assign the boundary pose for the first frame, sample the
    infill length, extrapolate, apply a transform drawn uniformly from the
    prior's bank, and crop-resample back to length T.
    """
    cfg = priors.config
    if x.T != cfg.T or x.J != cfg.J:
        raise InvalidInput(
            f"sequence shape (T={x.T}, J={x.J}) does not match priors "
            f"(T={cfg.T}, J={cfg.J})")
    p_prime = assign_boundary(x.frames[0], priors.poses)
    t_p = sample_tp(cfg.alpha, cfg.T, rng)
    x = extrapolate(x, p_prime, t_p)
    w = priors.transforms[int(rng.integers(len(priors.transforms)))]
    x = apply_transform(x, w)
    return resample(x, cfg.r_lo, cfg.r_hi, cfg.resize_mode, rng)


# Work shared with forked pool workers: (priors, master_seed, items, out).
# Set before the pool is created so children inherit the inputs copy-on-write
# and write results into an anonymous shared mapping, keeping frame data off
# the IPC pipes entirely.
_FORK_WORK = None


def _augment_span(span: tuple[int, int]) -> tuple[int, int]:
    priors, master_seed, items, sink = _FORK_WORK
    for pos in range(span[0], span[1]):
        _, sample_id, frames = items[pos]
        seq = MotionSequence(frames, id=sample_id)
        aug = recover_and_resample(seq, priors, sample_rng(master_seed, sample_id))
        sink[pos] = aug.frames
    return span


def _fork_available() -> bool:
    import multiprocessing
    try:
        return "fork" in multiprocessing.get_all_start_methods()
    except Exception:
        return False


def augment_batch(batch: list[MotionSequence], priors: PriorSet,
                  m_aug: float, master_seed: int,
                  workers: int = 1) -> list[tuple[MotionSequence, MotionSequence | None]]:
    """Augment round(m_aug * B) samples of a batch, keeping the originals.

    Selection is a seeded shuffle of batch indices; each selected sample is
    augmented with its own RNG stream keyed by (master_seed, sample id), so
    per-sample results are independent of batch composition and of
    ``workers``. Returns (original, augmented-or-None) in batch order.
    """
    global _FORK_WORK
    if not 0.0 <= m_aug <= 1.0:
        raise InvalidInput(f"m_aug must be in [0, 1], got {m_aug}")
    B = len(batch)
    n_aug = int(np.floor(m_aug * B + 0.5))
    order = np.random.default_rng(master_seed).permutation(B)
    selected = set(int(i) for i in order[:n_aug])

    results: dict[int, np.ndarray] = {}
    items = [(i, batch[i].id, batch[i].frames) for i in sorted(selected)]
    parallel = (workers > 1 and len(items) >= 2 and _FORK_WORK is None
                and _fork_available())
    if not parallel:
        for idx, sample_id, frames in items:
            seq = MotionSequence(frames, id=sample_id)
            aug = recover_and_resample(seq, priors, sample_rng(master_seed, sample_id))
            results[idx] = aug.frames
    else:
        import mmap
        import multiprocessing
        cfg = priors.config
        shared = mmap.mmap(-1, len(items) * cfg.T * cfg.J * 3 * 4)
        sink = np.frombuffer(shared, dtype=FRAME_DTYPE) \
            .reshape(len(items), cfg.T, cfg.J, 3)
        _FORK_WORK = (priors, master_seed, items, sink)
        try:
            mp_ctx = multiprocessing.get_context("fork")
            chunk = max(16, len(items) // (workers * 8))
            spans = [(i, min(i + chunk, len(items)))
                     for i in range(0, len(items), chunk)]
            with ProcessPoolExecutor(max_workers=workers, mp_context=mp_ctx) as pool:
                list(pool.map(_augment_span, spans))
            for pos, (idx, _, _) in enumerate(items):
                results[idx] = sink[pos].copy()
        finally:
            _FORK_WORK = None
            del sink
            shared.close()

    out: list[tuple[MotionSequence, MotionSequence | None]] = []
    for i, seq in enumerate(batch):
        if i in results:
            out.append((seq, seq.with_frames(results[i], id=f"{seq.id}#aug")))
        else:
            out.append((seq, None))
    return out
