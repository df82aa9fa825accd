"""Boundary-pose prior: cluster sequence first frames and extrapolate from them.

The recovered start of an action is conditioned on a representative rest
pose: the first frame is replaced by the assigned pose, the original motion
is squeezed into the tail of the sequence and the gap is infilled by linear
interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import kmeans_assign, kmeans_fit
from .errors import InvalidInput
from .ingest import Corpus
from .model import FRAME_DTYPE, MotionSequence, resize_frames


@dataclass
class BoundaryPoseSet:
    """Representative rest poses learned from corpus first frames."""

    poses: np.ndarray  # (N_bkg, J, 3) float32

    def __post_init__(self):
        self.poses = np.asarray(self.poses, dtype=FRAME_DTYPE)
        if self.poses.ndim != 3 or self.poses.shape[2] != 3:
            raise InvalidInput(f"expected (N, J, 3) poses, got {self.poses.shape}")
        if not np.isfinite(self.poses).all():
            raise InvalidInput("boundary poses contain non-finite values")

    def __len__(self) -> int:
        return self.poses.shape[0]

    @property
    def J(self) -> int:
        return self.poses.shape[1]


def learn_boundary_poses(corpus: Corpus, n_bkg: int = 10, seed: int = 0) -> BoundaryPoseSet:
    """Cluster the first frames of all sequences into ``n_bkg`` poses.

    First frames are flattened to 3*J vectors and clustered with seeded
    k-means under L2; the centers are reshaped back into poses.
    """
    if len(corpus) < n_bkg:
        raise InvalidInput(
            f"corpus has {len(corpus)} sequences, fewer than n_bkg={n_bkg}")
    first = np.stack([seq.frames[0].reshape(-1) for seq in corpus.sequences])
    result = kmeans_fit(first, k=n_bkg, seed=seed)
    J = corpus.J
    return BoundaryPoseSet(result.centers.reshape(n_bkg, J, 3))


def assign_boundary(x0: np.ndarray, poses: BoundaryPoseSet) -> np.ndarray:
    """Nearest boundary pose to a first frame under flattened L2 (ties to lowest index)."""
    if len(poses) == 0:
        raise InvalidInput("empty boundary pose set")
    x0 = np.asarray(x0)
    if x0.shape != poses.poses.shape[1:]:
        raise InvalidInput(
            f"frame shape {x0.shape} does not match poses {poses.poses.shape[1:]}")
    idx = kmeans_assign(x0.reshape(-1), poses.poses.reshape(len(poses), -1))
    return poses.poses[idx]


def sample_tp(alpha: float, T: int, rng: np.random.Generator) -> int:
    """Draw the infill length t_p in [0, T/2] from a scaled Beta(alpha, alpha).

    For alpha < 1 the draw is bimodal: most mass sits near 0 (keep the
    original start) and near T/2 (infill half the sequence). Rounds half up.
    """
    if alpha <= 0:
        raise InvalidInput(f"alpha must be > 0, got {alpha}")
    if T < 2 or T % 2 != 0:
        raise InvalidInput(f"T must be a positive even length, got {T}")
    b = rng.beta(alpha, alpha)
    return int(np.floor(b * (T // 2) + 0.5))


def extrapolate(x: MotionSequence, p_prime: np.ndarray, t_p: int) -> MotionSequence:
    """Prepend an infilled segment from pose ``p_prime`` of length ``t_p``.

    The original motion is squeezed into frames [t_p, T); frame 0 becomes
    ``p_prime`` exactly and frames in between interpolate linearly (per joint
    and coordinate) toward the squeezed motion's first frame. ``t_p == 0``
    returns the input unchanged.
    """
    T = x.T
    if not 0 <= t_p <= T // 2:
        raise InvalidInput(f"t_p={t_p} outside [0, {T // 2}]")
    if t_p == 0:
        return x.with_frames(x.frames.copy())
    p_prime = np.asarray(p_prime, dtype=FRAME_DTYPE)
    if p_prime.shape != x.frames.shape[1:]:
        raise InvalidInput(
            f"pose shape {p_prime.shape} does not match frames {x.frames.shape[1:]}")

    squeezed = resize_frames(x.frames, T - t_p, mode="linear")
    out = np.empty_like(x.frames)
    out[t_p:] = squeezed
    out[0] = p_prime
    if t_p > 1:
        w = (np.arange(1, t_p) / t_p)[:, None, None]
        a = p_prime.astype(np.float64)
        b = squeezed[0].astype(np.float64)
        out[1:t_p] = (a + (b - a) * w).astype(FRAME_DTYPE)
    return x.with_frames(out)
