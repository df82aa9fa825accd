"""Smooth linear temporal transforms learned from trimmed/full sequence pairs.

A transform is a T x T matrix with one nonzero per row, stored as a length-T
index vector: output frame i gathers input frame indices[i]. Transforms are
learned by clustering context-aware similarity matrices between cropped
sequences and the sequences they came from; the row-softmax smoothing makes
the resulting index maps smooth and noise-resilient.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .clustering import kmeans_fit
from .errors import InvalidInput
from .ingest import Corpus
from .model import MotionSequence, resize_frames

# fixed crop windows (start_ratio, end_ratio) used to build training pairs
DEFAULT_WINDOWS: tuple[tuple[float, float], ...] = (
    (0.0, 1.0),
    (0.0, 0.5), (0.5, 1.0), (0.25, 0.75), (0.125, 0.625), (0.375, 0.875),
    (0.0, 0.75), (0.25, 1.0),
)


@dataclass
class LinearTransform:
    """Frame gather map: output frame i takes input frame indices[i]."""

    indices: np.ndarray  # (T,) int

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.intp)
        if self.indices.ndim != 1:
            raise InvalidInput(f"expected 1-d index vector, got {self.indices.shape}")
        T = self.indices.shape[0]
        if ((self.indices < 0) | (self.indices >= T)).any():
            raise InvalidInput("transform indices out of range [0, T)")

    @property
    def T(self) -> int:
        return self.indices.shape[0]

    def as_matrix(self) -> np.ndarray:
        """Dense one-hot T x T matrix equivalent (for inspection/plots)."""
        W = np.zeros((self.T, self.T))
        W[np.arange(self.T), self.indices] = 1.0
        return W


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def make_pairs(corpus: Corpus,
               windows=DEFAULT_WINDOWS) -> list[tuple[MotionSequence, MotionSequence]]:
    """Build (partial, full) training pairs from fixed crop windows.

    For every sequence v and window (a, b), the partial u is v cropped to
    frames [round(a*T), round(b*T)) and linearly resized back to length T.
    Windows that collapse to fewer than 2 frames are skipped with a warning.
    """
    pairs = []
    for seq in corpus.sequences:
        T = seq.T
        for a, b in windows:
            if not 0.0 <= a < b <= 1.0:
                raise InvalidInput(f"bad crop window ({a}, {b})")
            start = int(_round_half_up(np.float64(a * T)))
            end = int(_round_half_up(np.float64(b * T)))
            if end - start < 2:
                warnings.warn(
                    f"window ({a}, {b}) shorter than 2 frames at T={T}; skipped")
                continue
            u = seq.with_frames(resize_frames(seq.frames[start:end], T, mode="linear"))
            pairs.append((u, seq))
    return pairs


def similarity_matrix(full: MotionSequence, partial: MotionSequence,
                      lambda_T: float = 0.1) -> np.ndarray:
    """Context-aware frame similarity between a partial sequence and its full one.

    Row i scores frame i of the partial sequence against every frame j of the
    full sequence: softmax over j of -|partial_i - full_j| / lambda_T, with
    the L2 distance taken on flattened skeletons. Rows sum to one; larger
    lambda_T smooths each row across temporally adjacent context frames.
    Computed with max subtraction, so tiny lambda_T cannot overflow.
    """
    if lambda_T <= 0:
        raise InvalidInput(f"lambda_T must be > 0, got {lambda_T}")
    if full.T != partial.T:
        raise InvalidInput(f"length mismatch: full T={full.T}, partial T={partial.T}")
    pf = partial.frames.reshape(partial.T, -1).astype(np.float64)
    ff = full.frames.reshape(full.T, -1).astype(np.float64)
    if pf.shape[1] != ff.shape[1]:
        raise InvalidInput("joint counts differ between full and partial sequences")
    diff = pf[:, None, :] - ff[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    logits = -dist / lambda_T
    logits -= logits.max(axis=1, keepdims=True)
    s = np.exp(logits)
    s /= s.sum(axis=1, keepdims=True)
    return s


def transform_from_similarity(M: np.ndarray) -> LinearTransform:
    """Collapse a (row-normalized) similarity matrix to an index map.

    Rows are renormalized to sum to one (an all-zero row becomes uniform);
    k_i is the similarity-weighted mean of 0-based column indices and the
    output index is round(k_i) clamped to [0, T).
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput(f"expected square matrix, got {M.shape}")
    M = np.maximum(M, 0.0)
    T = M.shape[0]
    sums = M.sum(axis=1, keepdims=True)
    zero_rows = sums.ravel() <= 0
    M = np.where(zero_rows[:, None], 1.0 / T, M / np.where(sums > 0, sums, 1.0))
    k = M @ np.arange(T, dtype=np.float64)
    idx = np.clip(_round_half_up(k), 0, T - 1).astype(np.intp)
    return LinearTransform(idx)


def learn_transforms(corpus: Corpus, windows=DEFAULT_WINDOWS,
                     lambda_T: float = 0.1, n_tr: int = 20,
                     seed: int = 0) -> list[LinearTransform]:
    """Cluster pairwise similarity matrices into ``n_tr`` transforms.

    Every (partial, full) pair yields a T x T similarity matrix; the matrices
    are flattened and clustered with seeded k-means, and each center is
    row-normalized and collapsed to an index map.
    """
    pairs = make_pairs(corpus, windows)
    if len(pairs) < n_tr:
        raise InvalidInput(f"only {len(pairs)} pairs available, need >= {n_tr}")
    mats = np.stack([
        similarity_matrix(v, u, lambda_T).reshape(-1) for (u, v) in pairs
    ])
    result = kmeans_fit(mats, k=n_tr, seed=seed)
    T = pairs[0][0].T
    return [transform_from_similarity(c.reshape(T, T)) for c in result.centers]


def apply_transform(x: MotionSequence, w: LinearTransform) -> MotionSequence:
    """Gather frames by the transform's index map (no new poses are created)."""
    if x.T != w.T:
        raise InvalidInput(f"sequence length {x.T} != transform length {w.T}")
    return x.with_frames(x.frames[w.indices].copy())
