"""Per-frame pose diversity analysis with a small fully-connected autoencoder.

The statistic is the per-timestamp standard deviation of a pose embedding
across a corpus, combined over feature dimensions as a root mean square. The
embedding is either the 32-dim bottleneck of the autoencoder below or the
raw flattened joints (model-free mode, no training required).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .ingest import Corpus

HIDDEN_DIMS = (128, 64, 32, 64, 128)


@dataclass
class DiversityCurve:
    """Per-frame diversity values plus the feature space they were measured in."""

    values: np.ndarray        # (T,) non-negative
    space: str                # "latent" or "raw-joint"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or (self.values < 0).any():
            raise InvalidInput("diversity values must be a non-negative 1-d vector")

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]

    def __array__(self, dtype=None):
        return self.values.astype(dtype) if dtype else self.values


class AutoEncoder:
    """Six affine layers with a rectifier after all but the last.

    Layer output sizes are 128, 64, 32, 64, 128 and 3*J; the latent code is
    the post-activation output of the third (32-dim) layer. Weights are
    float64 throughout; forward and backward passes are hand-rolled.
    """

    def __init__(self, input_dim: int, seed: int = 0,
                 hidden_dims: tuple[int, ...] = HIDDEN_DIMS):
        if input_dim < 1:
            raise InvalidInput("input_dim must be >= 1")
        dims = [input_dim, *hidden_dims, input_dim]
        rng = np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for d_in, d_out in zip(dims[:-1], dims[1:]):
            scale = np.sqrt(2.0 / d_in)
            self.weights.append(rng.normal(0.0, scale, size=(d_in, d_out)))
            self.biases.append(np.zeros(d_out))
        self.input_dim = input_dim
        # bottleneck: post-activation output of the middle layer
        # (layer 3, dim 32, for the canonical six-layer configuration)
        self.latent_layer = max(1, self.n_layers // 2)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reconstruction and latent code for a (B, D) batch or a (D,) vector."""
        squeeze = x.ndim == 1
        h = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if h.shape[1] != self.input_dim:
            raise InvalidInput(f"expected input dim {self.input_dim}, got {h.shape[1]}")
        if not np.isfinite(h).all():
            raise InvalidInput("autoencoder input contains non-finite values")
        latent = None
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < self.n_layers - 1:
                h = np.maximum(h, 0.0)
            if i == self.latent_layer - 1:
                latent = h
        if squeeze:
            return h[0], latent[0]
        return h, latent

    def _forward_cached(self, x: np.ndarray):
        acts = [x]
        pre = []
        h = x
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W + b
            pre.append(z)
            h = np.maximum(z, 0.0) if i < self.n_layers - 1 else z
            acts.append(h)
        return acts, pre

    def loss_and_grads(self, x: np.ndarray):
        """Mean squared reconstruction error and gradients for a (B, D) batch."""
        x = np.asarray(x, dtype=np.float64)
        acts, pre = self._forward_cached(x)
        recon = acts[-1]
        diff = recon - x
        loss = float((diff * diff).mean())

        grads_W = [np.empty_like(W) for W in self.weights]
        grads_b = [np.empty_like(b) for b in self.biases]
        delta = 2.0 * diff / diff.size
        for i in range(self.n_layers - 1, -1, -1):
            if i < self.n_layers - 1:
                delta = delta * (pre[i] > 0.0)
            grads_W[i] = acts[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
        return loss, grads_W, grads_b


def ae_train(corpus: Corpus, epochs: int = 30, lr: float = 0.01,
             momentum: float = 0.9, batch_size: int = 256,
             seed: int = 0) -> AutoEncoder:
    """Train an autoencoder on every frame of every sequence in the corpus.

    Plain mini-batch gradient descent with momentum on the mean squared
    reconstruction error. Batches are visited in a seeded shuffled order each
    epoch, sequentially, so training is deterministic under the seed.
    """
    if len(corpus) == 0:
        raise InvalidInput("cannot train on an empty corpus")
    frames = np.concatenate([
        seq.frames.reshape(seq.T, -1) for seq in corpus.sequences
    ]).astype(np.float64)
    model = AutoEncoder(frames.shape[1], seed=seed)
    vel_W = [np.zeros_like(W) for W in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]
    rng = np.random.default_rng(seed + 1)

    n = frames.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = frames[order[start:start + batch_size]]
            _, grads_W, grads_b = model.loss_and_grads(batch)
            for i in range(model.n_layers):
                vel_W[i] = momentum * vel_W[i] - lr * grads_W[i]
                vel_b[i] = momentum * vel_b[i] - lr * grads_b[i]
                model.weights[i] += vel_W[i]
                model.biases[i] += vel_b[i]
    return model


def diversity_curve(corpus: Corpus, model: AutoEncoder | None = None) -> DiversityCurve:
    """Per-frame feature diversity of a corpus.

    For each timestamp t, embeds frame t of every sequence (bottleneck code
    when a model is given, raw flattened joints otherwise) and returns the
    root mean squared deviation from the per-dimension mean, i.e. the
    population standard deviation pooled over feature dimensions.
    """
    if len(corpus) < 2:
        raise InvalidInput("diversity needs at least 2 sequences")
    T = corpus.canonical_T
    if T is None:
        raise InvalidInput("sequences must share one canonical length")
    flat = np.stack([seq.frames.reshape(T, -1) for seq in corpus.sequences])  # (N, T, D)
    N, _, D = flat.shape
    if model is not None:
        _, z = model.forward(flat.reshape(N * T, D).astype(np.float64))
        feats = z.reshape(N, T, -1)
    else:
        feats = flat.astype(np.float64)
    dev = feats - feats.mean(axis=0, keepdims=True)
    values = np.sqrt((dev * dev).mean(axis=(0, 2)))
    return DiversityCurve(values, "latent" if model is not None else "raw-joint")
