"""Core sequence types, temporal resizing and geometric preprocessing.

A skeleton frame is a ``(J, 3)`` float array of joint coordinates. A motion
sequence stacks ``T`` frames into a ``(T, J, 3)`` array plus lightweight
metadata. All operations here are pure: they take explicit inputs (and an
explicit RNG where randomness is involved) and return new arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import AlignmentDegenerate, InvalidInput

FRAME_DTYPE = np.float32


def as_frames(array, J: int | None = None) -> np.ndarray:
    """Coerce input to a float32 (T, J, 3) frame array, validating shape and finiteness."""
    frames = np.asarray(array, dtype=FRAME_DTYPE)
    if frames.ndim != 3 or frames.shape[2] != 3:
        raise InvalidInput(f"expected (T, J, 3) frame array, got shape {frames.shape}")
    if J is not None and frames.shape[1] != J:
        raise InvalidInput(f"expected J={J} joints, got {frames.shape[1]}")
    if not np.isfinite(frames).all():
        raise InvalidInput("frame array contains non-finite values")
    return frames


@dataclass
class MotionSequence:
    """An ordered stack of skeleton frames with metadata.

    Attributes:
        frames: (T, J, 3) float32 joint coordinates.
        id: unique identifier within a corpus.
        label: optional integer action class.
        subject: optional subject/performer tag.
    """

    frames: np.ndarray
    id: str = ""
    label: int | None = None
    subject: str | None = None

    def __post_init__(self):
        self.frames = as_frames(self.frames)

    @property
    def T(self) -> int:
        return self.frames.shape[0]

    @property
    def J(self) -> int:
        return self.frames.shape[1]

    def with_frames(self, frames: np.ndarray, id: str | None = None) -> "MotionSequence":
        """Copy of this sequence with new frames (and optionally a new id)."""
        return replace(self, frames=frames, id=self.id if id is None else id)


@dataclass
class PreprocessSpec:
    """Joint indices controlling trajectory removal and axis alignment.

    Defaults follow the common 25-joint Kinect rig: root at the spine base,
    spine tip at the shoulder-centre joint, shoulders at indices 4/8. All
    indices are configuration so other rigs work.
    """

    root_joint: int = 0
    align_axes: bool = True
    spine_joint: int = 20
    shoulder_left: int = 4
    shoulder_right: int = 8

    def validate(self, J: int) -> None:
        for name in ("root_joint", "spine_joint", "shoulder_left", "shoulder_right"):
            idx = getattr(self, name)
            if not 0 <= idx < J:
                raise InvalidInput(f"{name}={idx} out of range for J={J}")


def flatten_skeleton(skel: np.ndarray) -> np.ndarray:
    """Flatten a (J, 3) frame to a length 3*J vector in joint-major order."""
    skel = np.asarray(skel)
    if skel.ndim != 2 or skel.shape[1] != 3:
        raise InvalidInput(f"expected (J, 3) skeleton, got shape {skel.shape}")
    return skel.reshape(-1)


def unflatten_skeleton(vec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`flatten_skeleton`."""
    vec = np.asarray(vec)
    if vec.ndim != 1 or vec.size % 3 != 0:
        raise InvalidInput(f"expected flat vector of length 3*J, got shape {vec.shape}")
    return vec.reshape(-1, 3)


def resize_frames(frames: np.ndarray, T_out: int, mode: str = "linear",
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Resize a (T, J, 3) frame array to T_out frames.

    ``linear`` interpolates per joint and coordinate over normalized time with
    the first and last input frames pinned to the first and last output
    frames. ``random_frame`` splits [0, T) into T_out uniform bins and picks
    one frame per bin using ``rng``.
    """
    if frames.shape[0] == 0:
        raise InvalidInput("cannot resize an empty sequence")
    if T_out < 1:
        raise InvalidInput(f"T_out must be >= 1, got {T_out}")
    T = frames.shape[0]

    if mode == "linear":
        if T_out == T:
            return frames.copy()
        if T == 1:
            return np.repeat(frames, T_out, axis=0)
        pos = np.linspace(0.0, T - 1, T_out)
        lo = np.floor(pos).astype(np.intp)
        hi = np.minimum(lo + 1, T - 1)
        w = (pos - lo)[:, None, None]
        a = frames[lo].astype(np.float64)
        b = frames[hi].astype(np.float64)
        out = (a + (b - a) * w).astype(FRAME_DTYPE)
        exact = (pos == lo)
        out[exact] = frames[lo[exact]]
        return out

    if mode == "random_frame":
        if rng is None:
            raise InvalidInput("mode='random_frame' requires an rng")
        edges = np.floor(np.arange(T_out + 1) * T / T_out).astype(np.intp)
        picks = np.empty(T_out, dtype=np.intp)
        for i in range(T_out):
            lo, hi = edges[i], max(edges[i + 1], edges[i] + 1)
            picks[i] = rng.integers(lo, min(hi, T))
        return frames[picks].copy()

    raise InvalidInput(f"unknown resize mode {mode!r}")


def resize_temporal(seq: MotionSequence, T_out: int, mode: str = "linear",
                    rng: np.random.Generator | None = None) -> MotionSequence:
    """Resize a sequence to exactly ``T_out`` frames (see :func:`resize_frames`)."""
    return seq.with_frames(resize_frames(seq.frames, T_out, mode, rng))


def _rotation_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rotation matrix taking unit vector a onto unit vector b (Rodrigues)."""
    c = float(np.dot(a, b))
    axis = np.cross(a, b)
    s = float(np.linalg.norm(axis))
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        # a == -b: rotate 180 degrees about any axis orthogonal to a
        ortho = np.array([1.0, 0.0, 0.0])
        if abs(a[0]) > 0.9:
            ortho = np.array([0.0, 1.0, 0.0])
        axis = np.cross(a, ortho)
        axis /= np.linalg.norm(axis)
        return 2.0 * np.outer(axis, axis) - np.eye(3)
    axis /= s
    K = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + s * K + (1 - c) * (K @ K)


def _alignment_rotation(frame: np.ndarray, spec: PreprocessSpec) -> np.ndarray:
    """Rotation aligning the first frame's spine to +z and shoulders to +x.

    The spine (root -> spine_joint) lands exactly on the z-axis; the shoulder
    line (left -> right) is then spun about z so its xy-projection points
    along +x.
    """
    spine = frame[spec.spine_joint] - frame[spec.root_joint]
    spine_len = np.linalg.norm(spine)
    if spine_len < 1e-8:
        raise AlignmentDegenerate("zero-length spine vector in first frame")
    R1 = _rotation_between(spine / spine_len, np.array([0.0, 0.0, 1.0]))

    shoulder = frame[spec.shoulder_right] - frame[spec.shoulder_left]
    if np.linalg.norm(shoulder) < 1e-8:
        raise AlignmentDegenerate("zero-length shoulder vector in first frame")
    sh = R1 @ shoulder
    proj = np.hypot(sh[0], sh[1])
    if proj < 1e-8:
        raise AlignmentDegenerate("shoulder line parallel to spine; cannot fix heading")
    cos_t, sin_t = sh[0] / proj, sh[1] / proj
    R2 = np.array([[cos_t, sin_t, 0.0],
                   [-sin_t, cos_t, 0.0],
                   [0.0, 0.0, 1.0]])
    return R2 @ R1


def preprocess(seq: MotionSequence, spec: PreprocessSpec | None = None) -> MotionSequence:
    """Remove trajectory and (optionally) camera rotation from a sequence.

    The root joint of the first frame is translated to the origin and that
    translation is applied to every frame. With ``align_axes`` a single rigid
    rotation computed from the first frame is applied to all frames so the
    spine points along +z and the shoulder line along +x.

    Raises AlignmentDegenerate when the first frame has no usable spine or
    shoulder vector; callers may retry with ``align_axes=False``.
    """
    spec = spec or PreprocessSpec()
    spec.validate(seq.J)
    frames = seq.frames.astype(np.float64)
    frames = frames - frames[0, spec.root_joint]
    if spec.align_axes:
        R = _alignment_rotation(frames[0], spec)
        frames = frames @ R.T
    return seq.with_frames(frames.astype(FRAME_DTYPE))


def random_rotation(seq: MotionSequence, max_angle_deg, rng: np.random.Generator) -> MotionSequence:
    """Apply one random rigid 3D rotation to every frame.

    ``max_angle_deg`` gives per-axis Euler bounds (scalar or length-3); each
    angle is drawn uniformly from [-bound, +bound]. Pairwise joint distances
    are preserved (rigid motion).
    """
    bounds = np.broadcast_to(np.asarray(max_angle_deg, dtype=np.float64), (3,))
    if (bounds < 0).any():
        raise InvalidInput("rotation bounds must be >= 0")
    ax, ay, az = np.radians(rng.uniform(-bounds, bounds))
    cx, sx = np.cos(ax), np.sin(ax)
    cy, sy = np.cos(ay), np.sin(ay)
    cz, sz = np.cos(az), np.sin(az)
    Rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    Ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    Rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    R = Rz @ Ry @ Rx
    frames = seq.frames.astype(np.float64) @ R.T
    return seq.with_frames(frames.astype(FRAME_DTYPE))
