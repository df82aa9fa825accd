"""Corpus I/O: NTU-style skeleton text files, jsonl/packed interchange, synthetic data.

The packed format is the fast binary interchange (bit-exact round trip of the
32-bit floats); jsonl is the human-debuggable one. The synthetic generator
produces rest -> peak -> rest motions whose trims are genuine partial
observations, which the test suites use as ground-truth corpora.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidInput, NoValidBody, ParseError
from .model import FRAME_DTYPE, MotionSequence

PACKED_MAGIC = b"SKL1"


@dataclass
class Corpus:
    """A set of motion sequences sharing one joint layout."""

    sequences: list[MotionSequence]
    coordinate_space: str = "camera"

    def __post_init__(self):
        js = {s.J for s in self.sequences}
        if len(js) > 1:
            raise InvalidInput(f"sequences disagree on joint count: {sorted(js)}")
        ids = [s.id for s in self.sequences]
        if len(set(ids)) != len(ids):
            raise InvalidInput("sequence ids are not unique within the corpus")

    def __len__(self) -> int:
        return len(self.sequences)

    @property
    def J(self) -> int:
        if not self.sequences:
            raise InvalidInput("empty corpus has no joint count")
        return self.sequences[0].J

    @property
    def canonical_T(self) -> int | None:
        """The shared sequence length, or None when lengths still vary."""
        lengths = {s.T for s in self.sequences}
        return lengths.pop() if len(lengths) == 1 else None


# ---------------------------------------------------------------------------
# NTU-style .skeleton text files
# ---------------------------------------------------------------------------

@dataclass
class SkeletonRecording:
    """Raw multi-body content of one .skeleton file.

    ``data[f, b]`` holds the (J, 3) joints of body ``body_ids[b]`` at frame
    ``f``; ``present[f, b]`` says whether that body was tracked in the frame
    (absent slots are zero-filled).
    """

    body_ids: list[str]
    data: np.ndarray          # (F, B, J, 3) float32
    present: np.ndarray       # (F, B) bool

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape


class _LineReader:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.pos = 0

    @property
    def line_no(self) -> int:
        return self.pos  # 1-based number of the line just consumed

    def next_nonempty(self) -> str:
        while True:
            if self.pos >= len(self.lines):
                raise ParseError("unexpected end of file", self.pos + 1)
            raw = self.lines[self.pos]
            self.pos += 1
            stripped = raw.strip()
            if stripped:
                return stripped

    def expect_eof(self) -> None:
        while self.pos < len(self.lines):
            if self.lines[self.pos].strip():
                raise ParseError("trailing content after final frame", self.pos + 1)
            self.pos += 1


def _parse_int(token: str, what: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {token!r}", line) from None


def parse_ntu_skeleton(stream) -> SkeletonRecording:
    """Parse an NTU-layout .skeleton text stream into a recording.

    Layout: line 1 = frame count; per frame a body-count line; per body one
    line of 10 tracking values (first is the body id), one joint-count line,
    then that many joint lines of 12 whitespace-separated numbers whose first
    three are x y z. Strict on all counts, tolerant of trailing whitespace
    and CRLF line endings.
    """
    if isinstance(stream, bytes):
        text = stream.decode("ascii", errors="strict")
    elif isinstance(stream, str):
        text = stream
    else:
        data = stream.read()
        text = data.decode("ascii") if isinstance(data, bytes) else data

    rd = _LineReader(text)
    n_frames = _parse_int(rd.next_nonempty(), "frame count", rd.line_no)
    if n_frames < 0:
        raise ParseError(f"negative frame count {n_frames}", rd.line_no)

    body_order: list[str] = []
    joint_count: int | None = None
    frames: list[dict[str, np.ndarray]] = []

    for _ in range(n_frames):
        n_bodies = _parse_int(rd.next_nonempty(), "body count", rd.line_no)
        if n_bodies < 0:
            raise ParseError(f"negative body count {n_bodies}", rd.line_no)
        bodies: dict[str, np.ndarray] = {}
        for _ in range(n_bodies):
            info = rd.next_nonempty().split()
            info_line = rd.line_no
            if len(info) != 10:
                raise ParseError(
                    f"expected 10 body tracking values, got {len(info)}", info_line)
            body_id = info[0]
            n_joints = _parse_int(rd.next_nonempty(), "joint count", rd.line_no)
            count_line = rd.line_no
            if n_joints <= 0:
                raise ParseError(f"non-positive joint count {n_joints}", count_line)
            if joint_count is None:
                joint_count = n_joints
            elif n_joints != joint_count:
                raise ParseError(
                    f"joint count {n_joints} does not match earlier count {joint_count}",
                    count_line)
            joints = np.empty((n_joints, 3), dtype=FRAME_DTYPE)
            for j in range(n_joints):
                tokens = rd.next_nonempty().split()
                if len(tokens) != 12:
                    raise ParseError(
                        f"expected 12 joint values, got {len(tokens)}", rd.line_no)
                try:
                    joints[j] = [float(tokens[0]), float(tokens[1]), float(tokens[2])]
                except ValueError:
                    raise ParseError(
                        f"non-numeric joint coordinate in {tokens[:3]!r}",
                        rd.line_no) from None
            if body_id not in body_order:
                body_order.append(body_id)
            bodies[body_id] = joints
        frames.append(bodies)

    rd.expect_eof()

    J = joint_count if joint_count is not None else 0
    B = len(body_order)
    data = np.zeros((n_frames, B, J, 3), dtype=FRAME_DTYPE)
    present = np.zeros((n_frames, B), dtype=bool)
    index = {bid: i for i, bid in enumerate(body_order)}
    for f, bodies in enumerate(frames):
        for bid, joints in bodies.items():
            b = index[bid]
            data[f, b] = joints
            present[f, b] = True
    return SkeletonRecording(body_order, data, present)


def _fmt(x: np.float32) -> str:
    return np.format_float_positional(x, unique=True, trim="0")


def write_ntu_skeleton(recording: SkeletonRecording) -> str:
    """Serialize a recording back to NTU text (companion to the parser).

    Tracking metadata other than the body id is not retained by the parser,
    so those slots are written as zeros. Coordinates round-trip bit-exactly.
    """
    F, B, J, _ = recording.data.shape
    out = [str(F)]
    for f in range(F):
        bodies = [b for b in range(B) if recording.present[f, b]]
        out.append(str(len(bodies)))
        for b in bodies:
            out.append(" ".join([recording.body_ids[b]] + ["0"] * 9))
            out.append(str(J))
            for j in range(J):
                x, y, z = recording.data[f, b, j]
                out.append(" ".join([_fmt(x), _fmt(y), _fmt(z)] + ["0"] * 9))
    return "\n".join(out) + "\n"


def select_primary_body(recording: SkeletonRecording) -> MotionSequence:
    """Pick the body with the largest summed per-joint coordinate variance.

    All-zero bodies are discarded. Frames where the chosen body is missing
    are filled from the nearest frame where it is present.
    """
    F, B, J, _ = recording.data.shape
    if F == 0 or B == 0:
        raise NoValidBody("recording contains no bodies")

    best_b, best_var = -1, -1.0
    for b in range(B):
        mask = recording.present[:, b]
        if not mask.any():
            continue
        coords = recording.data[mask, b].astype(np.float64)
        if not coords.any():
            continue  # all-zero body
        var = float(coords.var(axis=0).sum())
        if var > best_var:
            best_var, best_b = var, b
    if best_b < 0:
        raise NoValidBody("no body with non-degenerate motion")

    mask = recording.present[:, best_b]
    frames = recording.data[:, best_b].copy()
    present_idx = np.flatnonzero(mask)
    missing_idx = np.flatnonzero(~mask)
    if missing_idx.size:
        nearest = np.abs(missing_idx[:, None] - present_idx[None, :]).argmin(axis=1)
        frames[missing_idx] = frames[present_idx[nearest]]
    return MotionSequence(frames)


# ---------------------------------------------------------------------------
# jsonl / packed corpus formats
# ---------------------------------------------------------------------------

def write_corpus(corpus: Corpus, path, format: str = "packed") -> None:
    if format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for seq in corpus.sequences:
                rec = {
                    "id": seq.id,
                    "label": seq.label,
                    "subject": seq.subject,
                    "frames": [[[float(v) for v in joint] for joint in frame]
                               for frame in seq.frames],
                }
                fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    elif format == "packed":
        with open(path, "wb") as fh:
            fh.write(PACKED_MAGIC)
            fh.write(struct.pack("<I", len(corpus.sequences)))
            for seq in corpus.sequences:
                ident = seq.id.encode("utf-8")
                label = -1 if seq.label is None else int(seq.label)
                fh.write(struct.pack("<I", len(ident)))
                fh.write(ident)
                fh.write(struct.pack("<iII", label, seq.T, seq.J))
                fh.write(np.ascontiguousarray(seq.frames, dtype="<f4").tobytes())
    else:
        raise InvalidInput(f"unknown corpus format {format!r}")


def _read_packed(path) -> Corpus:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != PACKED_MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}, expected {PACKED_MAGIC!r}")
    off = 4

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(blob):
            raise FormatError(f"short read at offset {off} (wanted {n} bytes)")
        chunk = blob[off:off + n]
        off += n
        return chunk

    (count,) = struct.unpack("<I", take(4))
    sequences = []
    for _ in range(count):
        (id_len,) = struct.unpack("<I", take(4))
        ident = take(id_len).decode("utf-8")
        label, T, J = struct.unpack("<iII", take(12))
        raw = take(T * J * 3 * 4)
        frames = np.frombuffer(raw, dtype="<f4").reshape(T, J, 3)
        sequences.append(MotionSequence(frames.copy(), id=ident,
                                        label=None if label == -1 else label))
    return Corpus(sequences)


def _read_jsonl(path) -> Corpus:
    sequences = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"line {line_no}: malformed JSON ({e.msg})") from None
            if "frames" not in rec:
                raise FormatError(f"line {line_no}: record is missing 'frames'")
            try:
                seq = MotionSequence(
                    np.asarray(rec["frames"], dtype=FRAME_DTYPE),
                    id=str(rec.get("id", "")),
                    label=rec.get("label"),
                    subject=rec.get("subject"),
                )
            except (InvalidInput, ValueError) as e:
                raise FormatError(f"line {line_no}: {e}") from None
            sequences.append(seq)
    return Corpus(sequences)


def read_corpus(path, format: str | None = None) -> Corpus:
    """Read a corpus file; the format is sniffed from the magic when not given."""
    if format is None:
        with open(path, "rb") as fh:
            format = "packed" if fh.read(4) == PACKED_MAGIC else "jsonl"
    if format == "packed":
        return _read_packed(path)
    if format == "jsonl":
        return _read_jsonl(path)
    raise InvalidInput(f"unknown corpus format {format!r}")


# ---------------------------------------------------------------------------
# synthetic oracle corpora
# ---------------------------------------------------------------------------

@dataclass
class SyntheticSpec:
    """Knobs for the synthetic rest -> peak -> rest motion generator.

    ``profile='peak'`` produces the rise/hold/return envelope over
    ``n_phases`` equal segments; ``profile='ramp'`` produces a monotone
    0 -> 1 ramp (useful as a ground-truth corpus for transform recovery).
    ``amplitude`` is the flattened L2 distance between rest and peak poses.
    """

    n_sequences: int = 200
    T_full: int = 64
    J: int = 25
    n_classes: int = 4
    amplitude: float = 1.0
    n_phases: int = 3
    noise_std: float = 0.0
    rest_seed: int = 0
    seed: int = 0
    profile: str = "peak"
    id_prefix: str = "syn"

    def validate(self) -> None:
        if self.T_full < 4:
            raise InvalidInput("T_full must be >= 4")
        if self.amplitude <= 0:
            raise InvalidInput("amplitude must be > 0")
        if self.noise_std < 0:
            raise InvalidInput("noise_std must be >= 0")
        if self.n_sequences < 1 or self.n_classes < 1 or self.J < 1:
            raise InvalidInput("n_sequences, n_classes and J must be >= 1")
        if self.n_phases < 1:
            raise InvalidInput("n_phases must be >= 1")
        if self.profile not in ("peak", "ramp"):
            raise InvalidInput(f"unknown profile {self.profile!r}")


def _envelope(t: np.ndarray, n_phases: int) -> np.ndarray:
    """Smooth rise/hold/return envelope over [0, 1] split into equal phases."""
    if n_phases == 1:
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * t))
    rise_end = 1.0 / n_phases
    fall_start = 1.0 - 1.0 / n_phases
    e = np.ones_like(t)
    rising = t < rise_end
    falling = t > fall_start
    e[rising] = 0.5 * (1.0 - np.cos(np.pi * t[rising] / rise_end))
    e[falling] = 0.5 * (1.0 - np.cos(np.pi * (1.0 - t[falling]) / rise_end))
    return e


def generate_synthetic(spec: SyntheticSpec) -> Corpus:
    """Generate a deterministic corpus of complete synthetic actions.

    Every sequence starts at a shared rest pose (drawn from ``rest_seed``),
    moves along a smooth envelope toward its class peak pose and, for the
    peak profile, returns to rest. Per-sequence Gaussian jitter of
    ``noise_std`` is added as a constant pose offset.
    """
    spec.validate()
    rest_rng = np.random.default_rng(spec.rest_seed)
    rest = rest_rng.normal(0.0, 0.3, size=(spec.J, 3))
    rest -= rest[0]  # root-centred rest pose

    deltas = []
    for _ in range(spec.n_classes):
        d = rest_rng.normal(0.0, 1.0, size=(spec.J, 3))
        d *= spec.amplitude / np.linalg.norm(d)
        deltas.append(d)

    t = np.linspace(0.0, 1.0, spec.T_full)
    env = t if spec.profile == "ramp" else _envelope(t, spec.n_phases)

    rng = np.random.default_rng(spec.seed)
    sequences = []
    for i in range(spec.n_sequences):
        c = i % spec.n_classes
        jitter = rng.normal(0.0, spec.noise_std, size=(spec.J, 3)) if spec.noise_std > 0 \
            else np.zeros((spec.J, 3))
        frames = rest[None] + env[:, None, None] * deltas[c][None] + jitter[None]
        sequences.append(MotionSequence(frames.astype(FRAME_DTYPE),
                                        id=f"{spec.id_prefix}-{i:05d}", label=c))
    return Corpus(sequences, coordinate_space="synthetic")
