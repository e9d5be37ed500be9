"""Parsing and validation of per-frame pose keypoint documents.

A frame document is a JSON object carrying a ``people`` array. Every entry
holds ``pose_keypoints_2d``: a flat list of 75 numbers, three per keypoint
(``x0, y0, c0, ..., x24, y24, c24``) over the 25-point body layout. Unknown
keys are ignored. Detectors emit the all-zero triple ``(0, 0, 0)`` for a
joint they could not locate; such keypoints are treated as missing by all
downstream computations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import ContractViolation, DuplicateFrameError, ParseError, SchemaError

NUM_KEYPOINTS = 25
FLAT_LENGTH = 3 * NUM_KEYPOINTS

CLASS_LABELS = ("NonFight", "Fight")


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    confidence: float

    def is_missing(self) -> bool:
        """True for the detector's undetected-joint convention (0, 0, 0)."""
        return self.confidence == 0.0 and self.x == 0.0 and self.y == 0.0


def is_valid(kp: Keypoint, confidence_floor: float = 0.0) -> bool:
    """Whether a keypoint carries a usable detection.

    Zero confidence means the detector found nothing, so the default floor
    of 0.0 already rejects it; raising the floor additionally drops weak
    detections. The comparison is strict: a keypoint at exactly the floor
    does not pass.
    """
    return kp.confidence > confidence_floor


@dataclass(frozen=True)
class PersonPose:
    keypoints: tuple[Keypoint, ...]

    def __post_init__(self):
        if len(self.keypoints) != NUM_KEYPOINTS:
            raise ContractViolation(
                f"a person carries exactly {NUM_KEYPOINTS} keypoints, got {len(self.keypoints)}"
            )

    def as_array(self) -> np.ndarray:
        """Keypoints as a (25, 3) float array of x, y, confidence columns."""
        return np.array([(k.x, k.y, k.confidence) for k in self.keypoints], dtype=float)


@dataclass(frozen=True)
class FramePoses:
    frame_index: int
    persons: tuple[PersonPose, ...] = ()

    def __post_init__(self):
        if self.frame_index < 0:
            raise ContractViolation("frame_index must be >= 0")


@dataclass(frozen=True)
class VideoPoseSequence:
    video_id: str
    frames: tuple[FramePoses, ...] = ()
    label: Optional[str] = None

    def __post_init__(self):
        if self.label is not None and self.label not in CLASS_LABELS:
            raise ContractViolation(f"label must be one of {CLASS_LABELS}, got {self.label!r}")
        previous = -1
        for frame in self.frames:
            if frame.frame_index == previous:
                raise DuplicateFrameError(
                    f"duplicate frame_index {frame.frame_index} in video {self.video_id!r}"
                )
            if frame.frame_index < previous:
                raise ContractViolation("frames must be sorted by frame_index")
            previous = frame.frame_index


def parse_frame(raw: bytes | str, frame_index: int = 0) -> FramePoses:
    """Parse one frame document into validated poses.

    Raises ParseError carrying the byte offset when the payload is not valid
    JSON, and SchemaError naming the offending person when the decoded
    structure is wrong. An empty ``people`` array is a legal frame with no
    detections.
    """
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(
                f"frame document is not valid UTF-8: {exc.reason}", offset=exc.start
            ) from exc
    else:
        text = raw
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"frame document is not valid JSON: {exc.msg}", offset=offset) from exc

    if not isinstance(doc, dict) or not isinstance(doc.get("people"), list):
        raise SchemaError('frame document must be an object with a "people" array')

    persons = []
    for pi, entry in enumerate(doc["people"]):
        if not isinstance(entry, dict):
            raise SchemaError(f"person {pi}: entry must be an object", person_index=pi)
        flat = entry.get("pose_keypoints_2d")
        if not isinstance(flat, list):
            raise SchemaError(f'person {pi}: missing "pose_keypoints_2d" list', person_index=pi)
        if len(flat) != FLAT_LENGTH:
            raise SchemaError(
                f"person {pi}: keypoint list has length {len(flat)}, expected {FLAT_LENGTH}",
                person_index=pi,
            )
        keypoints = []
        for k in range(NUM_KEYPOINTS):
            x, y, c = flat[3 * k : 3 * k + 3]
            for field, value in (("x", x), ("y", y), ("confidence", c)):
                if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                    raise SchemaError(
                        f"person {pi}: keypoint {k} has non-numeric {field}", person_index=pi
                    )
            if not 0.0 <= c <= 1.0:
                raise SchemaError(
                    f"person {pi}: keypoint {k} confidence {c} outside [0, 1]", person_index=pi
                )
            keypoints.append(Keypoint(float(x), float(y), float(c)))
        persons.append(PersonPose(tuple(keypoints)))
    return FramePoses(frame_index=frame_index, persons=tuple(persons))


def serialize_frame(frame: FramePoses) -> bytes:
    """Inverse of parse_frame; emits a canonical frame document."""
    people = []
    for person in frame.persons:
        flat: list[float] = []
        for kp in person.keypoints:
            flat.extend((kp.x, kp.y, kp.confidence))
        people.append({"pose_keypoints_2d": flat})
    return json.dumps({"people": people}).encode("utf-8")


def load_sequence(
    frame_sources: Iterable[tuple[int, bytes | str]],
    video_id: str,
    label: Optional[str] = None,
) -> VideoPoseSequence:
    """Assemble parsed frames into a sequence sorted by frame index.

    All sources are parsed even after a failure so a single error can
    attribute every bad frame at once; the raised ParseError carries the
    per-frame failures on its ``failures`` attribute.
    """
    sources = list(frame_sources)
    seen: set[int] = set()
    for idx, _ in sources:
        if idx in seen:
            raise DuplicateFrameError(f"duplicate frame_index {idx} in video {video_id!r}")
        seen.add(idx)

    frames = []
    failures: list[ParseError] = []
    for idx, payload in sorted(sources, key=lambda item: item[0]):
        try:
            frames.append(parse_frame(payload, frame_index=idx))
        except ParseError as exc:
            exc.frame_index = idx
            failures.append(exc)
    if failures:
        detail = "; ".join(f"frame {e.frame_index}: {e}" for e in failures)
        err = ParseError(
            f"{len(failures)} frame(s) failed to parse in video {video_id!r}: {detail}",
            frame_index=failures[0].frame_index,
        )
        err.failures = failures
        raise err
    return VideoPoseSequence(video_id=video_id, frames=tuple(frames), label=label)
