"""Joint velocities and joint-overlap counts aggregated per video.

The extractor reduces a whole pose sequence to five numbers: mean, max and
variance of weighted joint speeds between consecutive frames, plus mean and
variance of the per-frame joint-overlap count. Speeds pair each joint with
the nearest joint of the same type anywhere in the next frame, which keeps
the measure usable with detectors that do not track person identities.
Eleven joints are scored; elbows carry weight 0.8, every other selected
joint weight 1.0, and the weight sits inside the square root of the speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, ContractViolation
from .pose import FramePoses, Keypoint, PersonPose, VideoPoseSequence

# Standard 25-point body layout positions of the scored joints.
BODY25_INDEX = {
    "neck": 1,
    "right_elbow": 3,
    "right_wrist": 4,
    "left_elbow": 6,
    "left_wrist": 7,
    "right_hip": 9,
    "right_knee": 10,
    "right_ankle": 11,
    "left_hip": 12,
    "left_knee": 13,
    "left_ankle": 14,
}

SELECTED_JOINT_ORDER = (
    "right_wrist",
    "left_wrist",
    "right_elbow",
    "left_elbow",
    "right_hip",
    "left_hip",
    "right_knee",
    "left_knee",
    "right_ankle",
    "left_ankle",
    "neck",
)

JOINT_WEIGHTS = {
    "right_wrist": 1.0,
    "left_wrist": 1.0,
    "right_elbow": 0.8,
    "left_elbow": 0.8,
    "right_hip": 1.0,
    "left_hip": 1.0,
    "right_knee": 1.0,
    "left_knee": 1.0,
    "right_ankle": 1.0,
    "left_ankle": 1.0,
    "neck": 1.0,
}

FEATURE_NAMES = ("mean_vel", "max_vel", "var_vel", "mean_overlap", "var_overlap")
VELOCITY_FEATURES = FEATURE_NAMES[:3]
OVERLAP_FEATURES = FEATURE_NAMES[3:]


@dataclass(frozen=True)
class JointSpec:
    name: str
    body25_index: int
    weight: float


def selected_joints(index_map: Optional[Mapping[str, int]] = None) -> tuple[JointSpec, ...]:
    """The eleven scored joints, in canonical order.

    ``index_map`` overrides the default 25-point layout for detectors that
    order keypoints differently; it must cover every selected joint name
    with distinct in-range indices.
    """
    table = BODY25_INDEX if index_map is None else dict(index_map)
    specs = []
    for name in SELECTED_JOINT_ORDER:
        if name not in table:
            raise ConfigError(f"index map is missing joint {name!r}")
        idx = int(table[name])
        if not 0 <= idx < 25:
            raise ConfigError(f"joint {name!r} index {idx} outside [0, 24]")
        specs.append(JointSpec(name, idx, JOINT_WEIGHTS[name]))
    if len({s.body25_index for s in specs}) != len(specs):
        raise ConfigError("joint indices must be distinct")
    return tuple(specs)


@dataclass(frozen=True)
class VelocityObservation:
    frame_index: int
    person_index: int
    joint: JointSpec
    velocity: float


@dataclass(frozen=True)
class BBox:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ContractViolation("bounding box must have min <= max on both axes")

    def contains(self, x: float, y: float) -> bool:
        """Closed-interval membership on both axes."""
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class OverlapObservation:
    frame_index: int
    count: int


@dataclass(frozen=True)
class FeatureVector:
    video_id: str
    mean_velocity: float
    max_velocity: float
    var_velocity: float
    mean_overlap: float
    var_overlap: float
    velocity_enabled: bool = True
    overlap_enabled: bool = True

    def values(self) -> tuple[float, float, float, float, float]:
        return (
            self.mean_velocity,
            self.max_velocity,
            self.var_velocity,
            self.mean_overlap,
            self.var_overlap,
        )

    def enabled_names(self) -> tuple[str, ...]:
        return enabled_feature_names(self.velocity_enabled, self.overlap_enabled)

    def enabled_values(self) -> tuple[float, ...]:
        picked = []
        if self.velocity_enabled:
            picked.extend(self.values()[:3])
        if self.overlap_enabled:
            picked.extend(self.values()[3:])
        return tuple(picked)


def enabled_feature_names(velocity: bool = True, overlap: bool = True) -> tuple[str, ...]:
    if not (velocity or overlap):
        raise ConfigError("at least one feature group must stay enabled")
    names: tuple[str, ...] = ()
    if velocity:
        names += VELOCITY_FEATURES
    if overlap:
        names += OVERLAP_FEATURES
    return names


def joint_velocity(p_t: Keypoint, p_next: Keypoint, weight: float) -> float:
    """Weighted displacement of one joint between consecutive frames.

    The weight multiplies the squared distance inside the square root, so
    scaling a weight by c scales the result by sqrt(c). Both keypoints must
    be actual detections.
    """
    if weight <= 0:
        raise ContractViolation("joint weight must be > 0")
    if p_t.is_missing() or p_next.is_missing():
        raise ContractViolation("joint_velocity requires detected keypoints on both frames")
    dx = p_next.x - p_t.x
    dy = p_next.y - p_t.y
    return math.sqrt(weight * (dx * dx + dy * dy))


def _frame_array(frame: FramePoses) -> np.ndarray:
    if not frame.persons:
        return np.zeros((0, 25, 3))
    return np.stack([person.as_array() for person in frame.persons])


def _match_velocities(
    arr_t: np.ndarray,
    arr_next: np.ndarray,
    joints: Sequence[JointSpec],
    confidence_floor: float,
) -> list[tuple[int, JointSpec, float]]:
    """(person, joint, velocity) triples for one consecutive frame pair."""
    out: list[tuple[int, JointSpec, float]] = []
    if arr_t.shape[0] == 0 or arr_next.shape[0] == 0:
        return out
    candidates = []
    for spec in joints:
        column = arr_next[:, spec.body25_index, :]
        mask = column[:, 2] > confidence_floor
        candidates.append(column[mask, :2] if mask.any() else None)
    for i in range(arr_t.shape[0]):
        person = arr_t[i]
        for spec, cxy in zip(joints, candidates):
            kp = person[spec.body25_index]
            if kp[2] <= confidence_floor or cxy is None:
                continue
            dx = cxy[:, 0] - kp[0]
            dy = cxy[:, 1] - kp[1]
            d2 = float(np.min(dx * dx + dy * dy))
            out.append((i, spec, math.sqrt(spec.weight * d2)))
    return out


def match_and_measure(
    frame_t: FramePoses,
    frame_next: FramePoses,
    joints: Sequence[JointSpec],
    confidence_floor: float = 0.0,
) -> list[VelocityObservation]:
    """Velocity observations between two frames, without identity tracking.

    Every valid joint of every person in the first frame is paired with the
    nearest valid joint of the same type across all persons in the second
    frame (ties resolve to the earliest person there). Joints with no valid
    counterpart simply produce no observation.
    """
    triples = _match_velocities(
        _frame_array(frame_t), _frame_array(frame_next), joints, confidence_floor
    )
    return [
        VelocityObservation(frame_t.frame_index, person, spec, velocity)
        for person, spec, velocity in triples
    ]


def person_bbox(person: PersonPose, confidence_floor: float = 0.0) -> Optional[BBox]:
    """Axis-aligned extent over all 25 valid keypoints of a person.

    None when fewer than two keypoints are valid: a single point does not
    describe a body extent.
    """
    arr = person.as_array()
    pts = arr[arr[:, 2] > confidence_floor]
    if pts.shape[0] < 2:
        return None
    return BBox(
        float(pts[:, 0].min()),
        float(pts[:, 0].max()),
        float(pts[:, 1].min()),
        float(pts[:, 1].max()),
    )


def _array_bboxes(arr: np.ndarray, confidence_floor: float) -> list[Optional[tuple]]:
    boxes: list[Optional[tuple]] = []
    for i in range(arr.shape[0]):
        pts = arr[i][arr[i][:, 2] > confidence_floor]
        if pts.shape[0] < 2:
            boxes.append(None)
        else:
            boxes.append((pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max()))
    return boxes


def _overlap_count(arr: np.ndarray, joints: Sequence[JointSpec], confidence_floor: float) -> int:
    n = arr.shape[0]
    if n < 2:
        return 0
    boxes = _array_bboxes(arr, confidence_floor)
    sel = [spec.body25_index for spec in joints]
    total = 0
    for i in range(n):
        kps = arr[i, sel]
        valid = kps[:, 2] > confidence_floor
        for j in range(n):
            if i == j or boxes[j] is None:
                continue
            x_min, x_max, y_min, y_max = boxes[j]
            inside = (
                valid
                & (kps[:, 0] >= x_min)
                & (kps[:, 0] <= x_max)
                & (kps[:, 1] >= y_min)
                & (kps[:, 1] <= y_max)
            )
            total += int(inside.sum())
    return total


def joint_overlap_count(
    frame: FramePoses,
    joints: Sequence[JointSpec],
    confidence_floor: float = 0.0,
) -> OverlapObservation:
    """Selected joints of each person inside every other person's box.

    Ordered pairs are summed, so two mutually entangled persons both
    contribute; persons without a box (under two valid keypoints) accept no
    joints. Containment uses closed intervals on both axes.
    """
    return OverlapObservation(
        frame.frame_index, _overlap_count(_frame_array(frame), joints, confidence_floor)
    )


def _stats3(values: np.ndarray) -> tuple[float, float, float]:
    if values.size == 0:
        return (0.0, 0.0, 0.0)
    return (float(values.mean()), float(values.max()), float(values.var()))


def aggregate_velocity(observations: Iterable[VelocityObservation]) -> tuple[float, float, float]:
    """Pooled mean, max and population variance; zeros when no observations."""
    values = np.array([obs.velocity for obs in observations], dtype=float)
    return _stats3(values)


def aggregate_overlap(observations: Iterable[OverlapObservation]) -> tuple[float, float]:
    """Mean and population variance of per-frame counts; zeros when empty."""
    counts = np.array([obs.count for obs in observations], dtype=float)
    if counts.size == 0:
        return (0.0, 0.0)
    return (float(counts.mean()), float(counts.var()))


def _scaled(arr: np.ndarray, factor: float) -> np.ndarray:
    out = arr.copy()
    out[:, :, :2] *= factor
    return out


def extract_features(
    seq: VideoPoseSequence,
    enable_velocity: bool = True,
    enable_overlap: bool = True,
    *,
    joints: Optional[Sequence[JointSpec]] = None,
    confidence_floor: float = 0.0,
    normalize_diagonal: Optional[float] = None,
    per_frame_velocity_mean: bool = False,
) -> FeatureVector:
    """Reduce a whole video to the five-value descriptor.

    A disabled group leaves zeros in its slots and is recorded on the
    result, so downstream consumers can train on the enabled sub-vector
    alone. ``normalize_diagonal`` divides all coordinates by the given
    length (e.g. the frame diagonal) before measuring, for cross-resolution
    comparisons. ``per_frame_velocity_mean`` switches the velocity mean and
    variance to operate over per-frame-pair means instead of the flat pool
    of observations; the default pools everything.

    Every frame contributes one overlap count, including frames with zero
    or one person, which count 0.
    """
    if not (enable_velocity or enable_overlap):
        raise ConfigError("at least one feature group must stay enabled")
    if normalize_diagonal is not None and not normalize_diagonal > 0:
        raise ConfigError("normalize_diagonal must be > 0")
    specs = selected_joints() if joints is None else tuple(joints)

    arrays = [_frame_array(frame) for frame in seq.frames]
    if normalize_diagonal is not None:
        arrays = [_scaled(arr, 1.0 / normalize_diagonal) for arr in arrays]

    mean_v = max_v = var_v = 0.0
    if enable_velocity:
        per_pair: list[list[float]] = []
        for t in range(len(arrays) - 1):
            triples = _match_velocities(arrays[t], arrays[t + 1], specs, confidence_floor)
            per_pair.append([velocity for _, _, velocity in triples])
        flat = np.array([v for pair in per_pair for v in pair], dtype=float)
        if per_frame_velocity_mean:
            frame_means = np.array([np.mean(pair) for pair in per_pair if pair], dtype=float)
            if frame_means.size:
                mean_v = float(frame_means.mean())
                var_v = float(frame_means.var())
                max_v = float(flat.max())
        else:
            mean_v, max_v, var_v = _stats3(flat)

    mean_o = var_o = 0.0
    if enable_overlap:
        counts = np.array(
            [_overlap_count(arr, specs, confidence_floor) for arr in arrays], dtype=float
        )
        if counts.size:
            mean_o = float(counts.mean())
            var_o = float(counts.var())

    return FeatureVector(
        video_id=seq.video_id,
        mean_velocity=mean_v,
        max_velocity=max_v,
        var_velocity=var_v,
        mean_overlap=mean_o,
        var_overlap=var_o,
        velocity_enabled=enable_velocity,
        overlap_enabled=enable_overlap,
    )
