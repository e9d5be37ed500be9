"""Deterministic synthetic pose sequences for pipeline tests and demos.

Skeletons use fixed body proportions scaled by ``body_height``. Every
source of per-frame displacement (limb swing, walking sway, mutual
approach, jitter) scales linearly with ``velocity_scale``, so a zero scale
yields perfectly static persons. ``proximity_scale`` steers closeness:
confrontation sequences converge until roughly that fraction of a body
width separates the persons, while calm sequences keep about two body
widths apart, with an occasional closer pass (rate ``CLOSE_PASS_RATE``)
that mimics benign occlusion. Joints drop out at ``joint_drop_rate`` to
exercise missing-keypoint handling; one drop mask per frame applies to all
persons, so a dropped joint type vanishes entirely instead of teleporting
the nearest-type match onto another person. Generation is a pure function
of the parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .data import write_manifest
from .errors import ConfigError
from .pose import CLASS_LABELS, FramePoses, Keypoint, PersonPose, VideoPoseSequence, serialize_frame


@dataclass(frozen=True)
class SynthParams:
    class_tag: str
    velocity_scale: float
    proximity_scale: float
    n_persons: int = 2
    n_frames: int = 60
    frame_size: tuple[int, int] = (640, 480)
    seed: int = 0
    joint_drop_rate: float = 0.05
    body_height: float = 180.0


FIGHT_PRESET = SynthParams(class_tag="Fight", velocity_scale=16.0, proximity_scale=0.8)
NONFIGHT_PRESET = SynthParams(class_tag="NonFight", velocity_scale=2.0, proximity_scale=0.2)

# Swing phase advance per frame: confrontations flail fast, walks sway slowly.
FIGHT_SWING_RATE = 0.9
WALK_SWING_RATE = 0.35
# Fraction of calm pairs that drift close enough for incidental overlap.
CLOSE_PASS_RATE = 0.15

BODY_WIDTH_RATIO = 0.54

# (dx, dy) offsets from the mid-hip in units of body height, y growing down.
# Order follows the 25-point body layout.
_TEMPLATE = np.array([
    (0.00, -0.56),   # 0  nose
    (0.00, -0.45),   # 1  neck
    (-0.16, -0.42),  # 2  right shoulder
    (-0.23, -0.24),  # 3  right elbow
    (-0.27, -0.05),  # 4  right wrist
    (0.16, -0.42),   # 5  left shoulder
    (0.23, -0.24),   # 6  left elbow
    (0.27, -0.05),   # 7  left wrist
    (0.00, 0.00),    # 8  mid hip
    (-0.09, 0.00),   # 9  right hip
    (-0.10, 0.24),   # 10 right knee
    (-0.11, 0.47),   # 11 right ankle
    (0.09, 0.00),    # 12 left hip
    (0.10, 0.24),    # 13 left knee
    (0.11, 0.47),    # 14 left ankle
    (-0.03, -0.59),  # 15 right eye
    (0.03, -0.59),   # 16 left eye
    (-0.06, -0.57),  # 17 right ear
    (0.06, -0.57),   # 18 left ear
    (0.13, 0.52),    # 19 left big toe
    (0.15, 0.52),    # 20 left small toe
    (0.11, 0.50),    # 21 left heel
    (-0.13, 0.52),   # 22 right big toe
    (-0.15, 0.52),   # 23 right small toe
    (-0.11, 0.50),   # 24 right heel
])

# Swing group per keypoint: 0/1 arms, 2/3 legs, 4 head and trunk.
_GROUP_OF = np.array([4, 4, 0, 0, 0, 1, 1, 1, 4, 2, 2, 2, 3, 3, 3, 4, 4, 4, 4, 3, 3, 3, 2, 2, 2])

# Relative swing amplitude per keypoint (wrists largest, trunk nearly still).
_SWING_AMPLITUDE = np.array([
    0.12, 0.10, 0.25, 0.60, 1.00, 0.25, 0.60, 1.00, 0.08, 0.08, 0.45, 0.35,
    0.08, 0.45, 0.35, 0.12, 0.12, 0.12, 0.12, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35,
])


def _validate(params: SynthParams) -> None:
    if params.class_tag not in CLASS_LABELS:
        raise ConfigError(f"class_tag must be one of {CLASS_LABELS}, got {params.class_tag!r}")
    if params.n_persons < 1:
        raise ConfigError("n_persons must be >= 1")
    if params.n_frames < 2:
        raise ConfigError("n_frames must be >= 2")
    width, height = params.frame_size
    if width <= 0 or height <= 0:
        raise ConfigError("frame_size must be positive")
    if params.velocity_scale < 0:
        raise ConfigError("velocity_scale must be >= 0")
    if not 0.0 <= params.proximity_scale <= 1.0:
        raise ConfigError("proximity_scale must lie in [0, 1]")
    if not 0.0 <= params.joint_drop_rate < 1.0:
        raise ConfigError("joint_drop_rate must lie in [0, 1)")
    if params.body_height <= 0:
        raise ConfigError("body_height must be > 0")
    if params.seed < 0:
        raise ConfigError("seed must be >= 0")


def generate(params: SynthParams, video_id: Optional[str] = None) -> VideoPoseSequence:
    """One synthetic video as a pose sequence, deterministic in the seed."""
    _validate(params)
    rng = np.random.default_rng(params.seed)
    width, height = float(params.frame_size[0]), float(params.frame_size[1])
    body_height = params.body_height
    body_width = BODY_WIDTH_RATIO * body_height
    fight = params.class_tag == CLASS_LABELS[1]
    omega = FIGHT_SWING_RATE if fight else WALK_SWING_RATE
    n = params.n_persons

    # Per-person setup draws, in fixed order.
    v_eff = params.velocity_scale * rng.uniform(0.8, 1.25, size=n)
    swing_phase = rng.uniform(0.0, 2.0 * math.pi, size=(n, 5))
    swing_angle = rng.uniform(0.0, 2.0 * math.pi, size=(n, 5))
    swing_dir = np.stack([np.cos(swing_angle), np.sin(swing_angle)], axis=-1)
    amplitude = v_eff / omega

    base_y = height * 0.62
    if fight:
        center_x = width * 0.5 + rng.uniform(-0.05, 0.05) * width
        angles = 2.0 * math.pi * np.arange(n) / n
        radius_start = 1.35 * body_width
        radius_end = 0.5 * params.proximity_scale * body_width
        approach = 0.30 * v_eff
    else:
        gaps = np.zeros(n)
        for p in range(1, n):
            factor = rng.uniform(0.5, 0.7) if rng.random() < CLOSE_PASS_RATE else rng.uniform(0.9, 1.3)
            gaps[p] = (2.0 - params.proximity_scale) * body_width * factor
        home_x = np.cumsum(gaps)
        home_x += width * 0.5 - home_x.mean()
        sway_phase = rng.uniform(0.0, 2.0 * math.pi, size=(n, 2))

    frames = []
    for t in range(params.n_frames):
        dropped = rng.random(25) < params.joint_drop_rate
        persons = []
        for p in range(n):
            if fight:
                radius = max(radius_end, radius_start - approach[p] * t)
                base = np.array([
                    center_x + radius * math.cos(angles[p]),
                    base_y + 0.2 * radius * math.sin(angles[p]),
                ])
                base = base + rng.normal(0.0, 0.08 * v_eff[p], size=2)
            else:
                base = np.array([
                    home_x[p] + amplitude[p] * math.sin(omega * t + sway_phase[p, 0]),
                    base_y + 0.25 * amplitude[p] * math.sin(0.5 * omega * t + sway_phase[p, 1]),
                ])
                base = base + rng.normal(0.0, 0.04 * v_eff[p], size=2)

            swing = np.zeros((25, 2))
            for g in range(5):
                magnitude = amplitude[p] * math.sin(omega * t + swing_phase[p, g])
                members = _GROUP_OF == g
                swing[members] = np.outer(_SWING_AMPLITUDE[members], magnitude * swing_dir[p, g])

            coords = base + _TEMPLATE * body_height + swing
            coords += rng.normal(0.0, 0.05 * v_eff[p], size=(25, 2))
            coords[:, 0] = np.clip(coords[:, 0], 0.0, width)
            coords[:, 1] = np.clip(coords[:, 1], 0.0, height)

            confidence = rng.uniform(0.55, 1.0, size=25)
            keypoints = tuple(
                Keypoint(0.0, 0.0, 0.0) if dropped[k]
                else Keypoint(float(coords[k, 0]), float(coords[k, 1]), float(confidence[k]))
                for k in range(25)
            )
            persons.append(PersonPose(keypoints))
        frames.append(FramePoses(frame_index=t, persons=tuple(persons)))

    if video_id is None:
        video_id = f"{params.class_tag.lower()}-{params.seed:08d}"
    return VideoPoseSequence(video_id=video_id, frames=tuple(frames), label=params.class_tag)


def corpus_params(
    videos_per_class: int,
    base_seed: int = 0,
    fight: SynthParams = FIGHT_PRESET,
    nonfight: SynthParams = NONFIGHT_PRESET,
) -> list[tuple[str, SynthParams]]:
    """(video_id, params) pairs: fights first, seeds counting up from base_seed."""
    if videos_per_class < 1:
        raise ConfigError("videos_per_class must be >= 1")
    named = []
    for i in range(videos_per_class):
        named.append((f"fight_{i:04d}", replace(fight, seed=base_seed + i)))
    for i in range(videos_per_class):
        named.append((f"nonfight_{i:04d}", replace(nonfight, seed=base_seed + videos_per_class + i)))
    return named


def write_corpus(out_dir, named_params: Iterable[tuple[str, SynthParams]]) -> Path:
    """Emit frame files and the manifest; returns the manifest path.

    The on-disk layout matches what the loader expects: one directory per
    video with ``<video_id>_<%012d>_keypoints.json`` frame files, plus
    ``manifest.csv`` binding directories to labels.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for video_id, params in named_params:
        sequence = generate(params, video_id=video_id)
        video_dir = out_dir / video_id
        video_dir.mkdir(parents=True, exist_ok=True)
        for frame in sequence.frames:
            name = f"{video_id}_{frame.frame_index:012d}_keypoints.json"
            (video_dir / name).write_bytes(serialize_frame(frame))
        rows.append((video_id, params.class_tag))
    return write_manifest(out_dir / "manifest.csv", rows)
