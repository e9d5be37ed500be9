"""Shared fixture builders for the test suite."""

import json

import numpy as np

from difem import FramePoses, Keypoint, PersonPose, VideoPoseSequence

MISSING = Keypoint(0.0, 0.0, 0.0)


def person_from(points, confidence=0.9):
    """PersonPose with {index: (x, y)} detections; everything else missing."""
    keypoints = [MISSING] * 25
    for idx, pt in points.items():
        if isinstance(pt, Keypoint):
            keypoints[idx] = pt
        else:
            keypoints[idx] = Keypoint(float(pt[0]), float(pt[1]), confidence)
    return PersonPose(tuple(keypoints))


def full_person(origin=(0.0, 0.0), spacing=7.0, confidence=0.9):
    """All 25 keypoints valid, laid out on a deterministic grid."""
    ox, oy = origin
    keypoints = [
        Keypoint(ox + spacing * (k % 5), oy + spacing * (k // 5), confidence)
        for k in range(25)
    ]
    return PersonPose(tuple(keypoints))


def random_person(rng, span=200.0, missing_rate=0.15, integer_coords=False):
    keypoints = []
    for _ in range(25):
        if rng.random() < missing_rate:
            keypoints.append(MISSING)
        else:
            if integer_coords:
                x = float(rng.integers(0, int(span) + 1))
                y = float(rng.integers(0, int(span) + 1))
            else:
                x = float(rng.uniform(0.0, span))
                y = float(rng.uniform(0.0, span))
            keypoints.append(Keypoint(x, y, float(rng.uniform(0.05, 1.0))))
    return PersonPose(tuple(keypoints))


def random_frame(rng, max_persons=5, span=200.0, missing_rate=0.15,
                 frame_index=0, integer_coords=False):
    n_persons = int(rng.integers(0, max_persons + 1))
    persons = tuple(
        random_person(rng, span, missing_rate, integer_coords) for _ in range(n_persons)
    )
    return FramePoses(frame_index, persons)


def random_sequence(rng, max_persons=5, max_frames=30, span=200.0,
                    missing_rate=0.15, min_frames=0, video_id="synthetic"):
    n_frames = int(rng.integers(min_frames, max_frames + 1))
    frames = tuple(
        random_frame(rng, max_persons, span, missing_rate, frame_index=t)
        for t in range(n_frames)
    )
    return VideoPoseSequence(video_id, frames)


def shift_person(person, dx, dy):
    """Translate all valid keypoints; missing triples stay missing."""
    moved = [
        kp if kp.is_missing() else Keypoint(kp.x + dx, kp.y + dy, kp.confidence)
        for kp in person.keypoints
    ]
    return PersonPose(tuple(moved))


def shift_frame(frame, dx, dy):
    return FramePoses(frame.frame_index, tuple(shift_person(p, dx, dy) for p in frame.persons))


def blob_dataset(rng, n_rows, n_features=5, separation=6.0):
    """Two unit-variance gaussian blobs with well-separated centers."""
    half = n_rows // 2
    x0 = rng.normal(0.0, 1.0, size=(half, n_features))
    x1 = rng.normal(separation, 1.0, size=(n_rows - half, n_features))
    features = np.vstack([x0, x1])
    labels = np.array([0] * half + [1] * (n_rows - half))
    order = rng.permutation(n_rows)
    return features[order], labels[order]


def frame_doc(people_flats):
    """Frame document bytes from flat 75-number keypoint lists."""
    return json.dumps(
        {"people": [{"pose_keypoints_2d": list(flat)} for flat in people_flats]}
    ).encode("utf-8")


def flat_from_person(person):
    flat = []
    for kp in person.keypoints:
        flat.extend((kp.x, kp.y, kp.confidence))
    return flat
