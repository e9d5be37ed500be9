"""Dataset plumbing: video directories, manifests, and the feature cache.

A corpus is one directory per video holding per-frame keypoint JSON files
named ``<anything>_<digits>_keypoints.json`` (the numeric run is the frame
index), bound to class labels by a manifest CSV with header
``video_dir,label``. Extracted features are cached as CSV with columns
``video_id,label`` followed by the enabled feature columns, numeric cells
printed with 9 significant digits.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .classifiers import Dataset
from .errors import ConfigError, DimensionError, SchemaError
from .features import FEATURE_NAMES, OVERLAP_FEATURES, VELOCITY_FEATURES
from .pose import CLASS_LABELS, VideoPoseSequence, load_sequence

LABEL_TO_INT = {CLASS_LABELS[0]: 0, CLASS_LABELS[1]: 1}
INT_TO_LABEL = {v: k for k, v in LABEL_TO_INT.items()}

MANIFEST_HEADER = ("video_dir", "label")
FRAME_FILE_RE = re.compile(r"(?:^|_)(\d+)_keypoints\.json$")


def frame_index_of(filename: str) -> Optional[int]:
    """Frame index encoded in a keypoint file name, or None if not a frame file."""
    match = FRAME_FILE_RE.search(filename)
    return int(match.group(1)) if match else None


def load_video_dir(video_dir, video_id: Optional[str] = None, label: Optional[str] = None) -> VideoPoseSequence:
    """Load every frame file in a video directory, ordered by frame index."""
    directory = Path(video_dir)
    if not directory.is_dir():
        raise ConfigError(f"not a video directory: {directory}")
    sources = []
    for path in sorted(directory.iterdir()):
        idx = frame_index_of(path.name)
        if idx is not None:
            sources.append((idx, path.read_bytes()))
    return load_sequence(sources, video_id or directory.name, label)


def read_manifest(path) -> list[tuple[Path, str]]:
    """(video_dir, label) pairs; relative dirs resolve against the manifest."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(cell.strip() for cell in rows[0]) != MANIFEST_HEADER:
        raise SchemaError(f'manifest must start with header "{",".join(MANIFEST_HEADER)}"')
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise SchemaError(f"manifest line {lineno}: expected 2 columns, got {len(row)}")
        rel, label = row[0].strip(), row[1].strip()
        if label not in CLASS_LABELS:
            raise SchemaError(f"manifest line {lineno}: unknown label {label!r}")
        video_dir = Path(rel)
        if not video_dir.is_absolute():
            video_dir = path.parent / video_dir
        out.append((video_dir, label))
    return out


def write_manifest(path, rows: Iterable[tuple[str, str]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        writer.writerows(rows)
    return path


def write_feature_cache(path, entries: Iterable[tuple[str, str, Sequence[float]]],
                        feature_names: Sequence[str]) -> Path:
    """One row per video: (video_id, label, values aligned with feature_names)."""
    path = Path(path)
    names = tuple(feature_names)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("video_id", "label") + names)
        for video_id, label, values in entries:
            if len(values) != len(names):
                raise ConfigError(
                    f"feature row for {video_id!r} has {len(values)} values, expected {len(names)}"
                )
            writer.writerow((video_id, label) + tuple(f"{v:.9g}" for v in values))
    return path


@dataclass(frozen=True)
class FeatureTable:
    """Parsed feature cache: ids, string labels, and the numeric matrix."""

    video_ids: tuple[str, ...]
    labels: tuple[str, ...]
    values: np.ndarray
    feature_names: tuple[str, ...]

    def label_ints(self) -> np.ndarray:
        return np.array([LABEL_TO_INT[label] for label in self.labels], dtype=int)

    def select(self, names: Sequence[str]) -> np.ndarray:
        """Columns in the given order; DimensionError on a missing column."""
        indices = []
        for name in names:
            if name not in self.feature_names:
                raise DimensionError(
                    f"feature column {name!r} not in cache (has {list(self.feature_names)})"
                )
            indices.append(self.feature_names.index(name))
        return self.values[:, indices]

    def to_dataset(self, feature_names: Optional[Sequence[str]] = None,
                   use_velocity: bool = True, use_overlap: bool = True) -> Dataset:
        """Dataset over an explicit column list, or over the enabled groups."""
        if feature_names is None:
            feature_names = tuple(
                name for name in self.feature_names
                if (name in VELOCITY_FEATURES and use_velocity)
                or (name in OVERLAP_FEATURES and use_overlap)
            )
            if not feature_names:
                raise ConfigError("no feature columns left after applying the group toggles")
        return Dataset(self.select(feature_names), self.label_ints(), tuple(feature_names))


def read_feature_cache(path) -> FeatureTable:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError("feature cache is empty; expected at least a header row")
    header = tuple(cell.strip() for cell in rows[0])
    if header[:2] != ("video_id", "label"):
        raise SchemaError('feature cache header must start with "video_id,label"')
    names = header[2:]
    canonical = tuple(n for n in FEATURE_NAMES if n in names)
    if not names or names != canonical or len(set(names)) != len(names):
        raise SchemaError(
            f"feature columns must be a subset of {list(FEATURE_NAMES)} in canonical order, got {list(names)}"
        )
    video_ids, labels, matrix = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2 + len(names):
            raise SchemaError(f"feature cache line {lineno}: expected {2 + len(names)} columns")
        video_id, label = row[0], row[1].strip()
        if label not in CLASS_LABELS:
            raise SchemaError(f"feature cache line {lineno}: unknown label {label!r}")
        try:
            matrix.append([float(cell) for cell in row[2:]])
        except ValueError as exc:
            raise SchemaError(f"feature cache line {lineno}: non-numeric value ({exc})") from exc
        video_ids.append(video_id)
        labels.append(label)
    values = np.array(matrix, dtype=float) if matrix else np.zeros((0, len(names)))
    return FeatureTable(tuple(video_ids), tuple(labels), values, names)
