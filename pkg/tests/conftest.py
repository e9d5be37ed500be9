import time
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest

from difem import extract_features
from difem.features import FEATURE_NAMES
from difem.synth import FIGHT_PRESET, NONFIGHT_PRESET, generate


@pytest.fixture(scope="session")
def synthetic_benchmark():
    """200 default-preset videos (100 per class) reduced to feature rows.

    Fight rows come first (label 1), then NonFight (label 0). The build time
    is recorded so end-to-end runtime budgets can include it.
    """
    start = time.monotonic()
    rows, labels = [], []
    for i in range(100):
        seq = generate(replace(FIGHT_PRESET, seed=5000 + i))
        rows.append(extract_features(seq).values())
        labels.append(1)
    for i in range(100):
        seq = generate(replace(NONFIGHT_PRESET, seed=6000 + i))
        rows.append(extract_features(seq).values())
        labels.append(0)
    return SimpleNamespace(
        matrix=np.array(rows),
        labels=np.array(labels),
        feature_names=FEATURE_NAMES,
        build_seconds=time.monotonic() - start,
    )
