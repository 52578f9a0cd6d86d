"""Keyed random streams so that draws do not depend on generation order."""
from __future__ import annotations

import numpy as np


def keyed_rng(seed: int, stream: int, k: int) -> np.random.Generator:
    """Generator fully determined by ``(seed, stream, k)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream), int(k)])))
