"""Per-cell seeds derived from the base seed and the cell key."""
from __future__ import annotations

import numpy as np


def cell_seed(base_seed: int, *key: int) -> int:
    """64-bit seed of the experiment cell ``key`` (e.g. ``(rep, p, T)``).

    Depends on nothing but its arguments, so results never depend on the
    order or thread in which cells run.
    """
    sequence = np.random.SeedSequence([int(base_seed), *(int(k) for k in key)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
