"""Query-pair selection: random warm-up, then Thompson sampling with
distance-based reselection of the second candidate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .prefgp import GaussianApprox, sample_utility
from .scene import WeightGrid, w_distance


@dataclass(frozen=True)
class AcquisitionConfig:
    n_init: int = 1
    min_separation: float = 0.1
    max_reselect: int = 10

    def __post_init__(self):
        if self.n_init < 0 or self.min_separation <= 0 or self.max_reselect < 1:
            raise ValueError("invalid acquisition configuration")


def random_pair(grid: WeightGrid, rng: np.random.Generator) -> tuple[int, int]:
    """Two distinct grid indices, uniform without replacement."""
    n = len(grid)
    if n < 2:
        raise ValueError("grid needs at least two points")
    i0, i1 = rng.choice(n, size=2, replace=False)
    return int(i0), int(i1)


def thompson_pair(
    q: GaussianApprox,
    grid: WeightGrid,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
) -> tuple[int, int]:
    """Argmax of two posterior draws; the second is redrawn while the pair
    is closer than min_separation, at most max_reselect times."""
    f0 = sample_utility(q, rng)
    i0 = int(np.argmax(f0))  # ties resolve to the lowest index
    i1 = i0
    for _ in range(cfg.max_reselect + 1):
        f1 = sample_utility(q, rng)
        i1 = int(np.argmax(f1))
        if w_distance(grid.point(i0), grid.point(i1)) >= cfg.min_separation:
            break
    return i0, i1
