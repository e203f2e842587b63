"""Synthetic datasets for order-sensitivity experiments.

The reversal task pairs each sample with its mirror: class "fwd" sequences
take a random bag of planar increments sorted by angle (a left-turning,
convex polyline), class "rev" walks the same bag in reversed order.  Both
classes share start point, end point, and increment multiset, so any kernel
that sees only endpoint or bag statistics is blind to the labels; telling
them apart requires genuine order information.
"""

from __future__ import annotations

import numpy as np

from .harness import Dataset
from .sequences import Sequence


def make_order_task(
    n_samples: int = 200,
    n_steps: int = 10,
    seed: int = 0,
    scale: float = 0.25,
) -> Dataset:
    """Two-class dataset of n_samples planar sequences (n_samples even)."""
    if n_samples % 2 != 0:
        raise ValueError("n_samples must be even (samples come in mirror pairs)")
    rng = np.random.default_rng(seed)
    samples = []
    for pair in range(n_samples // 2):
        angles = np.sort(rng.uniform(0.05, np.pi / 2 - 0.05, size=n_steps))
        radii = rng.uniform(0.5, 1.5, size=n_steps) * scale
        incs = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
        fwd = np.vstack([np.zeros(2), np.cumsum(incs, axis=0)])
        rev = np.vstack([np.zeros(2), np.cumsum(incs[::-1], axis=0)])
        samples.append((f"fwd{pair}", "fwd", Sequence(fwd)))
        samples.append((f"rev{pair}", "rev", Sequence(rev)))
    return Dataset(samples)
