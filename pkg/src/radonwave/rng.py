"""Reproducible counter-based random streams.

Monte Carlo estimators draw their samples in fixed-size batches, each
batch from its own Philox stream keyed by (seed, batch index).  Batch k of
a run is therefore a pure function of the seed and k: estimates are
bit-identical across reruns and independent of how batches are scheduled.
"""

from __future__ import annotations

import numpy as np

BATCH = 1 << 18  # samples per stream; kernels chunk work at this size

_MASK64 = (1 << 64) - 1


def stream(seed: int, batch_index: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, batch_index)."""
    key = np.array([seed & _MASK64, batch_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def batch_sizes(n: int, batch: int = BATCH):
    """Split n samples into deterministic batch sizes."""
    sizes = [batch] * (n // batch)
    if n % batch:
        sizes.append(n % batch)
    return sizes
