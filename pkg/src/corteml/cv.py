"""Cross-validation fold construction (shared leaf module).

Public surface is re-exported by `corteml.evaluate`; it lives here so
the feature-selection and grid-search code can build folds without an
import cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComputeError

Fold = tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class CvScheme:
    kind: str  # "kfold" | "loo"
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("kfold", "loo"):
            raise ComputeError(f"unknown CV scheme {self.kind!r}")
        if self.kind == "kfold" and self.k < 2:
            raise ComputeError(f"kfold needs k >= 2, got {self.k}")


def make_folds(n: int, scheme: CvScheme) -> list[Fold]:
    """(train_idx, test_idx) pairs; test folds partition range(n).

    kfold: seeded shuffle, then contiguous chunks with sizes differing
    by at most one. loo: n singleton test folds in index order.
    """
    if scheme.kind == "loo":
        if n < 2:
            raise ComputeError(f"leave-one-out needs n >= 2, got {n}")
        idx = np.arange(n)
        return [(np.delete(idx, i), np.array([i])) for i in range(n)]
    if n < scheme.k:
        raise ComputeError(f"kfold needs n >= k, got n={n}, k={scheme.k}")
    rng = np.random.default_rng(scheme.seed)
    perm = rng.permutation(n)
    chunks = np.array_split(perm, scheme.k)
    folds = []
    for i, test in enumerate(chunks):
        train = np.concatenate([c for j, c in enumerate(chunks) if j != i])
        folds.append((np.sort(train), np.sort(test)))
    return folds
