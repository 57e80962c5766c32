"""Exact Euclidean nearest-neighbor lookup.

Small collections only (hundreds of subdomain and candidate vectors), so
a vectorized linear scan is both exact and fast enough.  Ties break on
insertion index, which keeps results deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError, InvalidParameterError


@dataclass
class NNIndex:
    vectors: np.ndarray
    labels: tuple[str, ...] | None = None

    @property
    def size(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def nn_index(vectors, labels: list[str] | None = None) -> NNIndex:
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InvalidParameterError("index needs a non-empty 2-d vector array")
    if labels is not None:
        if len(labels) != arr.shape[0]:
            raise InvalidParameterError("one label per vector required")
        return NNIndex(vectors=arr, labels=tuple(labels))
    return NNIndex(vectors=arr)


def nn_query(index: NNIndex, vector, m: int) -> list[int]:
    """Indices of the m nearest stored vectors, nearest first.

    A query equal to a stored vector returns that vector first.  m is
    clamped to the index size.
    """
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    q = np.asarray(vector, dtype=np.float64)
    if q.shape != (index.dim,):
        raise DimensionMismatchError(
            f"query has dim {q.shape}, index has dim {index.dim}"
        )
    diff = index.vectors - q
    dists = np.einsum("ij,ij->i", diff, diff)
    order = np.argsort(dists, kind="stable")
    return [int(i) for i in order[: min(m, index.size)]]


def nn_query_labels(index: NNIndex, vector, m: int) -> list[str]:
    if index.labels is None:
        raise InvalidParameterError("index was built without labels")
    return [index.labels[i] for i in nn_query(index, vector, m)]
