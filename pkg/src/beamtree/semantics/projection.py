"""Anchor-table 2D projection.

A pre-fitted projection is shipped as anchors (vector, coords) rather than
as model weights; out-of-sample points are placed by inverse-distance
weighting over the nearest anchors.  Exact anchor hits map to their stored
coordinates, and every output lies in the convex hull of the chosen
neighbors, clamped to the unit square.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatchError, FixtureFormatError, InvalidParameterError

ANCHORS_FORMAT = "beamtree.anchors"
ANCHORS_VERSION = 1


@dataclass
class ProjectionAnchors:
    vectors: np.ndarray  # (n, dim)
    coords: np.ndarray  # (n, 2) in [0,1]^2
    neighbor_count: int = 5

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.vectors.ndim != 2 or len(self.vectors) < 3:
            raise InvalidParameterError("need at least 3 anchors")
        if self.coords.shape != (len(self.vectors), 2):
            raise InvalidParameterError("coords must be (n, 2)")
        if self.coords.min() < 0.0 or self.coords.max() > 1.0:
            raise InvalidParameterError("anchor coords must lie in the unit square")
        if self.neighbor_count < 1:
            raise InvalidParameterError("neighbor_count must be >= 1")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def project(vector, anchors: ProjectionAnchors) -> tuple[float, float]:
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (anchors.dim,):
        raise DimensionMismatchError(
            f"query has dimension {v.shape}, anchors expect {anchors.dim}"
        )
    d2 = np.einsum("ij,ij->i", anchors.vectors - v, anchors.vectors - v)
    k = min(anchors.neighbor_count, len(d2))
    # argsort (not argpartition) so distance ties break by anchor index
    nearest = np.argsort(d2, kind="stable")[:k]
    if d2[nearest[0]] == 0.0:
        x, y = anchors.coords[nearest[0]]
        return float(x), float(y)
    weights = 1.0 / d2[nearest]
    point = weights @ anchors.coords[nearest] / weights.sum()
    return float(min(max(point[0], 0.0), 1.0)), float(min(max(point[1], 0.0), 1.0))


def save_anchors(anchors: ProjectionAnchors) -> str:
    """Text table: header line, then one `v... x y` row per anchor."""
    lines = [
        f"{ANCHORS_FORMAT} {ANCHORS_VERSION} dim={anchors.dim} "
        f"count={len(anchors.vectors)} neighbors={anchors.neighbor_count}"
    ]
    for vec, (x, y) in zip(anchors.vectors, anchors.coords):
        lines.append(
            " ".join(repr(float(c)) for c in vec) + f" {float(x)!r} {float(y)!r}"
        )
    return "\n".join(lines) + "\n"


def load_anchors(text: str) -> ProjectionAnchors:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FixtureFormatError("empty anchors file")
    header = lines[0].split()
    if len(header) < 5 or header[0] != ANCHORS_FORMAT:
        raise FixtureFormatError("not an anchors file")
    if int(header[1]) != ANCHORS_VERSION:
        raise FixtureFormatError(f"unsupported anchors version {header[1]}")
    try:
        fields = {k: v for k, v in (h.split("=") for h in header[2:])}
        dim = int(fields["dim"])
        count = int(fields["count"])
        neighbors = int(fields["neighbors"])
    except (KeyError, ValueError) as exc:
        raise FixtureFormatError(f"bad anchors header: {exc}") from exc
    if len(lines) - 1 != count:
        raise FixtureFormatError(f"expected {count} anchor rows, got {len(lines) - 1}")
    vectors, coords = [], []
    for ln in lines[1:]:
        parts = [float(tok) for tok in ln.split()]
        if len(parts) != dim + 2:
            raise FixtureFormatError("anchor row width mismatch")
        vectors.append(parts[:dim])
        coords.append(parts[dim:])
    return ProjectionAnchors(np.array(vectors), np.array(coords), neighbors)
