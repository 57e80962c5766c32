"""2D colormap sampling over an RGB grid.

Grid text format (UTF-8): a header line, a `H W` line, then H rows of W
`r,g,b` cells separated by spaces.  Row 0 is y = 0, column 0 is x = 0.
Sampling interpolates bilinearly; channels round half-up so results are
bit-exact across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import FixtureFormatError, InvalidParameterError

COLORMAP_FORMAT = "beamtree.colormap"
COLORMAP_VERSION = 1


@dataclass
class Colormap2D:
    grid: list[list[tuple[int, int, int]]]
    name: str

    def __post_init__(self):
        h = len(self.grid)
        if h < 2 or any(len(row) < 2 for row in self.grid):
            raise InvalidParameterError("colormap grid must be at least 2x2")
        w = len(self.grid[0])
        if any(len(row) != w for row in self.grid):
            raise InvalidParameterError("colormap rows must have equal width")


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def sample_color(coords: tuple[float, float], colormap: Colormap2D) -> tuple[int, int, int]:
    x, y = coords
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise InvalidParameterError(f"coords {coords} outside the unit square")
    grid = colormap.grid
    h, w = len(grid), len(grid[0])
    gx = x * (w - 1)
    gy = y * (h - 1)
    x0, y0 = int(gx), int(gy)
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = gx - x0, gy - y0
    out = []
    for c in range(3):
        top = grid[y0][x0][c] * (1 - fx) + grid[y0][x1][c] * fx
        bottom = grid[y1][x0][c] * (1 - fx) + grid[y1][x1][c] * fx
        out.append(_round_half_up(top * (1 - fy) + bottom * fy))
    return (out[0], out[1], out[2])


def save_colormap(colormap: Colormap2D) -> str:
    h, w = len(colormap.grid), len(colormap.grid[0])
    lines = [f"{COLORMAP_FORMAT} {COLORMAP_VERSION} {colormap.name}", f"{h} {w}"]
    for row in colormap.grid:
        lines.append(" ".join(f"{r},{g},{b}" for r, g, b in row))
    return "\n".join(lines) + "\n"


def load_colormap(text: str) -> Colormap2D:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise FixtureFormatError("colormap file too short")
    header = lines[0].split(maxsplit=2)
    if len(header) != 3 or header[0] != COLORMAP_FORMAT:
        raise FixtureFormatError("not a colormap file")
    if int(header[1]) != COLORMAP_VERSION:
        raise FixtureFormatError(f"unsupported colormap version {header[1]}")
    name = header[2]
    try:
        h, w = (int(tok) for tok in lines[1].split())
    except ValueError as exc:
        raise FixtureFormatError("bad colormap size line") from exc
    if len(lines) - 2 != h:
        raise FixtureFormatError(f"expected {h} rows, got {len(lines) - 2}")
    grid = []
    for ln in lines[2:]:
        cells = ln.split()
        if len(cells) != w:
            raise FixtureFormatError("colormap row width mismatch")
        row = []
        for cell in cells:
            try:
                r, g, b = (int(tok) for tok in cell.split(","))
            except ValueError as exc:
                raise FixtureFormatError(f"bad cell {cell!r}") from exc
            if not all(0 <= c <= 255 for c in (r, g, b)):
                raise FixtureFormatError(f"channel out of range in {cell!r}")
            row.append((r, g, b))
        grid.append(row)
    return Colormap2D(grid=grid, name=name)
