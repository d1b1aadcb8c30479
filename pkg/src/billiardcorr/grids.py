"""Square sampling grids shared by field and correlation grids.

A grid of ``resolution`` points per side spans ``[c - side/2, c + side/2]``
in each coordinate (end points included), so for odd ``resolution`` the
centre is a grid point.  Values are stored as ``values[j, i]`` with ``j``
indexing y and ``i`` indexing x, which is also the CSV row layout.
"""

from __future__ import annotations

import numpy as np


def check_grid(side: float, resolution: int) -> None:
    if not side > 0:
        raise ValueError("grid side must be positive")
    if int(resolution) != resolution or resolution < 2:
        raise ValueError("grid resolution must be an integer >= 2")


def grid_offsets(side: float, resolution: int) -> np.ndarray:
    """Offsets from the centre along one axis."""
    check_grid(side, resolution)
    return side * (np.arange(resolution) / (resolution - 1) - 0.5)


def grid_points(center, side: float, resolution: int) -> np.ndarray:
    """Array ``(resolution, resolution, 2)`` with ``[j, i] = (x_i, y_j)``."""
    c = np.asarray(center, dtype=float).reshape(2)
    off = grid_offsets(side, resolution)
    xs, ys = c[0] + off, c[1] + off
    xx, yy = np.meshgrid(xs, ys, indexing="xy")
    return np.stack([xx, yy], axis=-1)


def displacement_grid(side: float, resolution: int) -> np.ndarray:
    """Displacements ``r`` of a grid centred on the origin."""
    return grid_points((0.0, 0.0), side, resolution)
