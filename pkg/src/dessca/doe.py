"""Environment-free use of the engine: online space-filling sampling and
density grids for inspecting the bandwidth's effect."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from dessca.engine import DesscaEngine
from dessca.kde import CoverageEstimator

# five-point sample on the normalized plane used for the bandwidth panels
FIG2_POINTS = np.array([
    [-0.40, -0.30],
    [0.35, -0.45],
    [0.00, 0.10],
    [-0.30, 0.45],
    [0.40, 0.35],
])
FIG2_BANDWIDTHS = (0.1, 0.25, 0.5)


def sample_points(engine: DesscaEngine, n: int) -> Iterator[np.ndarray]:
    """Yield ``n`` points one at a time, each recorded before the next is computed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for _ in range(n):
        x = engine.propose()
        engine.record_episode(x[None, :])
        yield x


def density_grid(points, bandwidth: float, resolution: int = 101):
    """Coverage density of ``points`` on a regular grid over [-1, 1]^2.

    Returns the two axis vectors and a ``(resolution, resolution)`` array
    indexed ``[i, j]`` for ``(axis[i], axis[j])``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError(f"density grids need 2-D points, got dimension {pts.shape[1]}")
    est = CoverageEstimator(2, bandwidth)
    est.observe(pts)
    axis = np.linspace(-1.0, 1.0, resolution)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    z = est.density(np.column_stack([gx.ravel(), gy.ravel()])).reshape(resolution, resolution)
    return axis, axis, z


def count_local_maxima(z: np.ndarray) -> int:
    """Grid cells strictly larger than all of their (up to 8) neighbours."""
    rows, cols = z.shape
    padded = np.pad(z, 1, constant_values=-np.inf)
    peak = np.ones_like(z, dtype=bool)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx or dy:
                peak &= z > padded[1 + dx:1 + dx + rows, 1 + dy:1 + dy + cols]
    return int(peak.sum())
