"""Box bounds and the affine map between physical and normalized coordinates.

All coverage bookkeeping happens in normalized coordinates, where every
dimension spans [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoxBounds:
    """Per-dimension physical lower and upper bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same length")
        if lower.size < 1:
            raise ValueError("bounds need at least one dimension")
        if not np.all(lower < upper):
            raise ValueError("lower[i] < upper[i] must hold for all i")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, physical) -> np.ndarray:
        """Closed-box membership, vectorized over leading axes."""
        x = np.asarray(physical, dtype=float)
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)


def _check_dim(x: np.ndarray, bounds: BoxBounds) -> None:
    if x.ndim == 0 or x.shape[-1] != bounds.dim:
        raise ValueError(
            f"dimension mismatch: expected trailing dimension {bounds.dim}, got shape {x.shape}"
        )


def normalize(physical, bounds: BoxBounds) -> np.ndarray:
    """Map physical coordinates onto [-1, 1] per dimension.

    Works on a single vector of shape ``(d,)`` or a batch ``(n, d)``.
    Values outside the box map outside [-1, 1]; no clipping is applied.
    """
    x = np.asarray(physical, dtype=float)
    _check_dim(x, bounds)
    return 2.0 * (x - bounds.lower) / bounds.span - 1.0


def denormalize(coords, bounds: BoxBounds) -> np.ndarray:
    """Inverse of :func:`normalize`.

    Written as a convex combination so that the corners -1 and +1 map
    exactly onto ``lower`` and ``upper``; inputs inside [-1, 1] never land
    outside the physical box.
    """
    s = np.asarray(coords, dtype=float)
    _check_dim(s, bounds)
    x = 0.5 * ((1.0 - s) * bounds.lower + (1.0 + s) * bounds.upper)
    inside = (s >= -1.0) & (s <= 1.0)
    return np.where(inside, np.clip(x, bounds.lower, bounds.upper), x)
