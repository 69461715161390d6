"""Coverage density estimate of visited states.

The estimator keeps the visited states in a FIFO ring buffer and evaluates
an isotropic product-Gaussian kernel density estimate over them.
"""

from __future__ import annotations

import math

import numpy as np

KERNELS = ("gaussian",)
BOUNDARIES = ("none", "reflect")

# max elements of a (queries, buffer, dim) difference block held at once
_BLOCK_ELEMENTS = 1 << 22


class EmptyBufferError(RuntimeError):
    """Raised when a density is requested before any state was observed."""


class CoverageEstimator:
    """Kernel density estimate over a bounded buffer of visited states.

    Parameters
    ----------
    dim : int
        Dimension of the (normalized) state vectors.
    bandwidth : float
        Isotropic kernel bandwidth in normalized coordinates.
    capacity : int or None
        Maximum number of stored states; the oldest states are evicted
        first. ``None`` means unbounded.
    kernel : str
        Kernel identifier. Only ``"gaussian"`` is implemented.
    boundary : str
        ``"none"`` evaluates the plain estimate on all of R^d, so kernel mass
        leaks out of the box. ``"reflect"`` mirrors every sample at both faces
        of each dimension, which keeps all mass inside [-1, 1]^d; the
        density is zero outside the box in that mode.
    """

    def __init__(self, dim: int, bandwidth: float = 0.1, capacity: int | None = None,
                 kernel: str = "gaussian", boundary: str = "none"):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if not bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be a positive integer or None")
        if kernel not in KERNELS:
            raise ValueError(f"unsupported kernel {kernel!r}; choose from {KERNELS}")
        if boundary not in BOUNDARIES:
            raise ValueError(f"unsupported boundary mode {boundary!r}; choose from {BOUNDARIES}")
        self.boundary = boundary
        self.dim = int(dim)
        self.bandwidth = float(bandwidth)
        self.capacity = capacity
        self.kernel = kernel
        initial = capacity if capacity is not None else 256
        self._data = np.empty((initial, self.dim))
        self._size = 0
        self._head = 0  # slot of the oldest entry (ring mode only)

    def __len__(self) -> int:
        return self._size

    @property
    def buffer(self) -> np.ndarray:
        """Stored states in chronological order (oldest first), as a copy."""
        if self.capacity is None or self._size < self.capacity:
            return self._data[: self._size].copy()
        return np.roll(self._data, -self._head, axis=0)

    def observe(self, states) -> None:
        """Append states in order, evicting the oldest beyond capacity."""
        x = np.asarray(states, dtype=float)
        if x.size == 0:
            return
        x = np.atleast_2d(x)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: expected (n, {self.dim}), got {x.shape}")
        if self.capacity is None:
            self._append_unbounded(x)
        else:
            self._append_ring(x)

    def _append_unbounded(self, x: np.ndarray) -> None:
        need = self._size + len(x)
        if need > len(self._data):
            grown = np.empty((max(need, 2 * len(self._data)), self.dim))
            grown[: self._size] = self._data[: self._size]
            self._data = grown
        self._data[self._size:need] = x
        self._size = need

    def _append_ring(self, x: np.ndarray) -> None:
        cap = self.capacity
        if len(x) >= cap:
            self._data[:] = x[-cap:]
            self._head = 0
            self._size = cap
            return
        if self._size < cap:
            # not yet wrapped: oldest entry is slot 0
            free = cap - self._size
            take = min(free, len(x))
            self._data[self._size:self._size + take] = x[:take]
            self._size += take
            x = x[take:]
            if len(x) == 0:
                return
        # full ring: overwrite from head, advancing it
        idx = (self._head + np.arange(len(x))) % cap
        self._data[idx] = x
        self._head = (self._head + len(x)) % cap

    def density(self, x) -> float | np.ndarray:
        """Evaluate the coverage density at one point or a batch of points.

        Returns a float for input of shape ``(d,)`` and an array of shape
        ``(m,)`` for input of shape ``(m, d)``.
        """
        if self._size == 0:
            raise EmptyBufferError("no coverage information: the state buffer is empty")
        q = np.asarray(x, dtype=float)
        single = q.ndim == 1
        q = np.atleast_2d(q)
        if q.ndim != 2 or q.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: expected trailing dimension {self.dim}")
        data = self._data[: self._size]
        n, d, b = self._size, self.dim, self.bandwidth
        norm = 1.0 / (n * b**d * (2.0 * math.pi) ** (d / 2.0))
        out = np.empty(len(q))
        step = max(1, _BLOCK_ELEMENTS // (n * d))
        for start in range(0, len(q), step):
            block = q[start:start + step]
            z = (block[:, None, :] - data[None, :, :]) / b
            if self.boundary == "none":
                k = np.exp(-0.5 * np.einsum("mnd,mnd->mn", z, z))
            else:
                # images at -2 - x_i and 2 - x_i factorize per dimension
                w = (block[:, None, :] + data[None, :, :]) / b
                shift = 2.0 / b
                k = (np.exp(-0.5 * z * z) + np.exp(-0.5 * (w + shift) ** 2)
                     + np.exp(-0.5 * (w - shift) ** 2)).prod(axis=2)
            out[start:start + step] = k.sum(axis=1)
        out *= norm
        if self.boundary == "reflect":
            out[~np.all(np.abs(q) <= 1.0, axis=1)] = 0.0
        return float(out[0]) if single else out
