"""Reference (target) coverage densities over the normalized box."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# predicates and evaluators are vectorized: (n, d) array -> (n,) array
Predicate = Callable[[np.ndarray], np.ndarray]
Evaluator = Callable[[np.ndarray], np.ndarray]

MC_DRAWS = 100_000
MIN_VOLUME_FRACTION = 1e-3


class DegenerateFeasibleSet(ValueError):
    """The feasible set is too small to normalize a density over it."""


def _always(x: np.ndarray) -> np.ndarray:
    return np.ones(len(x), dtype=bool)


@dataclass(frozen=True)
class ReferenceDensity:
    """Target coverage density on [-1, 1]^d together with its support.

    ``evaluator`` is only consulted on feasible points; infeasible points
    always evaluate to zero.
    """

    dim: int
    evaluator: Evaluator
    feasible: Predicate = _always
    norm: float = 1.0
    name: str = "custom"
    uniform: bool = field(default=False)

    def is_feasible(self, x) -> bool | np.ndarray:
        q = np.asarray(x, dtype=float)
        single = q.ndim == 1
        q = np.atleast_2d(q)
        self._check(q)
        inside = np.all(np.abs(q) <= 1.0, axis=1)
        ok = inside & np.asarray(self.feasible(q), dtype=bool)
        return bool(ok[0]) if single else ok

    def evaluate(self, x) -> float | np.ndarray:
        q = np.asarray(x, dtype=float)
        single = q.ndim == 1
        q = np.atleast_2d(q)
        ok = self.is_feasible(q)
        out = np.zeros(len(q))
        if ok.any():
            out[ok] = np.asarray(self.evaluator(q[ok]), dtype=float)
        return float(out[0]) if single else out

    def sample(self, n: int, rng: np.random.Generator, max_rounds: int = 1000) -> np.ndarray:
        """Draw ``n`` points from a uniform reference by rejection sampling."""
        if not self.uniform:
            raise NotImplementedError("sampling is only provided for uniform references")
        out = np.empty((0, self.dim))
        for _ in range(max_rounds):
            cand = rng.uniform(-1.0, 1.0, size=(max(2 * (n - len(out)), 64), self.dim))
            out = np.vstack([out, cand[self.is_feasible(cand)]])
            if len(out) >= n:
                return out[:n]
        raise DegenerateFeasibleSet("rejection sampling starved")

    def _check(self, q: np.ndarray) -> None:
        if q.ndim != 2 or q.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: expected trailing dimension {self.dim}")


def uniform_box(d: int) -> ReferenceDensity:
    """Uniform density ``2**-d`` over the whole box."""
    if d < 1:
        raise ValueError("d must be >= 1")
    value = 2.0 ** -d
    return ReferenceDensity(
        dim=d,
        evaluator=lambda x: np.full(len(x), value),
        norm=2.0 ** d,
        name="uniform_box",
        uniform=True,
    )


def uniform_feasible(d: int, feasible: Predicate, seed: int = 0,
                     draws: int = MC_DRAWS) -> ReferenceDensity:
    """Uniform density over the feasible subset of the box.

    The feasible volume is estimated by Monte Carlo from ``draws`` seeded
    uniform samples, and the density is normalized over that volume.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=(draws, d))
    frac = float(np.mean(np.asarray(feasible(u), dtype=bool)))
    if frac < MIN_VOLUME_FRACTION:
        raise DegenerateFeasibleSet(
            f"degenerate feasible set: estimated volume fraction {frac:.2e} < {MIN_VOLUME_FRACTION}"
        )
    volume = 2.0 ** d * frac
    value = 1.0 / volume
    return ReferenceDensity(
        dim=d,
        evaluator=lambda x: np.full(len(x), value),
        feasible=feasible,
        norm=volume,
        name="uniform_feasible",
        uniform=True,
    )
