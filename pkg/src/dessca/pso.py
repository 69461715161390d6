"""Global-best particle swarm maximizer on the normalized box [-1, 1]^d."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# objectives are vectorized over particles: (n, d) -> (n,)
Objective = Callable[[np.ndarray], np.ndarray]


class ObjectiveNotFinite(ValueError):
    pass


@dataclass(frozen=True)
class SwarmConfig:
    """Swarm hyperparameters.

    ``particles`` and ``iterations`` left as ``None`` resolve to
    ``10 * d`` and ``10 * d + 5`` for a ``d``-dimensional search.
    """

    particles: int | None = None
    iterations: int | None = None
    c1: float = 2.0
    c2: float = 2.0
    w: float = 0.6
    seed: int = 0

    def resolve(self, d: int) -> "SwarmConfig":
        particles = self.particles if self.particles is not None else 10 * d
        iterations = self.iterations if self.iterations is not None else 10 * d + 5
        if particles < 1 or iterations < 1:
            raise ValueError("particles and iterations must be positive")
        return SwarmConfig(particles, iterations, self.c1, self.c2, self.w, self.seed)


def pointwise(f: Callable[[np.ndarray], float]) -> Objective:
    """Lift a function of a single state vector to a batch objective."""
    return lambda x: np.array([f(row) for row in x], dtype=float)


def _evaluate(obj: Objective, x: np.ndarray) -> np.ndarray:
    f = np.asarray(obj(x), dtype=float).reshape(-1)
    if f.shape != (len(x),):
        raise ValueError(f"objective returned shape {f.shape}, expected ({len(x)},)")
    if not np.all(np.isfinite(f)):
        raise ObjectiveNotFinite("objective not finite")
    return f


def maximize(obj: Objective, d: int, cfg: SwarmConfig = SwarmConfig(),
             on_iteration: Callable[[int, float], None] | None = None
             ) -> tuple[np.ndarray, float]:
    """Search for the maximizer of ``obj`` over [-1, 1]^d.

    Velocities are unbounded, positions are clamped to the box after every
    move. The incumbent only changes on strict improvement. The full
    iteration budget is always spent.

    Returns
    -------
    position : ndarray, shape (d,)
        Best position found.
    value : float
        ``obj`` re-evaluated at ``position``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    cfg = cfg.resolve(d)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.particles

    x = rng.uniform(-1.0, 1.0, size=(n, d))
    v = np.zeros_like(x)
    f = _evaluate(obj, x)
    pbest, pbest_f = x.copy(), f.copy()
    i = int(np.argmax(f))
    gbest, gbest_f = x[i].copy(), f[i]
    if on_iteration is not None:
        on_iteration(0, float(gbest_f))

    for it in range(1, cfg.iterations + 1):
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        v = cfg.w * v + cfg.c1 * r1 * (pbest - x) + cfg.c2 * r2 * (gbest - x)
        x = np.clip(x + v, -1.0, 1.0)
        f = _evaluate(obj, x)
        better = f > pbest_f
        pbest[better] = x[better]
        pbest_f[better] = f[better]
        i = int(np.argmax(pbest_f))
        if pbest_f[i] > gbest_f:
            gbest, gbest_f = pbest[i].copy(), pbest_f[i]
        if on_iteration is not None:
            on_iteration(it, float(gbest_f))

    value = float(_evaluate(obj, gbest[None, :])[0])
    return gbest, value
