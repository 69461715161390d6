"""Initial-state proposal by maximizing reference minus estimated coverage."""

from __future__ import annotations

import math

import numpy as np

from dessca.kde import CoverageEstimator
from dessca.pso import SwarmConfig, maximize
from dessca.reference import ReferenceDensity


class NoFeasibleProposal(RuntimeError):
    pass


class DesscaEngine:
    """Proposes episode initial states in normalized coordinates.

    Each proposal maximizes ``c*(x) - c_hat(x)`` over the box, where
    ``c*`` is the reference density and ``c_hat`` the kernel density
    estimate of the states recorded so far. With nothing recorded yet the
    proposal maximizes ``c*`` alone. Infeasible points are scored at
    ``penalty`` so that the swarm stays generic.

    Parameters
    ----------
    reference : ReferenceDensity
        Target coverage and feasibility predicate.
    bandwidth : float
        Kernel bandwidth of the coverage estimate.
    capacity : int or None
        Ring-buffer size of the visited-state memory; ``None`` is unbounded.
    swarm : SwarmConfig
        Optimizer settings. Its ``seed`` seeds a stream from which every
        proposal draws a fresh swarm seed.
    penalty : float
        Score of infeasible points; must undercut any feasible score.
    boundary : str
        Boundary handling of the coverage estimate, see
        :class:`~dessca.kde.CoverageEstimator`.
    """

    def __init__(self, reference: ReferenceDensity, bandwidth: float = 0.1,
                 capacity: int | None = None, swarm: SwarmConfig = SwarmConfig(),
                 penalty: float = -1e6, boundary: str = "none"):
        d = reference.dim
        # reflected images can at most triple the kernel per dimension
        peak = (3.0 if boundary == "reflect" else 1.0) ** d / (bandwidth**d * (2.0 * math.pi) ** (d / 2.0))
        if not penalty < -peak:
            raise ValueError(f"penalty must be below {-peak:.6g}, the lowest feasible score")
        self.reference = reference
        self.estimator = CoverageEstimator(d, bandwidth=bandwidth, capacity=capacity,
                                           boundary=boundary)
        self.swarm = swarm
        self.penalty = float(penalty)
        self._seeds = np.random.default_rng(swarm.seed)

    @property
    def dim(self) -> int:
        return self.reference.dim

    def _objective(self, x: np.ndarray) -> np.ndarray:
        ok = self.reference.is_feasible(x)
        out = np.full(len(x), self.penalty)
        if ok.any():
            score = self.reference.evaluate(x[ok])
            if len(self.estimator):
                score = score - self.estimator.density(x[ok])
            out[ok] = score
        return out

    def exploration_metric(self, x) -> float | np.ndarray:
        """``c*(x) - c_hat(x)``; may be negative. Requires recorded states."""
        return self.reference.evaluate(x) - self.estimator.density(x)

    def propose(self) -> np.ndarray:
        seed = int(self._seeds.integers(2**63))
        cfg = SwarmConfig(self.swarm.particles, self.swarm.iterations,
                          self.swarm.c1, self.swarm.c2, self.swarm.w, seed)
        x, value = maximize(self._objective, self.dim, cfg)
        if value <= self.penalty or not self.reference.is_feasible(x):
            raise NoFeasibleProposal("no feasible proposal found by the swarm")
        return x

    def record_episode(self, visited) -> None:
        """Memorize the states visited during one episode (normalized)."""
        self.estimator.observe(visited)
