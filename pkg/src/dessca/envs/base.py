"""Common environment plumbing: action spaces, transitions, reset gate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from dessca.state_space import BoxBounds


class InfeasibleInitialState(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    next_state: np.ndarray
    reward: float
    terminated: bool


@dataclass(frozen=True)
class ActionSpace:
    """Either a continuous box (``low``/``high``) or a finite ``values`` set.

    ``constraint(state, action)`` optionally narrows a box further in a
    state-dependent way.
    """

    kind: str
    low: np.ndarray | None = None
    high: np.ndarray | None = None
    values: tuple | None = None
    constraint: Callable[[np.ndarray, Any], bool] | None = None

    @classmethod
    def box(cls, low, high, constraint=None) -> "ActionSpace":
        return cls("box", np.asarray(low, float), np.asarray(high, float), None, constraint)

    @classmethod
    def discrete(cls, values) -> "ActionSpace":
        return cls("discrete", values=tuple(values))

    @property
    def shape(self) -> tuple:
        return () if self.kind == "discrete" else self.low.shape

    def contains(self, action, state=None) -> bool:
        if self.kind == "discrete":
            return action in self.values
        a = np.asarray(action, float)
        if a.shape != self.low.shape or np.any(a < self.low) or np.any(a > self.high):
            return False
        return self.constraint is None or bool(self.constraint(state, a))


class Environment:
    """Episodic plant with physical state, box bounds and an init gate.

    Subclasses set ``name``, ``bounds``, ``action_space``, ``r_max`` and
    ``state_names``/``action_names`` and implement ``feasible_init`` and
    ``transition``.
    """

    name: str
    bounds: BoxBounds
    action_space: ActionSpace
    r_max: float
    state_names: tuple[str, ...]
    action_names: tuple[str, ...]

    def __init__(self):
        self.state = None

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def feasible_init(self, x) -> np.ndarray:
        """Vectorized over ``(n, d)`` physical states; returns bools."""
        raise NotImplementedError

    def transition(self, state: np.ndarray, action) -> Transition:
        raise NotImplementedError

    def is_feasible_init(self, x) -> bool:
        return bool(self.feasible_init(np.asarray(x, float)[None, :])[0])

    def reset_to(self, x0) -> None:
        x0 = np.array(x0, dtype=float)
        if x0.shape != (self.dim,):
            raise ValueError(f"expected a state of shape ({self.dim},), got {x0.shape}")
        if not self.is_feasible_init(x0):
            raise InfeasibleInitialState(f"{self.name}: initial state {x0} is not feasible")
        self.state = x0

    def step(self, action) -> Transition:
        if self.state is None:
            raise RuntimeError("reset_to must be called before step")
        tr = self.transition(self.state, action)
        self.state = tr.next_state
        return tr

    def sample_feasible(self, rng: np.random.Generator, n: int = 1,
                        batch: int = 256, max_rounds: int = 10_000) -> np.ndarray:
        """Uniform rejection sampling over the feasible init set (physical)."""
        out = []
        got = 0
        for _ in range(max_rounds):
            cand = rng.uniform(self.bounds.lower, self.bounds.upper, size=(batch, self.dim))
            keep = cand[self.feasible_init(cand)]
            out.append(keep)
            got += len(keep)
            if got >= n:
                return np.vstack(out)[:n]
        raise RuntimeError(f"{self.name}: rejection sampling of the init set starved")
