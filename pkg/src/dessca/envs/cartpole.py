"""Cart-pole balancing with a two-valued drive force."""

from __future__ import annotations

import math

import numpy as np

from dessca.envs.base import ActionSpace, Environment, Transition
from dessca.state_space import BoxBounds

TAU = 0.02
BOUNDS = BoxBounds([-1.0, -7.0, -math.pi, -10.0], [1.0, 7.0, math.pi, 10.0])


def wrap_angle(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def cp_step(state, u) -> Transition:
    """One explicit-Euler step.

    The in-bounds reward uses the pole angle before the update; leaving the
    box is judged on the successor state.
    """
    if u not in (-1, 1):
        raise ValueError(f"cartpole action must be -1 or +1, got {u!r}")
    p, v, eps, omega = (float(s) for s in state)
    sin_e, cos_e = math.sin(eps), math.cos(eps)
    b = (10.0 * u + omega * omega * sin_e) / 22.0
    alpha = (10.0 * sin_e - b * cos_e) / (2.0 / 3.0 - cos_e * cos_e / 22.0)
    a = b - alpha * cos_e / 22.0
    nxt = np.array([
        p + TAU * v,
        v + TAU * a,
        wrap_angle(eps + TAU * omega),
        omega + TAU * alpha,
    ])
    out = not bool(BOUNDS.contains(nxt))
    reward = -1.0 if out else 1.0 - abs(eps / math.pi)
    return Transition(nxt, reward, out)


def cp_feasible_init(x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, float))
    p, v, omega = x[:, 0], x[:, 1], x[:, 3]
    with np.errstate(invalid="ignore"):
        fwd = np.sqrt(7.5 * (1.0 - p))
        back = np.sqrt(7.5 * (1.0 + p))
    ok = BOUNDS.contains(x) & (np.abs(omega) <= 1.0)
    ok &= ~(v > 0) | (v < fwd)
    ok &= ~(v < 0) | (v > -back)
    return ok


class CartPole(Environment):
    name = "cartpole"
    bounds = BOUNDS
    action_space = ActionSpace.discrete((-1, 1))
    r_max = 1.0
    state_names = ("p", "v", "eps", "omega")
    action_names = ("u",)

    def feasible_init(self, x):
        return cp_feasible_init(x)

    def transition(self, state, action):
        return cp_step(state, action)
