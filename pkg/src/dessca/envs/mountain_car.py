"""Mountain car with a continuous drive force."""

from __future__ import annotations

import math
import warnings

import numpy as np

from dessca.envs.base import ActionSpace, Environment, Transition
from dessca.state_space import BoxBounds

P_MIN, P_MAX = -1.2, 0.6
V_MAX = 0.07
GOAL = 0.45
POWER = 1.5e-3
GRAVITY = 2.5e-3

BOUNDS = BoxBounds([P_MIN, -V_MAX], [P_MAX, V_MAX])


def mc_step(state, u: float) -> Transition:
    p, v = float(state[0]), float(state[1])
    u = float(u)
    if not -1.0 <= u <= 1.0:
        warnings.warn(f"mountain car action {u} clamped to [-1, 1]", stacklevel=2)
        u = min(max(u, -1.0), 1.0)
    # inelastic wall at the left end
    if p <= P_MIN and v < 0.0:
        v_next = 0.0
    else:
        v_next = v + POWER * u - GRAVITY * math.cos(3.0 * p)
    v_next = min(max(v_next, -V_MAX), V_MAX)
    p_next = min(max(p + v_next, P_MIN), P_MAX)
    done = p > GOAL
    reward = 100.0 if done else -0.1 * u * u
    return Transition(np.array([p_next, v_next]), reward, done)


def mc_feasible_init(x) -> np.ndarray:
    return BOUNDS.contains(np.atleast_2d(x))


class MountainCar(Environment):
    name = "mountain_car"
    bounds = BOUNDS
    action_space = ActionSpace.box(-1.0, 1.0)
    r_max = 100.0
    state_names = ("p", "v")
    action_names = ("u",)

    def feasible_init(self, x):
        return mc_feasible_init(x)

    def transition(self, state, action):
        return mc_step(state, action)
