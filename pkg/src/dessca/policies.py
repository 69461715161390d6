"""Fixed decision rules that stand in for learning agents.

Any object with ``name``, ``act(state)`` and ``reseed(seed)`` can drive
the harness, so an external learner plugs in the same way.
"""

from __future__ import annotations

import math

import numpy as np

from dessca.envs.base import ActionSpace, Environment
from dessca.envs.pmsm import SQRT3, Pmsm, t32

MAX_REJECTIONS = 100


class ActionSamplingStarved(RuntimeError):
    pass


class Policy:
    name = "policy"

    def act(self, state: np.ndarray):
        raise NotImplementedError

    def reseed(self, seed: int) -> None:
        """Restart the private random stream (no-op for deterministic rules)."""


class RandomPolicy(Policy):
    """Uniform actions; constrained boxes use rejection sampling."""

    name = "random"

    def __init__(self, space: ActionSpace, seed: int = 0):
        self.space = space
        self.rng = np.random.default_rng(seed)

    def reseed(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)

    def act(self, state):
        sp = self.space
        if sp.kind == "discrete":
            return sp.values[int(self.rng.integers(len(sp.values)))]
        for _ in range(MAX_REJECTIONS):
            a = np.asarray(self.rng.uniform(sp.low, sp.high))
            if sp.constraint is None or sp.constraint(state, a):
                return float(a) if a.shape == () else a
        raise ActionSamplingStarved("action space sampling starved")


def random_policy(env: Environment, seed: int = 0) -> RandomPolicy:
    return RandomPolicy(env.action_space, seed)


class MountainCarBangBang(Policy):
    """Push in the direction of motion to pump energy into the swing."""

    name = "bangbang"

    def act(self, state):
        return 1.0 if state[1] >= 0.0 else -1.0


def mc_bangbang_policy() -> MountainCarBangBang:
    return MountainCarBangBang()


class CartPoleBalance(Policy):
    name = "balance"

    def __init__(self, k_eps: float = 1.0, k_omega: float = 0.25):
        if not (math.isfinite(k_eps) and math.isfinite(k_omega)):
            raise ValueError("gains must be finite")
        self.k_eps = k_eps
        self.k_omega = k_omega

    def act(self, state):
        return 1 if self.k_eps * state[2] + self.k_omega * state[3] >= 0.0 else -1


def cp_balance_policy(k_eps: float = 1.0, k_omega: float = 0.25) -> CartPoleBalance:
    return CartPoleBalance(k_eps, k_omega)


class PmsmTracking(Policy):
    """Steady-state voltage feedforward plus proportional current feedback.

    The dq duty cycle is shrunk radially onto the inverter hexagon when it
    would violate the three-phase limit.
    """

    name = "tracking"

    def __init__(self, env: Pmsm, gain: float = 0.5):
        self.prm = env.params
        self.gain = gain

    def act(self, state):
        prm = self.prm
        i_d, i_q, omega, eps, i_d_ref, i_q_ref = state
        w = prm.p * omega
        v_d = prm.r_s * i_d_ref - w * prm.l_q * i_q_ref
        v_q = prm.r_s * i_q_ref + w * (prm.l_d * i_d_ref + prm.psi_p)
        # proportional term scaled to cancel a fraction of the error per period
        v_d += self.gain * prm.l_d / prm.tau * (i_d_ref - i_d)
        v_q += self.gain * prm.l_q / prm.tau * (i_q_ref - i_q)
        u = np.array([v_d, v_q]) / (prm.u_dc / SQRT3)
        peak = np.max(np.abs(t32(eps) @ u))
        if peak > 1.0:
            u = u / peak * (1.0 - 1e-9)
        return u


POLICIES = {
    "random": lambda env, seed: random_policy(env, seed),
    "bangbang": lambda env, seed: mc_bangbang_policy(),
    "balance": lambda env, seed: cp_balance_policy(),
    "tracking": lambda env, seed: PmsmTracking(env),
}


def make_policy(name: str, env: Environment, seed: int = 0) -> Policy:
    try:
        factory = POLICIES[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None
    return factory(env, seed)
