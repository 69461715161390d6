"""Permanent magnet synchronous motor current control in dq coordinates.

State ``(i_d, i_q, omega_me, eps_el, i_d_ref, i_q_ref)``, action the dq
duty cycles ``(u_d, u_q)``. The speed and the references are held constant
during a step, which makes the current dynamics linear time-invariant over
one sampling period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dessca.envs.base import ActionSpace, Environment, Transition
from dessca.state_space import BoxBounds

SQRT3 = math.sqrt(3.0)
OMEGA_EPS = 1e-6
DUTY_TOL = 1e-12


class InfeasibleDutyCycle(ValueError):
    pass


@dataclass(frozen=True)
class PmsmParams:
    p: int = 3
    r_s: float = 17.932e-3
    l_d: float = 0.37e-3
    l_q: float = 1.2e-3
    psi_p: float = 65.65e-3
    i_n: float = 230.0
    i_lim: float = 270.0
    u_dc: float = 350.0
    omega_lim: float = 1256.64
    tau: float = 100e-6

    def __post_init__(self):
        for name in ("p", "r_s", "l_d", "l_q", "psi_p", "i_n", "i_lim", "u_dc", "omega_lim", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.i_n < self.i_lim:
            raise ValueError("nominal current must be below the current limit")

    @property
    def bounds(self) -> BoxBounds:
        il, wl = self.i_lim, self.omega_lim
        return BoxBounds([-il, -il, -wl, -math.pi, -il, -il], [il, il, wl, math.pi, il, il])


DEFAULT_PARAMS = PmsmParams()


def t32(eps: float) -> np.ndarray:
    """dq-to-abc duty-cycle transformation at electrical angle ``eps``."""
    ang = eps - np.array([0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0])
    return np.column_stack([np.cos(ang), -np.sin(ang)])


def duty_feasible(eps: float, u) -> bool:
    return bool(np.all(np.abs(t32(eps) @ np.asarray(u, float)) <= 1.0 + DUTY_TOL))


def current_derivative(i_d, i_q, omega, u_d, u_q, prm: PmsmParams = DEFAULT_PARAMS):
    w = prm.p * omega
    gain = prm.u_dc / SQRT3
    did = (-prm.r_s * i_d + w * prm.l_q * i_q + gain * u_d) / prm.l_d
    diq = (-prm.r_s * i_q - w * (prm.l_d * i_d + prm.psi_p) + gain * u_q) / prm.l_q
    return did, diq


def in_bounds(x, prm: PmsmParams = DEFAULT_PARAMS) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, float))
    i_s = np.hypot(x[:, 0], x[:, 1])
    return prm.bounds.contains(x) & (i_s < prm.i_lim)


def tracking_error(ref, actual, prm: PmsmParams = DEFAULT_PARAMS) -> float:
    rel = (ref - actual) / (2.0 * prm.i_lim)
    return 0.5 * (math.sqrt(abs(rel)) + rel * rel)


def pmsm_reward(x, gamma: float = 0.99, prm: PmsmParams = DEFAULT_PARAMS) -> float:
    """Reward of a state: shutdown penalty, overcurrent penalty or tracking reward.

    The overcurrent branch applies for ``i_n < i_s < i_lim``; at and above
    ``i_lim`` the state has left the box and the shutdown branch applies.
    """
    i_d, i_q, _, _, i_d_ref, i_q_ref = (float(s) for s in x)
    scale = 0.5 * (1.0 - gamma)
    if not bool(in_bounds(x, prm)[0]):
        return -1.0
    i_s = math.hypot(i_d, i_q)
    if i_s > prm.i_n:
        return scale * (1.0 - (i_s - prm.i_n) / (prm.i_lim - prm.i_n)) - scale
    e_d = tracking_error(i_d_ref, i_d, prm)
    e_q = tracking_error(i_q_ref, i_q, prm)
    return scale * (2.0 - e_d - e_q)


def pmsm_step(state, u, gamma: float = 0.99, prm: PmsmParams = DEFAULT_PARAMS,
              substeps: int = 10) -> Transition:
    """Advance one sampling period with fixed-step RK4 on the dq currents."""
    i_d, i_q, omega, eps, i_d_ref, i_q_ref = (float(s) for s in state)
    u_d, u_q = (float(a) for a in u)
    if not duty_feasible(eps, (u_d, u_q)):
        raise InfeasibleDutyCycle(f"infeasible duty cycle {(u_d, u_q)} at eps_el={eps:.6g}")
    h = prm.tau / substeps
    for _ in range(substeps):
        k1d, k1q = current_derivative(i_d, i_q, omega, u_d, u_q, prm)
        k2d, k2q = current_derivative(i_d + 0.5 * h * k1d, i_q + 0.5 * h * k1q, omega, u_d, u_q, prm)
        k3d, k3q = current_derivative(i_d + 0.5 * h * k2d, i_q + 0.5 * h * k2q, omega, u_d, u_q, prm)
        k4d, k4q = current_derivative(i_d + h * k3d, i_q + h * k3q, omega, u_d, u_q, prm)
        i_d += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        i_q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    eps_next = (eps + prm.p * omega * prm.tau + math.pi) % (2.0 * math.pi) - math.pi
    nxt = np.array([i_d, i_q, omega, eps_next, i_d_ref, i_q_ref])
    reward = pmsm_reward(nxt, gamma, prm)
    return Transition(nxt, reward, not bool(in_bounds(nxt, prm)[0]))


def q_limit(i_d, omega_abs, prm: PmsmParams = DEFAULT_PARAMS):
    """Upper q-current bound for given d-current: nominal circle and voltage ellipse."""
    circle = np.sqrt(np.maximum(prm.i_n**2 - i_d**2, 0.0))
    binding = omega_abs >= OMEGA_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        radius = prm.u_dc / (prm.l_q * SQRT3 * prm.p * omega_abs)
        ellipse = np.sqrt(np.maximum(
            radius**2 - (prm.l_d / prm.l_q) ** 2 * (i_d + prm.psi_p / prm.l_d) ** 2, 0.0))
    return np.minimum(circle, np.where(binding, ellipse, np.inf))


def d_limits(omega_abs, prm: PmsmParams = DEFAULT_PARAMS):
    binding = omega_abs >= OMEGA_EPS
    with np.errstate(divide="ignore"):
        reach = np.where(binding, prm.u_dc / (prm.l_d * SQRT3 * prm.p * omega_abs), np.inf)
    centre = -prm.psi_p / prm.l_d
    return np.maximum(-prm.i_n, centre - reach), np.minimum(prm.i_n, centre + reach)


def pmsm_feasible_init(x, prm: PmsmParams = DEFAULT_PARAMS) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, float))
    i_d, i_q, omega, eps, i_d_ref, i_q_ref = x.T
    w = np.abs(omega)
    ok = in_bounds(x, prm) & (w <= prm.omega_lim) & (np.abs(eps) <= math.pi)
    d_lo, d_hi = d_limits(w, prm)
    for d, q in ((i_d, i_q), (i_d_ref, i_q_ref)):
        q_hi = q_limit(d, w, prm)
        ok &= (d >= d_lo) & (d <= d_hi) & (q >= -q_hi) & (q <= q_hi)
    return ok


class Pmsm(Environment):
    name = "pmsm"
    state_names = ("i_d", "i_q", "omega_me", "eps_el", "i_d_ref", "i_q_ref")
    action_names = ("u_d", "u_q")

    def __init__(self, params: PmsmParams = DEFAULT_PARAMS, gamma: float = 0.99):
        super().__init__()
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        self.params = params
        self.gamma = gamma
        self.bounds = params.bounds
        self.r_max = 1.0 - gamma
        # bounding box of the inverter hexagon; the constraint does the rest
        reach = 2.0 / SQRT3
        self.action_space = ActionSpace.box(
            [-reach, -reach], [reach, reach], constraint=lambda s, a: duty_feasible(s[3], a))

    def feasible_init(self, x):
        return pmsm_feasible_init(x, self.params)

    def transition(self, state, action):
        return pmsm_step(state, action, self.gamma, self.params)

    def set_operating_point(self, omega: float, i_d_ref: float, i_q_ref: float) -> None:
        """Change speed and references in place, keeping currents and angle."""
        self.state = self.state.copy()
        self.state[2], self.state[4], self.state[5] = omega, i_d_ref, i_q_ref
