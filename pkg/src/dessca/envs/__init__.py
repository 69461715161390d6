from dessca.envs.base import ActionSpace, Environment, InfeasibleInitialState, Transition
from dessca.envs.cartpole import CartPole, cp_feasible_init, cp_step
from dessca.envs.mountain_car import MountainCar, mc_feasible_init, mc_step
from dessca.envs.pmsm import (
    InfeasibleDutyCycle, Pmsm, PmsmParams, pmsm_feasible_init, pmsm_reward, pmsm_step,
)

ENVIRONMENTS = {"mountain_car": MountainCar, "cartpole": CartPole, "pmsm": Pmsm}


def make(name: str, **kwargs) -> Environment:
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}") from None
    return cls(**kwargs)
