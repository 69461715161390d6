"""Episodic training campaigns, validation and evaluation statistics."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import stats

from dessca import envs
from dessca.engine import DesscaEngine
from dessca.kde import CoverageEstimator
from dessca.policies import Policy
from dessca.pso import SwarmConfig
from dessca.reference import ReferenceDensity, uniform_feasible
from dessca.state_space import denormalize, normalize

STRATEGIES = ("es", "dessca")

# per-environment defaults: total/episode training steps, validation episodes/steps,
# buffer capacity, default policy
TABLE_I = {
    "mountain_car": dict(total_steps=30_000, episode_steps=200, validation_episodes=1000,
                         validation_steps=200, capacity=None, policy="random"),
    "cartpole": dict(total_steps=100_000, episode_steps=200, validation_episodes=1000,
                     validation_steps=200, capacity=None, policy="random"),
    "pmsm": dict(total_steps=400_000, episode_steps=100, validation_episodes=1,
                 validation_steps=190_500, capacity=100_000, policy="random"),
}

PMSM_SEGMENT_STEPS = 500

# order of the independent streams spawned from one (seed, repetition) pair
STREAMS = ("es", "policy", "swarm", "reference", "validation", "validation_policy")


@dataclass
class ExperimentConfig:
    env: str = "mountain_car"
    strategy: str = "es"
    total_steps: int = 30_000
    episode_steps: int = 200
    validation_episodes: int = 1000
    validation_steps: int = 200
    bandwidth: float = 0.1
    capacity: int | None = None
    particles: int | None = None
    iterations: int | None = None
    c1: float = 2.0
    c2: float = 2.0
    w: float = 0.6
    gamma: float = 0.99
    seed: int = 0
    repetitions: int = 50
    policy: str = "random"

    @classmethod
    def for_env(cls, env: str, **overrides) -> "ExperimentConfig":
        if env not in TABLE_I:
            raise ValueError(f"unknown environment {env!r}; choose from {sorted(TABLE_I)}")
        return cls(env=env, **{**TABLE_I[env], **overrides})

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def validate(self) -> None:
        if self.env not in TABLE_I:
            raise ValueError(f"env must be one of {sorted(TABLE_I)}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        for name in ("total_steps", "episode_steps", "validation_episodes", "validation_steps",
                     "repetitions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if self.capacity is not None and self.capacity < 1:
            raise ValueError("capacity must be positive or null")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")

    def make_env(self) -> envs.Environment:
        return envs.make(self.env, gamma=self.gamma) if self.env == "pmsm" else envs.make(self.env)

    def swarm(self, seed: int) -> SwarmConfig:
        return SwarmConfig(self.particles, self.iterations, self.c1, self.c2, self.w, seed)


def derive_seeds(master: int, repetition: int) -> dict[str, int]:
    """Disjoint integer seeds for every random consumer of one repetition.

    The strategy is deliberately not mixed in, so ES and DESSCA runs of the
    same repetition share validation states and policy streams.
    """
    children = np.random.SeedSequence([master, repetition]).spawn(len(STREAMS))
    return {name: int(c.generate_state(1, np.uint64)[0]) for name, c in zip(STREAMS, children)}


@dataclass
class Episode:
    phase: str
    index: int
    init_physical: np.ndarray
    init_normalized: np.ndarray
    states: np.ndarray  # (T + 1, d) physical, initial state first
    actions: list
    rewards: np.ndarray
    cause: str  # "terminal", "truncated" or "budget"

    def __len__(self) -> int:
        return len(self.rewards)


@dataclass
class ExperimentRecord:
    config: ExperimentConfig
    repetition: int
    training: list[Episode] = field(default_factory=list)
    validation: list[Episode] = field(default_factory=list)
    r_max: float = 1.0
    buffer_size: int = 0

    @property
    def training_steps(self) -> int:
        return sum(len(e) for e in self.training)

    def visited(self, phase: str = "train", normalized: bool = True) -> np.ndarray:
        eps = self.training if phase == "train" else self.validation
        x = np.vstack([e.states for e in eps])
        return normalize(x, self.config.make_env().bounds) if normalized else x

    def validation_rewards(self) -> np.ndarray:
        return np.concatenate([e.rewards for e in self.validation])

    def normalized_return(self) -> float:
        return normalized_return(self.validation_rewards(), self.r_max)


def normalized_return(rewards, r_max: float) -> float:
    """Sum of rewards over the maximum attainable sum ``K * r_max``."""
    r = np.asarray(rewards, dtype=float).reshape(-1)
    if r.size == 0:
        raise ValueError("empty record: no rewards to normalize")
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    return float(r.sum() / (r.size * r_max))


def _rollout(env, policy: Policy, x0, steps: int, phase: str, index: int,
             budget_cut: bool = False, on_step=None) -> Episode:
    env.reset_to(x0)
    states, actions, rewards = [env.state.copy()], [], []
    cause = "budget" if budget_cut else "truncated"
    for k in range(steps):
        a = policy.act(env.state)
        tr = env.step(a)
        actions.append(a)
        rewards.append(tr.reward)
        states.append(tr.next_state.copy())
        if on_step is not None:
            on_step(k)
        if tr.terminated:
            cause = "terminal"
            break
    x0 = np.asarray(x0, float)
    return Episode(phase, index, x0, normalize(x0, env.bounds), np.array(states), actions,
                   np.array(rewards), cause)


def make_engine(cfg: ExperimentConfig, env, seeds: dict[str, int]) -> DesscaEngine:
    bounds = env.bounds

    def feasible(s):
        return env.feasible_init(denormalize(s, bounds))

    reference = uniform_feasible(env.dim, feasible, seed=seeds["reference"])
    return DesscaEngine(reference, bandwidth=cfg.bandwidth, capacity=cfg.capacity,
                        swarm=cfg.swarm(seeds["swarm"]))


def run_campaign(cfg: ExperimentConfig, policy: Policy, repetition: int = 0) -> ExperimentRecord:
    """Train for ``cfg.total_steps`` steps, then validate on a shared schedule.

    Each training episode starts from a state chosen by the strategy: ES
    draws it uniformly from the feasible init set, DESSCA asks the engine.
    Under DESSCA all visited states of an episode, the initial one
    included, are recorded into the engine afterwards.
    """
    cfg.validate()
    env = cfg.make_env()
    seeds = derive_seeds(cfg.seed, repetition)
    record = ExperimentRecord(cfg, repetition, r_max=env.r_max)
    policy.reseed(seeds["policy"])
    es_rng = np.random.default_rng(seeds["es"])
    engine = make_engine(cfg, env, seeds) if cfg.strategy == "dessca" else None

    left = cfg.total_steps
    index = 0
    while left > 0:
        try:
            if engine is None:
                x0 = env.sample_feasible(es_rng)[0]
            else:
                x0 = denormalize(engine.propose(), env.bounds)
            steps = min(cfg.episode_steps, left)
            ep = _rollout(env, policy, x0, steps, "train", index,
                          budget_cut=steps < cfg.episode_steps)
        except Exception as exc:
            raise RuntimeError(f"training episode {index} failed: {exc}") from exc
        if engine is not None:
            engine.record_episode(normalize(ep.states, env.bounds))
        record.training.append(ep)
        left -= len(ep)
        index += 1
    if engine is not None:
        record.buffer_size = len(engine.estimator)

    policy.reseed(seeds["validation_policy"])
    val_rng = np.random.default_rng(seeds["validation"])
    if cfg.env == "pmsm":
        record.validation = _validate_pmsm(cfg, env, policy, val_rng)
    else:
        for i in range(cfg.validation_episodes):
            x0 = env.sample_feasible(val_rng)[0]
            record.validation.append(_rollout(env, policy, x0, cfg.validation_steps, "valid", i))
    return record


def pmsm_schedule(env, rng: np.random.Generator, steps: int,
                  segment: int = PMSM_SEGMENT_STEPS) -> np.ndarray:
    """Feasible full states, one per ``segment`` steps of the validation episode.

    Each row supplies the operating point (speed and references) of its
    segment and the state to restart from after a shutdown inside it.
    """
    return env.sample_feasible(rng, n=math.ceil(steps / segment))


def _validate_pmsm(cfg, env, policy, rng) -> list[Episode]:
    schedule = pmsm_schedule(env, rng, cfg.validation_steps)
    env.reset_to(schedule[0])
    init = env.state.copy()
    states, actions, rewards = [init.copy()], [], []
    cause = "truncated"
    for k in range(cfg.validation_steps):
        seg = k // PMSM_SEGMENT_STEPS
        if k and k % PMSM_SEGMENT_STEPS == 0:
            op = schedule[seg]
            env.set_operating_point(op[2], op[4], op[5])
        a = policy.act(env.state)
        tr = env.step(a)
        actions.append(a)
        rewards.append(tr.reward)
        states.append(tr.next_state.copy())
        if tr.terminated:
            env.reset_to(schedule[seg])
    return [Episode("valid", 0, init, normalize(init, env.bounds), np.array(states), actions,
                    np.array(rewards), cause)]


# --- statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class RunSummary:
    median: float
    iqr: float
    mean: float
    ci_low: float
    ci_high: float
    n: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunSummary":
        missing = [f.name for f in fields(cls) if f.name not in data]
        if missing:
            raise ValueError(f"summary is missing keys {missing}")
        return cls(**{f.name: data[f.name] for f in fields(cls)})


CI_Z = 1.96


def summarize(returns) -> RunSummary:
    """Median, interquartile range, mean and normal-approximation 95% CI."""
    x = np.asarray(returns, dtype=float).reshape(-1)
    if x.size < 2:
        raise ValueError("summarize needs at least two values")
    q25, q75 = np.percentile(x, [25, 75])
    mean = float(x.mean())
    half = CI_Z * float(x.std(ddof=1)) / math.sqrt(x.size)
    return RunSummary(float(np.median(x)), float(q75 - q25), mean, mean - half, mean + half, int(x.size))


def significant(baseline: RunSummary, candidate: RunSummary) -> bool:
    """True when the candidate's CI lies strictly above the baseline's."""
    return candidate.ci_low > baseline.ci_high


def relative_median_improvement(baseline: RunSummary, candidate: RunSummary) -> float:
    """Median ratio minus one, in percent."""
    return (candidate.median / baseline.median - 1.0) * 100.0


# --- coverage -----------------------------------------------------------------

@dataclass(frozen=True)
class CoverageMetrics:
    ks: np.ndarray
    rms: float | None


def coverage_metrics(states, reference: ReferenceDensity, bandwidth: float = 0.1,
                     grid: int = 101, seed: int = 0) -> CoverageMetrics:
    """Uniformity of a set of normalized states against a reference.

    Per-dimension Kolmogorov-Smirnov statistics against the reference
    marginals (analytic for the uniform box, otherwise against a seeded
    reference sample), and for ``d <= 2`` the RMS of ``c_hat - c*`` over
    a ``grid**d`` lattice.
    """
    x = np.atleast_2d(np.asarray(states, dtype=float))
    if len(x) < 10:
        raise ValueError("coverage metrics need at least 10 states")
    d = x.shape[1]
    if d != reference.dim:
        raise ValueError("dimension mismatch between states and reference")
    if reference.name == "uniform_box":
        cdf = stats.uniform(loc=-1.0, scale=2.0).cdf
        ks = np.array([stats.kstest(x[:, i], cdf).statistic for i in range(d)])
    else:
        ref = reference.sample(100_000, np.random.default_rng(seed))
        ks = np.array([stats.ks_2samp(x[:, i], ref[:, i]).statistic for i in range(d)])
    rms = None
    if d <= 2:
        est = CoverageEstimator(d, bandwidth)
        est.observe(x)
        axes = np.meshgrid(*[np.linspace(-1.0, 1.0, grid)] * d, indexing="ij")
        pts = np.column_stack([a.ravel() for a in axes])
        rms = float(np.sqrt(np.mean((est.density(pts) - reference.evaluate(pts)) ** 2)))
    return CoverageMetrics(ks, rms)


# --- files --------------------------------------------------------------------

def record_header(env) -> list[str]:
    return (["phase", "episode", "step"] + list(env.state_names) + list(env.action_names)
            + ["reward", "terminated"])


def write_record_csv(record: ExperimentRecord, path) -> None:
    """One row per step; the state columns hold the state the action was taken in."""
    env = record.config.make_env()
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(record_header(env))
        for ep in record.training + record.validation:
            last = len(ep) - 1
            for k in range(len(ep)):
                a = np.atleast_1d(np.asarray(ep.actions[k], dtype=float))
                done = ep.cause == "terminal" and k == last
                out.writerow([ep.phase, ep.index, k]
                             + [repr(float(s)) for s in ep.states[k]]
                             + [repr(float(v)) for v in a]
                             + [repr(float(ep.rewards[k])), int(done)])


def write_summary_json(summary: RunSummary, path) -> None:
    Path(path).write_text(summary.to_json())


def read_summary_json(path) -> RunSummary:
    return RunSummary.from_dict(json.loads(Path(path).read_text()))
