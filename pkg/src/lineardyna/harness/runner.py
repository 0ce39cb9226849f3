"""Multi-seed experiment runs on the Boyan chain and Mountain Car.

Each trial ``k`` derives two independent generators from
``SeedSequence([base_seed, k])``: one drives the environment (and, for
policy evaluation, the behaviour policy's noise), the other drives the
agent. Trajectories in policy evaluation therefore depend only on the seed
and are shared by every algorithm run with the same base seed.
"""
from __future__ import annotations

import functools
import hashlib
import struct
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..analysis import TDFixedLoss, rmse_vs_true
from ..envs import BoyanChain, MountainCar, make_rng, mcar_eval_policy
from ..errors import DivergenceError
from ..features import BOYAN_N_FEATURES, BOYAN_N_STATES, SparseVec, TileCoder, boyan_features
from ..model import TransitionDataset
from ..planners import dyna_control_step, make_planner
from .config import ExperimentConfig
from .curves import LearningCurve

__all__ = [
    "step_size",
    "trial_rngs",
    "run_policy_eval",
    "run_control",
    "run_trial",
    "run_experiment",
    "mcar_eval_dataset",
]

_BOYAN_PHI = [boyan_features(s) for s in range(BOYAN_N_STATES + 1)]
_PACK_STEP = struct.Struct("<ddbd")


def step_size(alpha0: float, n0: float, t: int) -> float:
    """``alpha0 * (n0 + 1) / (n0 + t**1.1)`` for episode ``t >= 1``."""
    if t < 1:
        raise ValueError("episode numbers start at 1")
    return alpha0 * (n0 + 1.0) / (n0 + t ** 1.1)


def _alpha(cfg: ExperimentConfig, t: int) -> float:
    if cfg.schedule == "constant":
        return cfg.alpha0
    return step_size(cfg.alpha0, cfg.n0, t)


def trial_rngs(base_seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    """``(environment, agent)`` generators for one trial."""
    env_ss, agent_ss = np.random.SeedSequence([base_seed, trial]).spawn(2)
    return make_rng(env_ss), make_rng(agent_ss)


@functools.lru_cache(maxsize=4)
def _mcar_loss(eval_seed, episodes, noise, step_cap, coder: TileCoder, gamma) -> TDFixedLoss:
    data = mcar_eval_dataset(eval_seed, episodes, noise, step_cap, coder)
    return TDFixedLoss(data, gamma)


def mcar_eval_dataset(eval_seed: int, episodes: int, noise: float, step_cap: int,
                      coder: TileCoder) -> TransitionDataset:
    """Transitions of the noisy evaluation policy, generated from a dedicated seed."""
    rng = make_rng(np.random.SeedSequence([eval_seed]))
    env = MountainCar(step_cap)
    terminal = SparseVec(coder.size)
    data = TransitionDataset(coder.size)
    for _ in range(episodes):
        s = env.reset()
        phi = coder.encode(s.position, s.velocity)
        while True:
            s, r, done = env.step(mcar_eval_policy(s, rng, noise))
            nxt = terminal if done else coder.encode(s.position, s.velocity)
            data.transitions.append((phi, r, nxt))
            if done or env.truncated:
                break
            phi = nxt
    return data


def _boyan_policy_eval(cfg, planner, env_rng, curve):
    env = BoyanChain(env_rng)
    terminal = SparseVec(BOYAN_N_FEATURES)
    digest = hashlib.sha256()
    for t in range(1, cfg.episodes + 1):
        alpha = _alpha(cfg, t)
        s = env.reset()
        phi = _BOYAN_PHI[s]
        states = [s]
        done = False
        while not done:
            s, r, done = env.step()
            nxt = terminal if done else _BOYAN_PHI[s]
            try:
                planner.step(phi, r, nxt, alpha)
            except DivergenceError:
                curve.diverged, curve.diverged_at = True, t
                return digest
            phi = nxt
            states.append(s)
        digest.update(bytes(states))
        if t % cfg.eval_every == 0:
            curve.record(t, rmse_vs_true(planner.theta))
    return digest


def _mcar_policy_eval(cfg, planner, env_rng, curve):
    coder = cfg.tile_coder()
    loss = _mcar_loss(cfg.eval_seed, cfg.eval_episodes, cfg.noise, cfg.step_cap, coder, cfg.gamma)
    env = MountainCar(cfg.step_cap)
    terminal = SparseVec(coder.size)
    digest = hashlib.sha256()
    for t in range(1, cfg.episodes + 1):
        alpha = _alpha(cfg, t)
        s = env.reset()
        phi = coder.encode(s.position, s.velocity)
        while True:
            a = mcar_eval_policy(s, env_rng, cfg.noise)
            s2, r, done = env.step(a)
            nxt = terminal if done else coder.encode(s2.position, s2.velocity)
            digest.update(_PACK_STEP.pack(s.position, s.velocity, a, r))
            try:
                planner.step(phi, r, nxt, alpha)
            except DivergenceError:
                curve.diverged, curve.diverged_at = True, t
                return digest
            if done or env.truncated:
                break
            s, phi = s2, nxt
        if t % cfg.eval_every == 0:
            curve.record(t, loss(planner.theta))
    return digest


def _new_curve(cfg: ExperimentConfig, trial: int) -> LearningCurve:
    return LearningCurve(seed=trial, config_hash=cfg.config_hash())


def run_trial(cfg: ExperimentConfig, trial: int) -> LearningCurve:
    env_rng, agent_rng = trial_rngs(cfg.base_seed, trial)
    curve = _new_curve(cfg, trial)
    if cfg.is_control:
        _control(cfg, agent_rng, curve)
        return curve
    n = BOYAN_N_FEATURES if cfg.env == "boyan" else cfg.hash_size
    planner = make_planner(cfg.algorithm, n, cfg.planner_config(), agent_rng)
    if cfg.env == "boyan":
        digest = _boyan_policy_eval(cfg, planner, env_rng, curve)
    else:
        digest = _mcar_policy_eval(cfg, planner, env_rng, curve)
    curve.trajectory_digest = digest.hexdigest()
    return curve


def _control(cfg, agent_rng, curve):
    coder = cfg.tile_coder()
    agent = make_planner(cfg.algorithm, coder.size, cfg.planner_config(), agent_rng, n_actions=3)
    env = MountainCar(cfg.step_cap)

    def featurize(s):
        return coder.encode(s.position, s.velocity)

    for t in range(1, cfg.episodes + 1):
        alpha = _alpha(cfg, t)
        agent.phi = featurize(env.reset())
        try:
            while True:
                _, terminal = dyna_control_step(agent, env, featurize, alpha)
                if terminal or env.truncated:
                    break
        except DivergenceError:
            curve.diverged, curve.diverged_at = True, t
            return
        if t % cfg.eval_every == 0:
            curve.record(t, env.t)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[LearningCurve]:
    """Run every seed of ``cfg``; results come back in trial order regardless of ``jobs``."""
    trials = range(cfg.seeds)
    if jobs <= 1 or cfg.seeds == 1:
        return [run_trial(cfg, k) for k in trials]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_trial, [cfg] * cfg.seeds, trials))


def run_policy_eval(cfg: ExperimentConfig, jobs: int = 1) -> list[LearningCurve]:
    if cfg.is_control:
        raise ValueError(f"{cfg.algorithm!r} is a control algorithm")
    return run_experiment(cfg, jobs)


def run_control(cfg: ExperimentConfig, jobs: int = 1) -> list[LearningCurve]:
    if not cfg.is_control:
        raise ValueError(f"{cfg.algorithm!r} is not a control algorithm")
    return run_experiment(cfg, jobs)
