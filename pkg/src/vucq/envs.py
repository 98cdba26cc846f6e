"""Synthetic environments: dense random MDPs and a RiverSwim-style chain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import Mdp

LEFT, RIGHT = 0, 1
KINDS = ("random_dense", "chain")


@dataclass(frozen=True)
class EnvSpec:
    kind: str = "chain"
    num_states: int = 5
    num_actions: int = 2
    horizon: int = 5
    gen_seed: int = 0
    # chain
    p_fwd: float = 0.7
    r_left: float = 0.05
    r_right: float = 1.0
    # random_dense
    concentration: float = 1.0
    reward_low: float = 0.0
    reward_high: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown env kind {self.kind!r}; expected one of {KINDS}")
        if self.num_states < 1 or self.num_actions < 1 or self.horizon < 1:
            raise ValueError("states, actions and horizon must be positive")
        if self.kind == "chain":
            if self.num_actions != 2:
                raise ValueError("the chain environment has exactly 2 actions (LEFT=0, RIGHT=1)")
            if not 0.0 < self.p_fwd <= 1.0:
                raise ValueError("p_fwd must lie in (0, 1]")
        if not 0.0 <= self.reward_low <= self.reward_high <= 1.0:
            raise ValueError("reward range must be a sub-interval of [0, 1]")
        if self.concentration <= 0:
            raise ValueError("concentration must be positive")


def make_random_mdp(spec: EnvSpec) -> Mdp:
    rng = np.random.default_rng(spec.gen_seed)
    S, A = spec.num_states, spec.num_actions
    draws = rng.gamma(spec.concentration, size=(S, A, S))
    # Gamma draws can underflow to 0 for tiny concentrations; never leave a row empty.
    draws[draws.sum(axis=-1) == 0] = 1.0
    P = draws / draws.sum(axis=-1, keepdims=True)
    r = rng.uniform(spec.reward_low, spec.reward_high, size=(S, A))
    return Mdp(S, A, spec.horizon, P, r)


def make_chain_mdp(spec: EnvSpec) -> Mdp:
    n = spec.num_states
    P = np.zeros((n, 2, n))
    r = np.zeros((n, 2))
    for s in range(n):
        P[s, LEFT, max(s - 1, 0)] = 1.0
        if s < n - 1:
            P[s, RIGHT, s + 1] = spec.p_fwd
            P[s, RIGHT, s] += 1.0 - spec.p_fwd
        else:
            P[s, RIGHT, s] = 1.0
    r[0, LEFT] = spec.r_left
    r[n - 1, RIGHT] = spec.r_right
    return Mdp(n, 2, spec.horizon, P, r)


def make_env(spec: EnvSpec) -> Mdp:
    return make_chain_mdp(spec) if spec.kind == "chain" else make_random_mdp(spec)
