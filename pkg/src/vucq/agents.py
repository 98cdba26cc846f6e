"""Episode loops: vUCQ, the doubling-trick wrapper, and the per-stage UCB baseline.

Regret is exact: each played policy is evaluated against the true MDP and
compared with the optimal value at the episode's initial state.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _accel
from .baseline import StageUcbAgent
from .bonus import BonusConfig, big_l
from .ledger import BucketLedger, default_h_cap
from .mdp import Mdp, policy_evaluation, value_iteration
from .planner import PlanResult, vucqvi_plan

log = logging.getLogger(__name__)

ALGORITHMS = ("vucq_hoeffding", "vucq_bernstein", "ucbvi_stage")
START_RULES = ("fixed", "uniform_random")
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class AgentConfig:
    bonus: BonusConfig = field(default_factory=BonusConfig)
    algorithm: str = "vucq_hoeffding"
    h_cap_override: Optional[int] = None
    initial_state_rule: str = "fixed"
    initial_state: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.initial_state_rule not in START_RULES:
            raise ValueError(f"unknown initial state rule {self.initial_state_rule!r}")
        if self.h_cap_override is not None and self.h_cap_override < 1:
            raise ValueError("h_cap_override must be a positive integer")
        want = {"vucq_hoeffding": "hoeffding", "vucq_bernstein": "bernstein"}.get(self.algorithm)
        if want is not None and self.bonus.mode != want:
            object.__setattr__(self, "bonus", replace(self.bonus, mode=want))

    @property
    def name(self) -> str:
        return self.algorithm.replace("_", "-")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & SEED_MASK))


@dataclass
class RegretLog:
    episode: np.ndarray
    t: np.ndarray
    initial_state: np.ndarray
    instant_regret: np.ndarray
    cum_regret: np.ndarray
    replanned: np.ndarray
    max_full_level: np.ndarray
    optimistic_value: np.ndarray  # agent's own V_1(s_1) estimate for the episode
    optimal_value: np.ndarray  # V*_1(s_1)
    segment: np.ndarray  # restart index (doubling trick); 0 otherwise
    level_fills: list = field(default_factory=list)  # (episode, s, a, level)
    plans: list = field(default_factory=list)
    agents: list = field(default_factory=list)

    def __len__(self):
        return int(self.episode.shape[0])

    @property
    def total_steps(self) -> int:
        return int(self.t[-1]) if len(self) else 0

    def segment_boundaries(self) -> list:
        """Step counts at which each segment ended."""
        if not len(self):
            return []
        ends = np.flatnonzero(np.diff(self.segment))
        return [int(self.t[i]) for i in ends] + [int(self.t[-1])]


class _LogBuilder:
    def __init__(self):
        self.rows = []
        self.level_fills = []
        self.plans = []
        self.agents = []
        self.cum = 0.0

    def add(self, k, t, s1, regret, replanned, max_lv, optimistic, optimal, segment):
        self.cum += regret
        self.rows.append((k, t, s1, regret, self.cum, replanned, max_lv, optimistic, optimal, segment))

    def build(self) -> RegretLog:
        cols = list(zip(*self.rows)) if self.rows else [()] * 10
        dtypes = [np.int64, np.int64, np.int64, float, float, bool, np.int64, float, float, np.int64]
        arrays = [np.array(c, dtype=d) for c, d in zip(cols, dtypes)]
        return RegretLog(*arrays, level_fills=self.level_fills, plans=self.plans, agents=self.agents)


class VucqAgent:
    """Bucket ledger plus the successive-refinement planner, replanned when a level completes."""

    def __init__(self, num_states, num_actions, horizon, cfg: BonusConfig, h_cap_override=None,
                 use_numba=True, keep_plans=False):
        self.num_states, self.num_actions, self.horizon = num_states, num_actions, horizon
        self.cfg = cfg
        self.L = big_l(cfg, num_states, num_actions, horizon)
        self.h_cap = default_h_cap(cfg.c1, self.L, horizon, cfg.bucket_exponent, cap=h_cap_override)
        self.ledger = BucketLedger(num_states, num_actions, horizon, cfg.c0, self.h_cap)
        self.use_numba = use_numba
        self.keep_plans = keep_plans
        self.plans = []
        self.plan = None
        self.dirty = True
        self.fills = []  # (s, a, level) in completion order, per play() call

    def replan(self) -> PlanResult:
        est = self.ledger.estimate()
        self.plan = vucqvi_plan(est, self.ledger.full_levels(), self.ledger.reward_estimates(),
                                self.cfg, self.L, self.horizon, use_numba=self.use_numba)
        if self.keep_plans:
            self.plans.append(self.plan)
        self.dirty = False
        return self.plan

    def next_policy(self):
        # Policies only change at episode boundaries.
        if self.dirty or self.plan is None:
            return self.replan().policy, True
        return self.plan.policy, False

    def value(self, s):
        return float(self.plan.top_v[0, s])

    def play(self, policy, cum, reward_true, s0, uniforms):
        before = self.ledger.full_levels()
        changed = self.ledger.play_episode(policy, cum, reward_true, s0, uniforms, use_numba=self.use_numba)
        self.fills = []
        if changed:
            self.dirty = True
            after = self.ledger.full_levels()
            for s, a in zip(*np.nonzero(after != before)):
                self.fills.extend((int(s), int(a), j) for j in range(int(before[s, a]) + 1, int(after[s, a]) + 1))
        return changed

    def max_full_level(self):
        return self.ledger.max_full_level()

    def total_samples(self):
        return self.ledger.total_samples()


def make_agent(m: Mdp, cfg: AgentConfig, t_budget: int, use_numba=None, keep_plans=False):
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    bonus = replace(cfg.bonus, t_budget=max(int(t_budget), 1))
    S, A, H = m.shape
    if cfg.algorithm == "ucbvi_stage":
        return StageUcbAgent(S, A, H, big_l(bonus, S, A, H), use_numba=use_numba)
    return VucqAgent(S, A, H, bonus, cfg.h_cap_override, use_numba=use_numba, keep_plans=keep_plans)


def _play(m, agent, n_episodes, cfg, rng, v_star, out: _LogBuilder, k0=0, segment=0):
    if cfg.initial_state_rule == "fixed" and not 0 <= cfg.initial_state < m.num_states:
        raise ValueError(f"initial state {cfg.initial_state} outside 0..{m.num_states - 1}")
    H = m.horizon
    last_policy = None
    v_pi = None
    for i in range(n_episodes):
        k = k0 + i + 1
        policy, replanned = agent.next_policy()
        if last_policy is None or not np.array_equal(policy, last_policy):
            v_pi = policy_evaluation(m, policy).v[0]
            last_policy = policy
        if cfg.initial_state_rule == "fixed":
            s1 = cfg.initial_state
        else:
            s1 = int(rng.integers(m.num_states))
        uniforms = rng.random(H)
        agent.play(policy, m.cumulative, m.reward, s1, uniforms)
        if getattr(agent, "fills", None):
            out.level_fills.extend((k, s, a, j) for s, a, j in agent.fills)
        out.add(k, k * H, s1, float(v_star[s1] - v_pi[s1]), replanned, agent.max_full_level(),
                agent.value(s1), float(v_star[s1]), segment)
    return k0 + n_episodes


def run_agent(m: Mdp, T: int, cfg: AgentConfig, use_numba=None, keep_plans=False, keep_agent=False) -> RegretLog:
    """Play floor(T / H) episodes of ``cfg.algorithm`` with a known step budget T."""
    rng = make_rng(cfg.seed)
    v_star = value_iteration(m).v[0]
    out = _LogBuilder()
    agent = make_agent(m, cfg, T, use_numba=use_numba, keep_plans=keep_plans)
    _play(m, agent, max(int(T), 0) // m.horizon, cfg, rng, v_star, out)
    out.plans.extend(getattr(agent, "plans", []))
    if keep_agent:
        out.agents.append(agent)
    return out.build()


def run_vucq(m: Mdp, T: int, cfg: AgentConfig, **kw) -> RegretLog:
    if cfg.algorithm == "ucbvi_stage":
        raise ValueError("run_vucq needs a vucq_* algorithm")
    return run_agent(m, T, cfg, **kw)


def run_ucbvi_baseline(m: Mdp, T: int, cfg: AgentConfig, **kw) -> RegretLog:
    return run_agent(m, T, replace(cfg, algorithm="ucbvi_stage"), **kw)


def run_doubling(m: Mdp, T: int, t_guess: int, cfg: AgentConfig, use_numba=None, keep_agent=False) -> RegretLog:
    """Restart with budgets t_guess, 2 t_guess, 4 t_guess, ... until T steps are played."""
    H = m.horizon
    if t_guess < H:
        raise ValueError(f"t_guess={t_guess} is shorter than one episode (H={H})")
    rng = make_rng(cfg.seed)
    v_star = value_iteration(m).v[0]
    out = _LogBuilder()
    total_episodes = max(int(T), 0) // H
    done = 0
    start, budget, segment = 0, int(t_guess), 0
    while done < total_episodes:
        end = min(start + budget, int(T))
        n = end // H - done
        agent = make_agent(m, cfg, budget, use_numba=use_numba)
        log.debug("doubling segment %d: steps %d..%d, %d episodes", segment, start, end, n)
        done = _play(m, agent, n, cfg, rng, v_star, out, k0=done, segment=segment)
        if keep_agent:
            out.agents.append(agent)
        start, budget, segment = start + budget, 2 * budget, segment + 1
    return out.build()
