from dataclasses import replace

import numpy as np
import pytest

from conftest import random_mdp
from vucq.agents import AgentConfig, make_agent, run_agent, run_doubling, run_ucbvi_baseline, run_vucq
from vucq.baseline import StageUcbAgent
from vucq.bonus import BonusConfig
from vucq.envs import EnvSpec, make_chain_mdp
from vucq.mdp import Mdp

CHAIN = make_chain_mdp(EnvSpec())
ALGS = ["vucq_hoeffding", "vucq_bernstein", "ucbvi_stage"]


def cfg_for(alg, **kw):
    return AgentConfig(algorithm=alg, h_cap_override=kw.pop("h_cap", 10), **kw)


@pytest.mark.parametrize("alg", ALGS)
def test_single_action_has_no_regret(rng, alg):
    m = random_mdp(rng, 4, 1, 3)
    log = run_agent(m, 600, cfg_for(alg))
    assert len(log) == 200
    assert np.abs(log.instant_regret).max() <= 1e-12


@pytest.mark.parametrize("alg", ALGS)
def test_regret_accounting(alg):
    T = 5003  # rounds down to 1000 episodes
    log = run_agent(CHAIN, T, cfg_for(alg, seed=3))
    H = CHAIN.horizon
    assert len(log) == 1000 and log.total_steps == 5000
    np.testing.assert_array_equal(log.t, H * np.arange(1, 1001))
    assert (log.instant_regret >= -1e-9).all() and (log.instant_regret <= H).all()
    assert (np.diff(log.cum_regret) >= -1e-9).all()
    np.testing.assert_allclose(log.cum_regret, np.cumsum(log.instant_regret), atol=1e-9)
    assert log.cum_regret[-1] <= len(log) * H


def test_replans_only_after_level_completion():
    log = run_vucq(CHAIN, 20000, cfg_for("vucq_hoeffding", seed=1))
    fill_episodes = {k for k, *_ in log.level_fills}
    expect = np.array([k == 1 or (k - 1) in fill_episodes for k in log.episode])
    np.testing.assert_array_equal(log.replanned, expect)
    assert log.max_full_level[0] == 0 and (np.diff(log.max_full_level) >= 0).all()


@pytest.mark.parametrize("alg", ALGS)
def test_sample_conservation(alg):
    log = run_agent(CHAIN, 3000, cfg_for(alg, seed=2), keep_agent=True)
    assert log.agents[0].total_samples() == 3000


@pytest.mark.parametrize("alg", ALGS)
def test_runs_are_deterministic(alg):
    cfg = cfg_for(alg, seed=11, initial_state_rule="uniform_random")
    a, b = run_agent(CHAIN, 4000, cfg), run_agent(CHAIN, 4000, cfg)
    for name in ("initial_state", "instant_regret", "cum_regret", "replanned", "max_full_level"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    c = run_agent(CHAIN, 4000, replace(cfg, seed=12))
    assert not np.array_equal(a.initial_state, c.initial_state)


@pytest.mark.parametrize("alg", ALGS)
def test_backends_play_identically(rng, alg):
    m = random_mdp(rng, 4, 2, 3)
    a = run_agent(m, 3000, cfg_for(alg, seed=5, h_cap=3), use_numba=True)
    b = run_agent(m, 3000, cfg_for(alg, seed=5, h_cap=3), use_numba=False)
    np.testing.assert_array_equal(a.initial_state, b.initial_state)
    np.testing.assert_array_equal(a.max_full_level, b.max_full_level)
    np.testing.assert_allclose(a.cum_regret, b.cum_regret, atol=1e-9)


def test_uniform_start_covers_states():
    log = run_agent(CHAIN, 2000, cfg_for("vucq_hoeffding", initial_state_rule="uniform_random"))
    assert set(log.initial_state) == set(range(CHAIN.num_states))


def test_bad_config():
    with pytest.raises(ValueError):
        AgentConfig(algorithm="dqn")
    with pytest.raises(ValueError):
        AgentConfig(initial_state_rule="random")
    with pytest.raises(ValueError):
        run_agent(CHAIN, 100, AgentConfig(initial_state=9))
    with pytest.raises(ValueError):
        run_vucq(CHAIN, 100, AgentConfig(algorithm="ucbvi_stage"))


def test_algorithm_fixes_bonus_mode():
    assert AgentConfig(algorithm="vucq_bernstein").bonus.mode == "bernstein"
    assert AgentConfig(algorithm="vucq_hoeffding", bonus=BonusConfig(mode="bernstein")).bonus.mode == "hoeffding"


def test_bernstein_bonus_trace_dominated():
    log = run_vucq(CHAIN, 20000, cfg_for("vucq_bernstein", seed=4), keep_plans=True)
    assert len(log.plans) == log.replanned.sum()
    assert any(p.levels > 0 for p in log.plans)
    for plan in log.plans:
        assert (plan.bonus <= plan.hoeffding).all()


def test_agent_uses_segment_budget():
    short = make_agent(CHAIN, cfg_for("vucq_hoeffding", h_cap=None), 100)
    long = make_agent(CHAIN, cfg_for("vucq_hoeffding", h_cap=None), 10**6)
    assert short.L < long.L and short.h_cap <= long.h_cap
    assert long.h_cap % CHAIN.horizon == 0


class TestDoubling:
    def test_single_segment_equals_plain_run(self):
        cfg = cfg_for("vucq_hoeffding", seed=8)
        a, b = run_doubling(CHAIN, 5000, 5000, cfg), run_vucq(CHAIN, 5000, cfg)
        np.testing.assert_array_equal(a.cum_regret, b.cum_regret)
        np.testing.assert_array_equal(a.replanned, b.replanned)
        assert set(a.segment) == {0}

    def test_segment_boundaries(self):
        t_guess = 500
        log = run_doubling(CHAIN, 7 * t_guess, t_guess, cfg_for("vucq_hoeffding", seed=1))
        assert log.segment_boundaries() == [t_guess, 3 * t_guess, 7 * t_guess]
        assert log.total_steps == 7 * t_guess

    def test_truncated_last_segment(self):
        log = run_doubling(CHAIN, 2_222, 500, cfg_for("vucq_hoeffding"))
        assert log.segment_boundaries() == [500, 1500, 2220]

    def test_restart_resets_levels(self):
        log = run_doubling(CHAIN, 15_000, 1000, cfg_for("vucq_hoeffding", seed=2), keep_agent=True)
        starts = np.flatnonzero(np.diff(log.segment)) + 1
        assert len(starts) == 3 and len(log.agents) == 4
        assert (log.max_full_level[starts] == 0).all() and (log.max_full_level[starts - 1] > 0).all()
        assert log.replanned[starts].all()
        assert sum(a.total_samples() for a in log.agents) == 15_000

    def test_rejects_short_guess(self):
        with pytest.raises(ValueError):
            run_doubling(CHAIN, 100, 3, AgentConfig())


class TestBaseline:
    def test_unvisited_pairs_capped(self):
        agent = StageUcbAgent(3, 2, 4, L=2.0)
        agent.plan()
        caps = (4 - np.arange(4))[:, None, None]
        np.testing.assert_array_equal(agent.q[:4], np.broadcast_to(caps, (4, 3, 2)))

    def test_q_never_exceeds_cap(self, rng):
        m = random_mdp(rng, 4, 2, 3)
        log = run_ucbvi_baseline(m, 3000, AgentConfig(seed=1), keep_agent=True)
        q = log.agents[0].q
        assert (q[:3] <= (3 - np.arange(3))[:, None, None]).all()

    def test_samples_pooled_by_arrival_stage(self):
        m = Mdp(2, 1, 3, np.array([[[0.0, 1.0]], [[1.0, 0.0]]]), [[0.2], [0.4]])
        log = run_ucbvi_baseline(m, 30, AgentConfig(seed=0), keep_agent=True)
        agent = log.agents[0]
        # start 0 -> 1 -> 0: stage 1 and 3 see state 0, stage 2 sees state 1
        np.testing.assert_array_equal(agent.visits[:, :, 0], [[10, 0], [0, 10], [10, 0]])
        np.testing.assert_array_equal(agent.counts[1, 1, 0], [10, 0])

    def test_backends_agree(self, rng):
        m = random_mdp(rng, 5, 3, 4)
        agents = [StageUcbAgent(5, 3, 4, L=3.0, use_numba=nb) for nb in (True, False)]
        for _ in range(100):
            policies = [a.plan() for a in agents]
            np.testing.assert_array_equal(*policies)
            np.testing.assert_allclose(agents[0].q, agents[1].q, rtol=0, atol=1e-12)
            u = rng.random(4)
            for a in agents:
                a.play(policies[0], m.cumulative, m.reward, 0, u)
