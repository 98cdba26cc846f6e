"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Each row is the best of N wall-clock timings; numba timings exclude the
first (compiling) call.
"""
import argparse
import time

import numpy as np

from vucq import AgentConfig, BonusConfig, EnvSpec, make_chain_mdp, make_random_mdp, run_agent
from vucq.bonus import big_l
from vucq.ledger import BucketLedger
from vucq.planner import vucqvi_plan


def best_of(fn, repeat):
    fn()  # warm-up, triggers compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def filled_ledger(m, episodes, seed=0):
    g = np.random.default_rng(seed)
    led = BucketLedger(m.num_states, m.num_actions, m.horizon, 1.0, m.horizon * 2)
    for _ in range(episodes):
        led.play_episode(g.integers(0, m.num_actions, size=(m.horizon, m.num_states)),
                         m.cumulative, m.reward, int(g.integers(m.num_states)), g.random(m.horizon))
    return led


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rows = []
    m = make_random_mdp(EnvSpec(kind="random_dense", num_states=20, num_actions=4, horizon=10))
    led = filled_ledger(m, 5000)
    est, fl, r_hat = led.estimate(), led.full_levels(), led.reward_estimates()
    for mode in ("hoeffding", "bernstein"):
        cfg = BonusConfig(mode=mode, t_budget=10**6)
        L = big_l(cfg, m.num_states, m.num_actions, m.horizon)
        for use in (True, False):
            t = best_of(lambda: vucqvi_plan(est, fl, r_hat, cfg, L, m.horizon, use_numba=use), args.repeat)
            rows.append((f"plan S=20 A=4 H=10 levels={est.levels} {mode}", use, t))

    def episodes(use):
        led = BucketLedger(m.num_states, m.num_actions, m.horizon, 1.0, m.horizon * 2)
        g = np.random.default_rng(1)
        pol = g.integers(0, m.num_actions, size=(m.horizon, m.num_states))
        u = g.random((2000, m.horizon))
        for k in range(2000):
            led.play_episode(pol, m.cumulative, m.reward, 0, u[k], use_numba=use)

    for use in (True, False):
        rows.append(("2000 ledger episodes", use, best_of(lambda: episodes(use), args.repeat)))

    chain = make_chain_mdp(EnvSpec())
    for alg in ("vucq_hoeffding", "ucbvi_stage"):
        cfg = AgentConfig(bonus=BonusConfig(c3=1.0), algorithm=alg, h_cap_override=10)
        for use in (True, False):
            t = best_of(lambda: run_agent(chain, 20_000, cfg, use_numba=use), args.repeat)
            rows.append((f"run {alg} chain T=2e4", use, t))

    print(f"{'case':48s} {'backend':>8s} {'seconds':>10s}")
    for name, use, t in rows:
        print(f"{name:48s} {'numba' if use else 'numpy':>8s} {t:10.4f}")
    for i in range(0, len(rows), 2):
        print(f"speedup {rows[i][0]}: {rows[i + 1][2] / rows[i][2]:.1f}x")


if __name__ == "__main__":
    main()
