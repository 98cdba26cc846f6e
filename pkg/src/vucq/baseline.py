"""Per-stage UCB value iteration baseline.

Every sample is pooled by the stage at which it arrived, giving H separate
transition estimates P_hat_h; each episode replans by optimistic backward
induction with a ||V_{h+1}||_inf * sqrt(L / N) bonus.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit


@njit
def _play_episode_nb(policy, cum, reward_true, s0, uniforms, counts, visits, reward, seen):
    H = policy.shape[0]
    S = cum.shape[0]
    s = s0
    for h in range(H):
        a = policy[h, s]
        row = cum[s, a]
        u = uniforms[h]
        s2 = 0
        while s2 < S - 1 and row[s2] <= u:
            s2 += 1
        counts[h, s, a, s2] += 1
        visits[h, s, a] += 1
        if not seen[s, a]:
            seen[s, a] = True
            reward[s, a] = reward_true[s, a]
        s = s2


def _play_episode_np(policy, cum, reward_true, s0, uniforms, counts, visits, reward, seen):
    S = cum.shape[0]
    s = s0
    for h in range(policy.shape[0]):
        a = policy[h, s]
        s2 = min(int(np.searchsorted(cum[s, a], uniforms[h], side="right")), S - 1)
        counts[h, s, a, s2] += 1
        visits[h, s, a] += 1
        if not seen[s, a]:
            seen[s, a] = True
            reward[s, a] = reward_true[s, a]
        s = s2


@njit
def _plan_nb(q, v, counts, visits, r_hat, L):
    H = counts.shape[0]
    S = counts.shape[1]
    A = counts.shape[2]
    for s in range(S):
        v[H, s] = 0.0
    for h in range(H - 1, -1, -1):
        norm = 0.0
        for s2 in range(S):
            if abs(v[h + 1, s2]) > norm:
                norm = abs(v[h + 1, s2])
        cap = float(H - h)
        for s in range(S):
            best = -np.inf
            for a in range(A):
                n = visits[h, s, a]
                nn = n if n > 1 else 1
                pv = 0.0
                if n > 0:
                    for s2 in range(S):
                        pv += (counts[h, s, a, s2] / n) * v[h + 1, s2]
                val = r_hat[s, a] + pv + norm * math.sqrt(L / nn)
                if val > cap:
                    val = cap
                q[h, s, a] = val
                if val > best:
                    best = val
            v[h, s] = best


def _plan_np(q, v, counts, visits, r_hat, L):
    H = counts.shape[0]
    v[H] = 0.0
    n = visits.astype(np.float64)
    safe = np.maximum(n, 1.0)
    p_hat = np.where(n[..., None] > 0, counts / safe[..., None], 0.0)
    for h in range(H - 1, -1, -1):
        norm = np.abs(v[h + 1]).max()
        val = r_hat + np.sum(p_hat[h] * v[h + 1], axis=-1) + norm * np.sqrt(L / safe[h])
        q[h] = np.minimum(float(H - h), val)
        v[h] = q[h].max(axis=1)


class StageUcbAgent:
    """Optimistic planner over H independent per-stage sample pools."""

    def __init__(self, num_states, num_actions, horizon, L, use_numba=True):
        S, A, H = num_states, num_actions, horizon
        self.num_states, self.num_actions, self.horizon = S, A, H
        self.L = float(L)
        self.use_numba = use_numba
        self.counts = np.zeros((H, S, A, S), dtype=np.int64)
        self.visits = np.zeros((H, S, A), dtype=np.int64)
        self.reward = np.zeros((S, A))
        self.seen = np.zeros((S, A), dtype=np.bool_)
        self.q = np.zeros((H + 1, S, A))
        self.v = np.zeros((H + 1, S))

    def reward_estimates(self):
        return np.where(self.seen, self.reward, 1.0)

    def plan(self):
        planner = _plan_nb if self.use_numba else _plan_np
        planner(self.q, self.v, self.counts, self.visits, self.reward_estimates(), self.L)
        return np.argmax(self.q[:-1], axis=-1).astype(np.int64)

    def next_policy(self):
        return self.plan(), True

    def value(self, s):
        return float(self.v[0, s])

    def play(self, policy, cum, reward_true, s0, uniforms):
        kernel = _play_episode_nb if self.use_numba else _play_episode_np
        kernel(policy, cum, reward_true, int(s0), uniforms, self.counts, self.visits, self.reward, self.seen)
        return False

    def max_full_level(self):
        return 0

    def total_samples(self):
        return int(self.visits.sum())
