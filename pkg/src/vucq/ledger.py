"""Per-(s, a) bucket ledger and the level-wise empirical transition estimates.

Samples at each pair are routed by arrival order into G^(1), H^(1), G^(2),
H^(2), ...; |G^(j)| = ceil(c0 * 2^j) and |H^(j)| = h_cap, the latter split
into H equal sub-buckets filled in slot order.  Only next-state counts are
stored, which is all the estimators need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit


def g_capacity(c0: float, j: int) -> int:
    return int(math.ceil(c0 * 2.0 ** j))


def round_h_cap(h_cap: int, horizon: int) -> int:
    """Round up to a positive multiple of the horizon so sub-buckets are equal."""
    h_cap = max(int(math.ceil(h_cap)), 1)
    return int(math.ceil(h_cap / horizon)) * horizon


def default_h_cap(c1: float, L: float, horizon: int, exponent: int, cap=None) -> int:
    h_cap = math.ceil(c1 * math.ceil(L) * horizon ** exponent)
    if cap is not None:
        h_cap = min(h_cap, cap)
    return round_h_cap(h_cap, horizon)


class UndefinedEstimateError(LookupError):
    pass


def _record_py(s, a, s2, r, sub_cap, h_cap, g_caps, level, g_fill, h_fill,
               visits, reward, seen, g_counts, h_counts):
    if not seen[s, a]:
        seen[s, a] = True
        reward[s, a] = r
    visits[s, a] += 1
    j = level[s, a]
    if g_fill[s, a] < g_caps[j]:
        g_counts[s, a, j, s2] += 1
        g_fill[s, a] += 1
        return False
    slot = h_fill[s, a] // sub_cap
    h_counts[s, a, j, slot, s2] += 1
    h_fill[s, a] += 1
    if h_fill[s, a] == h_cap:
        level[s, a] = j + 1
        g_fill[s, a] = 0
        h_fill[s, a] = 0
        return True
    return False


_record_nb = njit(_record_py)


@njit
def _play_episode_nb(policy, cum, reward_true, s0, uniforms, sub_cap, h_cap, g_caps,
                     level, g_fill, h_fill, visits, reward, seen, g_counts, h_counts):
    H = policy.shape[0]
    S = cum.shape[0]
    changed = False
    s = s0
    for h in range(H):
        a = policy[h, s]
        row = cum[s, a]
        u = uniforms[h]
        s2 = 0
        while s2 < S - 1 and row[s2] <= u:
            s2 += 1
        if _record_nb(s, a, s2, reward_true[s, a], sub_cap, h_cap, g_caps, level, g_fill,
                      h_fill, visits, reward, seen, g_counts, h_counts):
            changed = True
        s = s2
    return changed


def _play_episode_np(policy, cum, reward_true, s0, uniforms, sub_cap, h_cap, g_caps,
                     level, g_fill, h_fill, visits, reward, seen, g_counts, h_counts):
    S = cum.shape[0]
    changed = False
    s = s0
    for h in range(policy.shape[0]):
        a = policy[h, s]
        s2 = min(int(np.searchsorted(cum[s, a], uniforms[h], side="right")), S - 1)
        if _record_py(s, a, s2, reward_true[s, a], sub_cap, h_cap, g_caps, level, g_fill,
                      h_fill, visits, reward, seen, g_counts, h_counts):
            changed = True
        s = s2
    return changed


@dataclass(frozen=True)
class LevelEstimates:
    """Empirical transition estimates for every level up to the largest full level.

    ``p_g[j, s, a]`` estimates P(.|s,a) from G^(j); ``p_h[j, h-1, s, a]`` from the
    h-th sub-bucket of H^(j).  Level 0 and any level beyond a pair's full level
    are zero vectors; the accessors refuse the latter.
    """
    p_g: np.ndarray  # (levels+1, S, A, S)
    p_h: np.ndarray  # (levels+1, H, S, A, S)
    full_levels: np.ndarray  # (S, A)

    @property
    def levels(self) -> int:
        return self.p_g.shape[0] - 1

    def _check(self, j, s, a):
        if j < 0 or j > self.full_levels[s, a]:
            raise UndefinedEstimateError(
                f"level {j} is not full at (s={s}, a={a}); full level is {self.full_levels[s, a]}")

    def g(self, j: int, s: int, a: int) -> np.ndarray:
        self._check(j, s, a)
        return self.p_g[j, s, a]

    def h(self, j: int, h: int, s: int, a: int) -> np.ndarray:
        self._check(j, s, a)
        return self.p_h[j, h - 1, s, a]


class BucketLedger:
    def __init__(self, num_states: int, num_actions: int, horizon: int, c0: float, h_cap: int,
                 initial_levels: int = 8):
        if h_cap < horizon or h_cap % horizon:
            raise ValueError(f"h_cap={h_cap} must be a positive multiple of the horizon {horizon}")
        if c0 <= 0:
            raise ValueError("c0 must be positive")
        self.num_states, self.num_actions, self.horizon = num_states, num_actions, horizon
        self.c0 = float(c0)
        self.h_cap = int(h_cap)
        self.sub_cap = self.h_cap // horizon
        S, A, H = num_states, num_actions, horizon
        self.level = np.ones((S, A), dtype=np.int64)  # current_level, the bucket being filled
        self.g_fill = np.zeros((S, A), dtype=np.int64)
        self.h_fill = np.zeros((S, A), dtype=np.int64)
        self.visits = np.zeros((S, A), dtype=np.int64)
        self.reward = np.zeros((S, A), dtype=np.float64)
        self.seen = np.zeros((S, A), dtype=np.bool_)
        self.g_caps = np.zeros(0, dtype=np.int64)
        self.g_counts = np.zeros((S, A, 0, S), dtype=np.int64)
        self.h_counts = np.zeros((S, A, 0, H, S), dtype=np.int64)
        self.ensure_levels(initial_levels)

    @property
    def capacity_levels(self) -> int:
        return self.g_caps.shape[0] - 1

    def ensure_levels(self, n: int) -> None:
        """Grow storage so levels 0..n are addressable."""
        old = self.g_caps.shape[0]
        if n + 1 <= old:
            return
        new = max(n + 1, 2 * old)
        # Level 0 holds no samples; capacity 1 keeps estimate() free of 0/0.
        self.g_caps = np.array([1] + [g_capacity(self.c0, j) for j in range(1, new)], dtype=np.int64)
        pad = new - old
        self.g_counts = np.concatenate(
            [self.g_counts, np.zeros(self.g_counts.shape[:2] + (pad,) + self.g_counts.shape[3:], np.int64)], axis=2)
        self.h_counts = np.concatenate(
            [self.h_counts, np.zeros(self.h_counts.shape[:2] + (pad,) + self.h_counts.shape[3:], np.int64)], axis=2)

    def _state(self):
        return (self.sub_cap, self.h_cap, self.g_caps, self.level, self.g_fill, self.h_fill,
                self.visits, self.reward, self.seen, self.g_counts, self.h_counts)

    def record_transition(self, s: int, a: int, s_next: int, r_obs: float) -> bool:
        """File one sample; True when it completes the current level of (s, a)."""
        self.ensure_levels(int(self.level[s, a]) + 1)
        return bool(_record_py(int(s), int(a), int(s_next), float(r_obs), *self._state()))

    def play_episode(self, policy, cum, reward_true, s0, uniforms, use_numba=True) -> bool:
        """Roll one episode of ``policy`` and file every transition; True if any level completed."""
        self.ensure_levels(int(self.level.max()) + self.horizon + 1)
        kernel = _play_episode_nb if use_numba else _play_episode_np
        return bool(kernel(policy, cum, reward_true, int(s0), uniforms, *self._state()))

    def full_levels(self) -> np.ndarray:
        # G^(j) fills before H^(j), and the level advances exactly when H^(j) is full.
        return self.level - 1

    def full_level(self, s: int, a: int) -> int:
        return int(self.level[s, a] - 1)

    def max_full_level(self) -> int:
        return int(self.full_levels().max())

    def current_level(self, s: int, a: int) -> int:
        return int(self.level[s, a])

    def visit_count(self, s: int, a: int) -> int:
        return int(self.visits[s, a])

    def total_samples(self) -> int:
        return int(self.visits.sum())

    def reward_estimate(self, s: int, a: int) -> float:
        return float(self.reward[s, a]) if self.seen[s, a] else 1.0

    def reward_estimates(self) -> np.ndarray:
        return np.where(self.seen, self.reward, 1.0)

    def g_occupancy(self, s: int, a: int, j: int) -> int:
        cur = self.level[s, a]
        if j < 1 or j > cur:
            return 0
        return int(self.g_caps[j]) if j < cur else int(self.g_fill[s, a])

    def h_occupancy(self, s: int, a: int, j: int) -> int:
        cur = self.level[s, a]
        if j < 1 or j > cur:
            return 0
        return self.h_cap if j < cur else int(self.h_fill[s, a])

    def sub_bucket_occupancy(self, s: int, a: int, j: int) -> np.ndarray:
        """Occupancy of the H sub-buckets of H^(j)(s, a), in slot order."""
        if j < 1 or j > self.capacity_levels:
            return np.zeros(self.horizon, dtype=np.int64)
        return self.h_counts[s, a, j].sum(axis=-1)

    def estimate(self) -> LevelEstimates:
        levels = self.max_full_level()
        fl = self.full_levels()
        n = levels + 1
        p_g = np.transpose(self.g_counts[:, :, :n], (2, 0, 1, 3)) / self.g_caps[:n, None, None, None]
        p_h = np.transpose(self.h_counts[:, :, :n], (2, 3, 0, 1, 4)) / float(self.sub_cap)
        undefined = np.arange(n)[:, None, None] > fl[None]  # (n, S, A)
        undefined[0] = True
        p_g[undefined] = 0.0
        p_h[np.broadcast_to(undefined[:, None], p_h.shape[:-1])] = 0.0
        return LevelEstimates(p_g, p_h, fl.copy())

    def dump(self, path) -> None:
        """Write one line per (s, a, level) with bucket occupancies."""
        with open(path, "w", newline="\n") as fh:
            fh.write("s a level g_occupancy g_capacity h_occupancy h_capacity\n")
            for s in range(self.num_states):
                for a in range(self.num_actions):
                    for j in range(1, int(self.level[s, a]) + 1):
                        fh.write(f"{s} {a} {j} {self.g_occupancy(s, a, j)} {int(self.g_caps[j])} "
                                 f"{self.h_occupancy(s, a, j)} {self.h_cap}\n")
