"""Finite-horizon tabular MDPs and exact dynamic-programming oracles.

Stage ``h`` (1-based, 1..H) lives at row ``h - 1`` of every table; row ``H``
is the terminal layer and is identically zero.  Policies are integer arrays
of shape ``(H, S)`` with ``policy[h - 1, s]`` the action taken at stage ``h``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROW_TOL = 1e-12


class InvalidMdpError(ValueError):
    pass


@dataclass(frozen=True)
class Mdp:
    num_states: int
    num_actions: int
    horizon: int
    transition: np.ndarray  # (S, A, S)
    reward: np.ndarray  # (S, A)
    cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        P = np.array(self.transition, dtype=np.float64)
        r = np.array(self.reward, dtype=np.float64)
        P.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "reward", r)
        validate_mdp(self)
        object.__setattr__(self, "cumulative", _cumulative_rows(P))

    @property
    def shape(self):
        return self.num_states, self.num_actions, self.horizon


def _cumulative_rows(P):
    # Rows are forced to exactly 1.0 from the last positive entry on, so an
    # inverse-CDF draw can never land on a trailing zero-probability state.
    cum = np.cumsum(P, axis=-1)
    S, A, _ = P.shape
    for s in range(S):
        for a in range(A):
            last = np.flatnonzero(P[s, a] > 0)[-1]
            cum[s, a, last:] = 1.0
    cum.setflags(write=False)
    return cum


def validate_mdp(m: Mdp) -> None:
    """Raise :class:`InvalidMdpError` describing the first violated invariant."""
    S, A, H = m.num_states, m.num_actions, m.horizon
    if S < 1 or A < 1:
        raise InvalidMdpError(f"need at least one state and action, got S={S}, A={A}")
    if H < 1:
        raise InvalidMdpError(f"horizon must be >= 1, got {H}")
    P, r = np.asarray(m.transition), np.asarray(m.reward)
    if P.shape != (S, A, S):
        raise InvalidMdpError(f"transition has shape {P.shape}, expected {(S, A, S)}")
    if r.shape != (S, A):
        raise InvalidMdpError(f"reward has shape {r.shape}, expected {(S, A)}")
    for s in range(S):
        for a in range(A):
            row = P[s, a]
            if not np.all(np.isfinite(row)) or row.min() < 0:
                raise InvalidMdpError(f"transition row (s={s}, a={a}) has a negative or non-finite entry: {row}")
            total = row.sum()
            if abs(total - 1.0) > ROW_TOL:
                raise InvalidMdpError(f"transition row (s={s}, a={a}) sums to {total!r}, not 1")
            if not (0.0 <= r[s, a] <= 1.0):
                raise InvalidMdpError(f"reward at (s={s}, a={a}) is {r[s, a]!r}, outside [0, 1]")


@dataclass(frozen=True)
class ValueTables:
    q: np.ndarray  # (H+1, S, A)
    v: np.ndarray  # (H+1, S)

    def greedy_policy(self) -> np.ndarray:
        # np.argmax returns the first maximiser, i.e. ties go to the lowest action.
        return np.argmax(self.q[:-1], axis=-1).astype(np.int64)


def validate_policy(m: Mdp, pi) -> np.ndarray:
    pi = np.asarray(pi)
    if pi.shape != (m.horizon, m.num_states):
        raise ValueError(f"policy has shape {pi.shape}, expected {(m.horizon, m.num_states)}")
    if not np.issubdtype(pi.dtype, np.integer) or pi.min() < 0 or pi.max() >= m.num_actions:
        raise ValueError("policy entries must be action indices in [0, num_actions)")
    return pi.astype(np.int64)


def value_iteration(m: Mdp) -> ValueTables:
    """Optimal Q*/V* by backward induction."""
    S, A, H = m.shape
    q = np.zeros((H + 1, S, A))
    v = np.zeros((H + 1, S))
    for h in range(H - 1, -1, -1):
        q[h] = m.reward + m.transition @ v[h + 1]
        v[h] = q[h].max(axis=1)
    return ValueTables(q, v)


def policy_evaluation(m: Mdp, pi) -> ValueTables:
    """Exact Q^pi/V^pi of a deterministic nonstationary policy."""
    pi = validate_policy(m, pi)
    S, A, H = m.shape
    q = np.zeros((H + 1, S, A))
    v = np.zeros((H + 1, S))
    states = np.arange(S)
    for h in range(H - 1, -1, -1):
        q[h] = m.reward + m.transition @ v[h + 1]
        v[h] = q[h, states, pi[h]]
    return ValueTables(q, v)


def _next_value_variance(m: Mdp, v_next: np.ndarray, s: int, a: int) -> float:
    row = m.transition[s, a]
    mean = row @ v_next
    return max(float(row @ (v_next * v_next) - mean * mean), 0.0)


def policy_variance(m: Mdp, pi, trajectory) -> float:
    """Sum over stages of Var_{s'~P(.|s_h,a_h)}[V^pi_{h+1}(s')] along ``trajectory``.

    ``trajectory`` holds exactly H ``(s, a)`` pairs, one per stage.
    """
    trajectory = list(trajectory)
    if len(trajectory) != m.horizon:
        raise ValueError(f"trajectory needs {m.horizon} (s, a) pairs, got {len(trajectory)}")
    tables = policy_evaluation(m, pi)
    return sum(_next_value_variance(m, tables.v[h + 1], s, a) for h, (s, a) in enumerate(trajectory))


def expected_policy_variance(m: Mdp, pi, s0: int) -> float:
    """E[sum_h sigma^pi_h(s_h, a_h)] for trajectories of ``pi`` started at ``s0``.

    Computed by a forward pass over the state-occupancy distribution.
    """
    pi = validate_policy(m, pi)
    tables = policy_evaluation(m, pi)
    S, _, H = m.shape
    occupancy = np.zeros(S)
    occupancy[s0] = 1.0
    total = 0.0
    states = np.arange(S)
    for h in range(H):
        rows = m.transition[states, pi[h]]  # (S, S)
        vn = tables.v[h + 1]
        sig = np.maximum(rows @ (vn * vn) - (rows @ vn) ** 2, 0.0)
        total += float(occupancy @ sig)
        occupancy = occupancy @ rows
    return total


def inverse_cdf(cum_row: np.ndarray, u: float) -> int:
    """Smallest index whose cumulative mass exceeds ``u`` (ascending state order)."""
    idx = int(np.searchsorted(cum_row, u, side="right"))
    return min(idx, cum_row.shape[0] - 1)


def sample_next_state(m: Mdp, s: int, a: int, rng: np.random.Generator) -> int:
    return inverse_cdf(m.cumulative[s, a], rng.random())
