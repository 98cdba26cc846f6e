"""Variance-reduced successive-refinement value iteration (vUCQVI).

Level j = 1..l* refines the previous level's Q-table with one backward sweep.
Each pair uses the estimates of level min(j, l*(s,a)) and a reference vector
from the level below that, so pairs with few samples keep their last
estimate while better-sampled pairs keep refining.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit
from .bonus import BonusConfig, combined_kernel, combined_nb, hoeffding_kernel, hoeffding_nb, sigma_hat_kernel
from .ledger import LevelEstimates


@dataclass(frozen=True)
class PlanResult:
    levels: int
    q: np.ndarray  # (levels+1, H+1, S, A); row h-1 is stage h, row H is zero
    v: np.ndarray  # (levels+1, H+1, S)
    policy: np.ndarray  # (H, S)
    bonus: np.ndarray  # (levels+1, H, S, A), bonus used at (j, h, s, a); level 0 unused
    hoeffding: np.ndarray  # Hoeffding bonus at the same query points

    @property
    def top_q(self) -> np.ndarray:
        return self.q[self.levels]

    @property
    def top_v(self) -> np.ndarray:
        return self.v[self.levels]

    def dump_csv(self, path) -> None:
        """Per-level V_1 vectors, one row per level."""
        S = self.v.shape[-1]
        with open(path, "w", newline="\n") as fh:
            fh.write("level," + ",".join(f"v1_s{s}" for s in range(S)) + "\n")
            for j in range(self.levels + 1):
                fh.write(f"{j}," + ",".join(f"{x:.12g}" for x in self.v[j, 0]) + "\n")


def _initial_tables(levels, H, S, A):
    q = np.zeros((levels + 1, H + 1, S, A))
    v = np.zeros((levels + 1, H + 1, S))
    caps = (H - np.arange(H + 1)).astype(np.float64)  # H - h + 1 at stage h = row + 1
    q[:] = caps[None, :, None, None]
    v[:] = caps[None, :, None]
    return q, v


@njit
def _sweep_nb(q, v, bonus_out, hoef_out, p_g, p_h, full_lv, r_hat, L, beta, mode, scale):
    levels = q.shape[0] - 1
    H = q.shape[1] - 1
    S = q.shape[2]
    A = q.shape[3]
    for j in range(1, levels + 1):
        for s in range(S):
            q[j, H, s, :] = 0.0
            v[j, H, s] = 0.0
        for hi in range(H - 1, -1, -1):
            remaining = H - 1 - hi
            for s in range(S):
                best = -np.inf
                for a in range(A):
                    fl = full_lv[s, a]
                    if fl == 0:
                        val = float(H - hi)
                    else:
                        if j <= fl:
                            m = j
                        else:
                            m = fl
                        ref = m - 1
                        pt_v = 0.0
                        pt_vv = 0.0
                        ph_d = 0.0
                        for s2 in range(S):
                            vb = v[ref, hi + 1, s2]
                            pt = p_g[m, s, a, s2]
                            pt_v += pt * vb
                            pt_vv += pt * vb * vb
                            ph_d += p_h[m, hi, s, a, s2] * (v[j, hi + 1, s2] - vb)
                        sig = pt_vv - pt_v * pt_v
                        if sig < 0.0:
                            sig = 0.0
                        b = scale * combined_nb(L, remaining, m, sig, beta, mode)
                        bonus_out[j, hi, s, a] = b
                        hoef_out[j, hi, s, a] = scale * hoeffding_nb(L, remaining, m)
                        val = r_hat[s, a] + pt_v + ph_d + b
                        prev = q[j - 1, hi, s, a]
                        if prev < val:
                            val = prev
                        if val < 0.0:
                            val = 0.0
                    q[j, hi, s, a] = val
                    if val > best:
                        best = val
                v[j, hi, s] = best


def _sweep_np(q, v, bonus_out, hoef_out, p_g, p_h, full_lv, r_hat, L, beta, mode, scale):
    levels = q.shape[0] - 1
    H = q.shape[1] - 1
    S, A = full_lv.shape
    si, ai = np.meshgrid(np.arange(S), np.arange(A), indexing="ij")
    active = full_lv > 0
    for j in range(1, levels + 1):
        q[j, H] = 0.0
        v[j, H] = 0.0
        m = np.minimum(j, full_lv)
        ref = np.maximum(m - 1, 0)
        pt = p_g[m, si, ai]  # (S, A, S)
        for hi in range(H - 1, -1, -1):
            remaining = H - 1 - hi
            ph = p_h[m, hi, si, ai]
            vbar = v[ref, hi + 1]  # (S, A, S)
            sig = sigma_hat_kernel(pt, vbar)
            b = scale * combined_kernel(L, remaining, m, sig, beta, mode)
            est = r_hat + np.sum(pt * vbar, axis=-1) + np.sum(ph * (v[j, hi + 1] - vbar), axis=-1) + b
            val = np.maximum(np.minimum(est, q[j - 1, hi]), 0.0)
            q[j, hi] = np.where(active, val, float(H - hi))
            bonus_out[j, hi] = np.where(active, b, 0.0)
            hoef_out[j, hi] = np.where(active, scale * hoeffding_kernel(L, remaining, m), 0.0)
            v[j, hi] = q[j, hi].max(axis=1)


def vucqvi_plan(estimates: LevelEstimates, full_levels, r_hat, cfg: BonusConfig, L: float, H: int,
                use_numba=None) -> PlanResult:
    """Successively refine Q over levels 1..l* and return the greedy policy at the top level."""
    full_levels = np.asarray(full_levels, dtype=np.int64)
    if not np.array_equal(full_levels, estimates.full_levels):
        raise ValueError("ledger view full levels disagree with the estimates")
    if estimates.p_h.shape[1] != H:
        raise ValueError(f"estimates were built for horizon {estimates.p_h.shape[1]}, not {H}")
    levels = int(full_levels.max())
    if levels != estimates.levels:
        raise ValueError(f"estimates cover {estimates.levels} levels but the ledger view has {levels}")
    S, A = full_levels.shape
    q, v = _initial_tables(levels, H, S, A)
    bonus = np.zeros((levels + 1, H, S, A))
    hoef = np.zeros((levels + 1, H, S, A))
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    sweep = _sweep_nb if use_numba else _sweep_np
    sweep(q, v, bonus, hoef, estimates.p_g, estimates.p_h, full_levels,
          np.asarray(r_hat, dtype=np.float64), float(L), float(cfg.beta), cfg.mode_id, float(cfg.scale))
    policy = np.argmax(q[levels, :H], axis=-1).astype(np.int64)
    return PlanResult(levels, q, v, policy, bonus, hoef)


def optimism_check(plan: PlanResult, oracle_q, tol: float = 1e-9) -> np.ndarray:
    """(levels+1, H) table: does Q*_h <= Q^(j)_h + tol hold at every (s, a)?"""
    H = plan.q.shape[1] - 1
    oracle_q = np.asarray(getattr(oracle_q, "q", oracle_q))[:H]
    return np.all(oracle_q[None] <= plan.q[:, :H] + tol, axis=(2, 3))
