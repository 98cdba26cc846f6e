"""Exploration bonuses and the reference-vector variance estimate.

The ``*_kernel`` functions take plain numbers (or broadcastable numpy arrays)
and are shared by both planner backends; ``*_nb`` are their numba builds.
The public wrappers take a :class:`BonusConfig` / :class:`BonusInputs`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._accel import njit

HOEFFDING = 0
BERNSTEIN = 1
MODES = {"hoeffding": HOEFFDING, "bernstein": BERNSTEIN}


@dataclass(frozen=True)
class BonusConfig:
    c0: float = 1.0
    c1: float = 1.0
    c3: float = 1.0
    beta: int = 4
    delta: float = 0.05
    t_budget: int = 1
    mode: str = "hoeffding"
    # Multiplies every vUCQ bonus; 0.0 gives the zero-bonus negative control.
    scale: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown bonus mode {self.mode!r}; expected one of {sorted(MODES)}")
        if int(self.beta) != self.beta or self.beta < 3:
            raise ValueError(f"beta must be an integer >= 3, got {self.beta}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if min(self.c0, self.c1, self.c3) <= 0:
            raise ValueError("c0, c1, c3 must be positive")
        if self.t_budget < 1:
            raise ValueError(f"t_budget must be positive, got {self.t_budget}")
        if self.scale < 0:
            raise ValueError("bonus scale must be nonnegative")

    @property
    def mode_id(self) -> int:
        return MODES[self.mode]

    @property
    def bucket_exponent(self) -> int:
        """Power of H in the H-bucket size: 3 for Hoeffding, beta for Bernstein."""
        return 3 if self.mode == "hoeffding" else int(self.beta)


@dataclass(frozen=True)
class BonusInputs:
    h: int
    H: int
    j: int
    full_lv: int
    sigma_hat: Optional[float] = None

    def __post_init__(self):
        if not 1 <= self.h <= self.H:
            raise ValueError(f"stage {self.h} outside 1..{self.H}")
        if self.j < 1 or self.full_lv < 0:
            raise ValueError("need j >= 1 and full_lv >= 0")
        if self.sigma_hat is not None and self.sigma_hat < 0:
            raise ValueError("sigma_hat must be nonnegative")

    @property
    def level(self) -> int:
        return min(self.j, self.full_lv)


def big_l(cfg: BonusConfig, num_states: int, num_actions: int, horizon: int) -> float:
    arg = num_states * num_actions * horizon * cfg.t_budget / cfg.delta
    return max(1.0, cfg.c3 * math.log(arg))


def hoeffding_kernel(L, remaining, m):
    """``remaining`` is H - h, ``m`` the effective level min(j, full level)."""
    return 0.5 * remaining * np.sqrt(L / 2.0 ** m)


def sigma_hat_kernel(p, v):
    mean = np.sum(p * v, axis=-1)
    return np.maximum(np.sum(p * v * v, axis=-1) - mean * mean, 0.0)


def bernstein_b1_kernel(L, remaining, m, sigma, beta):
    ratio = L / 2.0 ** m
    # (H-h)^((5-beta)/2) is read as 0 at the last stage so b1 vanishes there for every beta.
    tail_base = np.maximum(remaining, 0.0)
    tail = np.where(tail_base > 0, tail_base, 1.0) ** ((5.0 - beta) / 2.0)
    tail = np.where(tail_base > 0, tail, 0.0)
    return (0.25 * np.sqrt(sigma * ratio)
            + 0.25 * remaining * ratio
            + 0.25 * remaining * ratio ** 0.75
            + 0.25 * tail * np.sqrt(ratio))


def combined_kernel(L, remaining, m, sigma, beta, mode):
    b = hoeffding_kernel(L, remaining, m)
    if mode == BERNSTEIN:
        return np.minimum(bernstein_b1_kernel(L, remaining, m, sigma, beta), b)
    return b


def baseline_kernel(L, n_visits, v_norm):
    return v_norm * np.sqrt(L / np.maximum(n_visits, 1))


@njit
def hoeffding_nb(L, remaining, m):
    return 0.5 * remaining * math.sqrt(L / 2.0 ** m)


@njit
def bernstein_b1_nb(L, remaining, m, sigma, beta):
    ratio = L / 2.0 ** m
    tail = remaining ** ((5.0 - beta) / 2.0) if remaining > 0 else 0.0
    return (0.25 * math.sqrt(sigma * ratio)
            + 0.25 * remaining * ratio
            + 0.25 * remaining * ratio ** 0.75
            + 0.25 * tail * math.sqrt(ratio))


@njit
def combined_nb(L, remaining, m, sigma, beta, mode):
    b = hoeffding_nb(L, remaining, m)
    if mode == BERNSTEIN:
        return min(bernstein_b1_nb(L, remaining, m, sigma, beta), b)
    return b


def hoeffding_bonus(L: float, inputs: BonusInputs) -> float:
    return float(hoeffding_kernel(L, inputs.H - inputs.h, inputs.level))


def sigma_hat(p_tilde, v_bar) -> float:
    """Variance of ``v_bar`` under ``p_tilde``, clamped at zero."""
    return float(sigma_hat_kernel(np.asarray(p_tilde, dtype=float), np.asarray(v_bar, dtype=float)))


def bernstein_b1(L: float, inputs: BonusInputs, beta: int) -> float:
    if inputs.sigma_hat is None:
        raise ValueError("bernstein bonus needs sigma_hat")
    return float(bernstein_b1_kernel(L, inputs.H - inputs.h, inputs.level, inputs.sigma_hat, beta))


def combined_bonus(L: float, inputs: BonusInputs, cfg: BonusConfig) -> float:
    if cfg.mode == "bernstein":
        return min(bernstein_b1(L, inputs, cfg.beta), hoeffding_bonus(L, inputs))
    return hoeffding_bonus(L, inputs)


def baseline_bonus(L: float, n_visits: int, v_next_inf_norm: float) -> float:
    return float(baseline_kernel(L, n_visits, v_next_inf_norm))
