"""Experiment runner, CSV output and the partition-determinism probe."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .agents import AgentConfig, RegretLog, run_agent, run_doubling
from .envs import EnvSpec, make_env

REGRET_HEADER = ("episode", "t", "initial_state", "instant_regret", "cum_regret", "replanned", "max_full_level")
SUMMARY_HEADER = ("agent", "seed", "checkpoint_t", "cum_regret")
CHECKPOINTS = (8, 4, 2, 1)  # T/8, T/4, T/2, T


def fmt(x: float) -> str:
    return f"{x:.12g}"


def write_regret_csv(log: RegretLog, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(REGRET_HEADER) + "\n")
            for i in range(len(log)):
                fh.write(f"{log.episode[i]},{log.t[i]},{log.initial_state[i]},{fmt(log.instant_regret[i])},"
                         f"{fmt(log.cum_regret[i])},{int(log.replanned[i])},{log.max_full_level[i]}\n")
    except OSError as exc:
        raise OSError(f"cannot write regret CSV {path}: {exc}") from exc


def read_regret_csv(path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != REGRET_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = list(reader)
    cols = list(zip(*rows)) if rows else [()] * len(REGRET_HEADER)
    out = {}
    for name, col in zip(REGRET_HEADER, cols):
        if name in ("instant_regret", "cum_regret"):
            out[name] = np.array(col, dtype=float)
        elif name == "replanned":
            out[name] = np.array([c == "1" for c in col], dtype=bool)
        else:
            out[name] = np.array(col, dtype=np.int64)
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    env: EnvSpec
    agents: tuple
    T: int
    seeds: tuple
    output: str
    t_guess: Optional[int] = None  # doubling trick when set

    def __post_init__(self):
        if not self.agents or not self.seeds:
            raise ValueError("an experiment needs at least one agent and one seed")


def checkpoint_regret(log: RegretLog, T: int, horizon: int) -> list:
    """Cumulative regret after T/8, T/4, T/2 and T steps (episode granularity)."""
    out = []
    for d in CHECKPOINTS:
        t = T // d
        k = t // horizon
        out.append((t, float(log.cum_regret[k - 1]) if k > 0 else 0.0))
    return out


def run_one(mdp, T, cfg: AgentConfig, t_guess=None, **kw) -> RegretLog:
    if t_guess:
        return run_doubling(mdp, T, t_guess, cfg, **kw)
    return run_agent(mdp, T, cfg, **kw)


def run_experiment(spec: ExperimentSpec):
    """Run every (agent, seed) pair; write one CSV each plus ``summary.csv``.

    Returns ``(logs, summary_rows)`` with ``logs`` keyed by (agent name, seed).
    """
    mdp = make_env(spec.env)
    os.makedirs(spec.output, exist_ok=True)
    logs = {}
    summary = []
    for agent in spec.agents:
        for seed in spec.seeds:
            cfg = replace(agent, seed=seed)
            log = run_one(mdp, spec.T, cfg, spec.t_guess)
            logs[(cfg.name, seed)] = log
            write_regret_csv(log, os.path.join(spec.output, f"{cfg.name}_seed{seed}.csv"))
            summary.extend((cfg.name, seed, t, r) for t, r in checkpoint_regret(log, spec.T, mdp.horizon))
    path = os.path.join(spec.output, "summary.csv")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(SUMMARY_HEADER) + "\n")
            for name, seed, t, r in summary:
                fh.write(f"{name},{seed},{t},{fmt(r)}\n")
    except OSError as exc:
        raise OSError(f"cannot write summary CSV {path}: {exc}") from exc
    return logs, summary


@dataclass
class ProbeReport:
    # (s, a, level) -> fill episode per seed, in seed order; only levels filled under every seed
    fill_episodes: dict = field(default_factory=dict)
    # (s, a, level) filled under some seeds but not all
    partial: list = field(default_factory=list)
    spread: float = 0.0

    def rows(self):
        for (s, a, j), eps in sorted(self.fill_episodes.items()):
            eps = np.asarray(eps, dtype=float)
            yield s, a, j, eps.min(), eps.max(), eps.mean()


def partition_probe(mdp, T: int, cfg: AgentConfig, seeds) -> ProbeReport:
    """How much the episode at which each bucket level fills varies across seeds.

    ``spread`` is the max over (s, a, level) of (range of fill episode) / (mean fill episode).
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError("the probe needs at least two seeds")
    per_seed = []
    for seed in seeds:
        log = run_agent(mdp, T, replace(cfg, seed=seed))
        per_seed.append({(s, a, j): k for k, s, a, j in log.level_fills})
    keys = set().union(*per_seed)
    report = ProbeReport()
    for key in sorted(keys):
        eps = [d.get(key) for d in per_seed]
        if any(e is None for e in eps):
            report.partial.append(key)
            continue
        report.fill_episodes[key] = eps
        arr = np.asarray(eps, dtype=float)
        report.spread = max(report.spread, float((arr.max() - arr.min()) / arr.mean()))
    return report
