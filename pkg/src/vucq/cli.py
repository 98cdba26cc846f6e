"""Command line: ``vucq run | probe | oracle``."""
from __future__ import annotations

import argparse
import sys

from .agents import AgentConfig
from .bonus import BonusConfig
from .envs import EnvSpec, make_env
from .harness import ExperimentSpec, fmt, partition_probe, run_experiment
from .mdp import value_iteration

ALG_FLAGS = {"vucq-hoeffding": "vucq_hoeffding", "vucq-bernstein": "vucq_bernstein", "ucbvi-stage": "ucbvi_stage"}


def _add_env_flags(p):
    p.add_argument("--env", choices=("chain", "random"), default="chain")
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--horizon", type=int, default=5)
    p.add_argument("--gen-seed", type=int, default=0, help="seed for random environment generation")
    p.add_argument("--p-fwd", type=float, default=0.7)
    p.add_argument("--r-left", type=float, default=0.05)
    p.add_argument("--r-right", type=float, default=1.0)


def _add_agent_flags(p):
    p.add_argument("--alg", choices=tuple(ALG_FLAGS), default="vucq-hoeffding")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c3", type=float, default=1.0)
    p.add_argument("--beta", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--h-cap", type=int, default=None, help="upper limit on the H-bucket size")
    p.add_argument("--start", default="fixed:0", help="fixed:<state> or uniform")


def _parse_seeds(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog="vucq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run agents and write regret CSVs")
    _add_env_flags(run)
    _add_agent_flags(run)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--seeds", type=_parse_seeds, default=None, help="comma-separated seeds; overrides --seed")
    run.add_argument("--doubling", type=int, default=None, metavar="T_GUESS")
    run.add_argument("--out", required=True)

    probe = sub.add_parser("probe", help="measure seed dependence of the bucket partition")
    _add_env_flags(probe)
    _add_agent_flags(probe)
    probe.add_argument("--num-seeds", type=int, default=5)
    probe.add_argument("--first-seed", type=int, default=0)

    oracle = sub.add_parser("oracle", help="print V* and Q* of an environment as CSV")
    _add_env_flags(oracle)
    return parser


def _env_spec(args):
    return EnvSpec(kind="chain" if args.env == "chain" else "random_dense", num_states=args.states,
                   num_actions=args.actions, horizon=args.horizon, gen_seed=args.gen_seed,
                   p_fwd=args.p_fwd, r_left=args.r_left, r_right=args.r_right)


def _agent_config(args, seed=0):
    alg = ALG_FLAGS[args.alg]
    beta = 4
    if args.beta is not None:
        if alg != "vucq_bernstein":
            print(f"warning: --beta is ignored by {args.alg}", file=sys.stderr)
        else:
            beta = args.beta
    if args.start == "uniform":
        rule, s0 = "uniform_random", 0
    elif args.start.startswith("fixed:"):
        rule, s0 = "fixed", int(args.start.split(":", 1)[1])
    else:
        raise ValueError(f"--start must be fixed:<state> or uniform, got {args.start!r}")
    bonus = BonusConfig(c0=args.c0, c1=args.c1, c3=args.c3, beta=beta, delta=args.delta,
                        mode="bernstein" if alg == "vucq_bernstein" else "hoeffding")
    return AgentConfig(bonus=bonus, algorithm=alg, h_cap_override=args.h_cap,
                       initial_state_rule=rule, initial_state=s0, seed=seed)


def _check_steps(args, env):
    if args.steps < env.horizon:
        raise ValueError(f"--steps must cover at least one episode (horizon {env.horizon})")


def cmd_run(args):
    env = _env_spec(args)
    _check_steps(args, env)
    seeds = args.seeds if args.seeds else (args.seed,)
    spec = ExperimentSpec(env=env, agents=(_agent_config(args),), T=args.steps, seeds=seeds,
                          output=args.out, t_guess=args.doubling)
    _, summary = run_experiment(spec)
    for name, seed, t, r in summary:
        if t == args.steps:
            print(f"{name} seed={seed} steps={t} cum_regret={fmt(r)}")
    return 0


def cmd_probe(args):
    env = _env_spec(args)
    _check_steps(args, env)
    seeds = range(args.first_seed, args.first_seed + args.num_seeds)
    report = partition_probe(make_env(env), args.steps, _agent_config(args), seeds)
    print("s,a,level,min_fill_episode,max_fill_episode,mean_fill_episode")
    for s, a, j, lo, hi, mean in report.rows():
        print(f"{s},{a},{j},{int(lo)},{int(hi)},{fmt(mean)}")
    print(f"# spread={fmt(report.spread)} partially_filled={len(report.partial)}")
    return 0


def cmd_oracle(args):
    m = make_env(_env_spec(args))
    tables = value_iteration(m)
    cols = ",".join(f"q_a{a}" for a in range(m.num_actions))
    print(f"h,s,v,{cols}")
    for h in range(m.horizon):
        for s in range(m.num_states):
            q = ",".join(fmt(x) for x in tables.q[h, s])
            print(f"{h + 1},{s},{fmt(tables.v[h, s])},{q}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"run": cmd_run, "probe": cmd_probe, "oracle": cmd_oracle}[args.command]
    try:
        return handler(args)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
