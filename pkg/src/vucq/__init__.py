"""Variance-reduced upper-confidence Q-learning for tabular episodic MDPs."""
from .agents import AgentConfig, RegretLog, run_agent, run_doubling, run_ucbvi_baseline, run_vucq
from .bonus import BonusConfig, BonusInputs
from .envs import EnvSpec, make_chain_mdp, make_env, make_random_mdp
from .ledger import BucketLedger, LevelEstimates
from .mdp import Mdp, ValueTables, policy_evaluation, validate_mdp, value_iteration
from .planner import PlanResult, optimism_check, vucqvi_plan

__version__ = "0.1.0"
