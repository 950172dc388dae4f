"""Value iteration, policy iteration and finite-horizon dynamic programming
for finite discounted MDPs, built on a finite probability monad."""

from mdpkit.algorithms import (
    SolveResult,
    check_policy_improvement_theorem,
    greedy,
    improve,
    policy_evaluation,
    policy_iteration,
    value_iteration,
)
from mdpkit.dist import Dist, Kernel, bind, compact, expectation, kleisli_compose, kleisli_iterate, ret
from mdpkit.envs import random_mdp, turtle_mdp
from mdpkit.errors import EnumerationTooLarge, NonConvergence, NonFinite
from mdpkit.fixpoint import FixpointConfig, FixpointResult, iterate_to_fixpoint
from mdpkit.fnspace import ValueFn, sup_norm
from mdpkit.horizon import PolicySequence, brute_force_optimal, finite_value, optimal_finite_value
from mdpkit.mdp import DecisionRule, DiscountedProblem, Mdp, bellman_max_op, bellman_op, ltv, ltv_exact

__version__ = "0.1.0"
