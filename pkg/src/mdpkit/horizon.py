"""Finite-horizon values over non-stationary rule sequences.

A sequence ``(pi_0, ..., pi_{n-1})`` applies ``pi_k`` at step ``k``.  Its
value paired with an initial distribution ``p0`` is

    sum_k gamma**k * E_{p_k}[rbar_{pi_k}],    p_k = p0 >=> T_{pi_0} >=> ... >=> T_{pi_{k-1}}

``optimal_finite_value`` computes the horizon-n optimum by applying the
optimality operator ``n`` times to zero; ``brute_force_optimal`` gets the
same number by enumerating every sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mdpkit.algorithms import greedy
from mdpkit.dist import Dist, bind, compact, expectation
from mdpkit.errors import EnumerationTooLarge
from mdpkit.fnspace import ValueFn
from mdpkit.mdp import (
    DecisionRule,
    DiscountedProblem,
    Mdp,
    all_rules,
    bellman_max_op,
    bellman_op,
    kernel_for_rule,
    n_rules,
    step_expt_reward,
    transition_matrix,
)

ENUMERATION_LIMIT = 10**6


@dataclass(frozen=True)
class PolicySequence:
    rules: tuple[DecisionRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, k):
        return self.rules[k]

    @classmethod
    def constant(cls, rule: DecisionRule, n: int) -> PolicySequence:
        return cls((rule,) * n)


def _check_p0(mdp: Mdp, p0: Dist) -> None:
    if p0.n != mdp.n_states:
        raise ValueError(f"initial distribution has {p0.n} outcomes, MDP has {mdp.n_states} states")


def sequence_kleisli_iter(mdp: Mdp | DiscountedProblem, p0: Dist, seq: PolicySequence, k: int) -> Dist:
    """State distribution after the first ``k`` rules of ``seq``."""
    mdp = mdp.mdp if isinstance(mdp, DiscountedProblem) else mdp
    _check_p0(mdp, p0)
    if not 0 <= k <= len(seq):
        raise ValueError(f"k={k} outside 0..{len(seq)}")
    p = p0
    for rule in seq.rules[:k]:
        p = compact(bind(p, kernel_for_rule(mdp, rule)))
    return p


def finite_value(problem: DiscountedProblem, p0: Dist, seq: PolicySequence) -> float:
    """Forward sum of discounted expected step rewards."""
    mdp = problem.mdp
    _check_p0(mdp, p0)
    total = 0.0
    p = p0
    for k, rule in enumerate(seq):
        total += problem.gamma**k * expectation(p, step_expt_reward(mdp, rule))
        p = compact(bind(p, kernel_for_rule(mdp, rule)))
    return total


def sequence_value(problem: DiscountedProblem, seq: PolicySequence) -> ValueFn:
    """Per-state value of ``seq``, built from the last rule backwards."""
    V = ValueFn.zeros(problem.mdp.n_states)
    for rule in reversed(seq.rules):
        V = bellman_op(problem, rule)(V)
    return V


def finite_value_recursive(problem: DiscountedProblem, p0: Dist, seq: PolicySequence) -> float:
    """Head-recursive evaluation: pair ``p0`` with ``rbar_head + gamma T_head V_tail``."""
    _check_p0(problem.mdp, p0)
    return expectation(p0, sequence_value(problem, seq))


@dataclass(frozen=True)
class HorizonSolution:
    value: ValueFn
    sequence: PolicySequence
    # levels[k] is the optimum with k steps to go
    levels: tuple[ValueFn, ...]

    def pair(self, p0: Dist) -> float:
        return expectation(p0, self.value)


def optimal_finite_value(problem: DiscountedProblem, n: int) -> HorizonSolution:
    """``n`` applications of the optimality operator to zero, with the optimal sequence.

    The rule for step ``k`` is greedy against the optimum with ``n-k-1``
    steps remaining.
    """
    if n < 0:
        raise ValueError(f"horizon must be >= 0, got {n}")
    B = bellman_max_op(problem)
    levels = [ValueFn.zeros(problem.mdp.n_states)]
    for _ in range(n):
        levels.append(B(levels[-1]))
    rules = tuple(greedy(problem, levels[n - 1 - k]) for k in range(n))
    return HorizonSolution(levels[n], PolicySequence(rules), tuple(levels))


def brute_force_optimal(
    problem: DiscountedProblem, p0: Dist, n: int, limit: int = ENUMERATION_LIMIT
) -> tuple[float, PolicySequence]:
    """Exhaustive maximum of :func:`finite_value` over all length-``n`` sequences.

    Sequences are enumerated in lexicographic order of rule indices and
    ties resolve to the first one.  Raises :class:`EnumerationTooLarge`
    when more than ``limit`` sequences would be needed.
    """
    mdp = problem.mdp
    _check_p0(mdp, p0)
    if n < 0:
        raise ValueError(f"horizon must be >= 0, got {n}")
    if n == 0:
        return 0.0, PolicySequence()
    count = n_rules(mdp) ** n
    if count > limit:
        raise EnumerationTooLarge(f"{count} sequences exceed the enumeration limit of {limit}")

    rules = list(all_rules(mdp))
    R = len(rules)
    M = np.stack([transition_matrix(mdp, r) for r in rules])
    rbar = np.stack([step_expt_reward(mdp, r).values for r in rules])

    # prefix tree, one row per prefix in lexicographic order
    dists = p0.to_array()[None, :]
    acc = np.zeros(1)
    for k in range(n):
        acc = (acc[:, None] + problem.gamma**k * (dists @ rbar.T)).reshape(-1)
        if k < n - 1:
            dists = np.einsum("mi,rij->mrj", dists, M).reshape(-1, mdp.n_states)
    best = int(np.argmax(acc))

    digits = []
    for _ in range(n):
        best, d = divmod(best, R)
        digits.append(d)
    seq = PolicySequence(tuple(rules[d] for d in reversed(digits)))
    return float(np.max(acc)), seq
