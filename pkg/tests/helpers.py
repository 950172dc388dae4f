"""Fuzz generators and dense-matrix oracles shared by the test modules.

The oracles work on plain numpy arrays and never call the code paths they
are used to check.
"""

from __future__ import annotations

import itertools

import numpy as np
from hypothesis import strategies as st

from mdpkit.dist import Dist, Kernel
from mdpkit.envs import SplitMix64, random_dist, random_mdp
from mdpkit.mdp import DecisionRule, DiscountedProblem, Mdp

seeds = st.integers(min_value=0, max_value=2**64 - 1)


@st.composite
def dists(draw, n=None, max_n=8, raw=True):
    """Distributions with optional duplicate outcomes and exact zeros."""
    if n is None:
        n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, 2 * n if raw else n))
    outcomes = draw(st.lists(st.integers(0, n - 1), min_size=k, max_size=k))
    weights = draw(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))
    if sum(weights) == 0.0:
        weights[0] = 1.0
    total = sum(weights)
    return Dist([(w / total, o) for w, o in zip(weights, outcomes)], n)


@st.composite
def kernels(draw, n_in, n_out):
    return Kernel([draw(dists(n=n_out)) for _ in range(n_in)])


def fuzz_problem(seed: int, max_states: int, max_actions: int, gamma: float, reward_range=(-5.0, 5.0)):
    """Random problem with per-state action counts drawn from ``1..max_actions``."""
    rng = SplitMix64(seed)
    n = rng.randint(1, max_states)
    counts = [rng.randint(1, max_actions) for _ in range(n)]
    return DiscountedProblem(random_mdp(rng, n, counts, reward_range), gamma)


def fuzz_p0(seed: int, n: int) -> Dist:
    return random_dist(SplitMix64(seed), n)


# --- dense oracles ---------------------------------------------------------


def dense(p: Dist) -> np.ndarray:
    out = np.zeros(p.n)
    for w, o in p.entries:
        out[o] += w
    return out


def dense_kernel(k: Kernel) -> np.ndarray:
    return np.vstack([dense(row) for row in k.rows])


def rule_matrix(mdp: Mdp, rule: DecisionRule) -> np.ndarray:
    return np.array([[mdp.T(s, rule[s]).prob(sp) for sp in range(mdp.n_states)] for s in range(mdp.n_states)])


def rule_rewards(mdp: Mdp, rule: DecisionRule) -> np.ndarray:
    """Expected immediate reward by explicit triple loop."""
    n = mdp.n_states
    return np.array([sum(mdp.reward(s, rule[s], sp) * mdp.T(s, rule[s]).prob(sp) for sp in range(n)) for s in range(n)])


def exact_value(problem: DiscountedProblem, rule: DecisionRule) -> np.ndarray:
    M = rule_matrix(problem.mdp, rule)
    return np.linalg.solve(np.eye(len(M)) - problem.gamma * M, rule_rewards(problem.mdp, rule))


def brute_force_stationary(problem: DiscountedProblem) -> np.ndarray:
    """Pointwise max of the exact value over every stationary rule."""
    rules = itertools.product(*(range(k) for k in problem.mdp.actions))
    return np.max([exact_value(problem, DecisionRule(r)) for r in rules], axis=0)


def sequence_values_by_sum(problem: DiscountedProblem, p0: Dist, seqs) -> np.ndarray:
    """Forward triple-sum value of each rule sequence."""
    out = []
    for seq in seqs:
        p = dense(p0)
        total = 0.0
        for k, rule in enumerate(seq):
            total += problem.gamma**k * float(p @ rule_rewards(problem.mdp, rule))
            p = p @ rule_matrix(problem.mdp, rule)
        out.append(total)
    return np.array(out)
