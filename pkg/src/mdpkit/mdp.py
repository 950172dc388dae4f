"""Finite Markov decision processes and their Bellman operators.

States are ``0..n-1``; state ``s`` has its own action set ``0..A(s)-1``.
Transitions are :class:`~mdpkit.dist.Dist` objects and rewards live on
``(s, a, s')`` triples.  Dense padded arrays are cached at construction so
that the operators are plain numpy expressions.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from mdpkit.dist import Dist, Kernel, expectation, kleisli_iterate, ret
from mdpkit.fixpoint import FixpointConfig, FixpointResult, iterate_to_fixpoint
from mdpkit.fnspace import ValueFn

RewardSpec = Callable[[int, int, int], float] | Sequence[Sequence[Sequence[float]]]


@dataclass(frozen=True)
class DecisionRule:
    """One action index per state."""

    choice: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "choice", tuple(int(a) for a in self.choice))

    def __getitem__(self, s: int) -> int:
        return self.choice[s]

    def __len__(self) -> int:
        return len(self.choice)

    def __iter__(self) -> Iterator[int]:
        return iter(self.choice)


class Mdp:
    """Validated, immutable finite MDP with per-state action sets."""

    def __init__(
        self,
        transitions: Sequence[Sequence[Dist]],
        rewards: RewardSpec,
        state_labels: Sequence[str] | None = None,
        action_labels: Sequence[Sequence[str]] | None = None,
    ):
        n = len(transitions)
        if n < 1:
            raise ValueError("an MDP needs at least one state")
        self._transitions = tuple(tuple(row) for row in transitions)
        self._actions = tuple(len(row) for row in self._transitions)
        for s, count in enumerate(self._actions):
            if count < 1:
                raise ValueError(f"state {s} has no actions")
            for a, d in enumerate(self._transitions[s]):
                if not isinstance(d, Dist):
                    raise TypeError(f"T({s},{a}) is not a Dist")
                if d.n != n:
                    raise ValueError(f"T({s},{a}) ranges over {d.n} states, expected {n}")

        a_max = max(self._actions)
        P = np.zeros((n, a_max, n))
        R = np.zeros((n, a_max, n))
        for s in range(n):
            for a in range(self._actions[s]):
                P[s, a] = self._transitions[s][a].to_array()
                if callable(rewards):
                    R[s, a] = [rewards(s, a, sp) for sp in range(n)]
                else:
                    row = np.asarray(rewards[s][a], dtype=float)
                    if row.shape != (n,):
                        raise ValueError(f"rewards[{s}][{a}] has shape {row.shape}, expected ({n},)")
                    R[s, a] = row
        if not np.all(np.isfinite(R)):
            raise ValueError("rewards must be finite")
        valid = np.arange(a_max)[None, :] < np.array(self._actions)[:, None]
        rbar = np.where(valid, np.einsum("saj,saj->sa", P, R), -np.inf)
        for arr in (P, R, rbar, valid):
            arr.flags.writeable = False
        self._P, self._R, self._rbar, self._valid = P, R, rbar, valid

        if state_labels is None:
            state_labels = [str(s) for s in range(n)]
        if action_labels is None:
            action_labels = [[str(a) for a in range(k)] for k in self._actions]
        self._state_labels = tuple(str(x) for x in state_labels)
        self._action_labels = tuple(tuple(str(x) for x in row) for row in action_labels)
        if len(self._state_labels) != n or len(set(self._state_labels)) != n:
            raise ValueError("state labels must be unique, one per state")
        for s, row in enumerate(self._action_labels):
            if len(row) != self._actions[s] or len(set(row)) != len(row):
                raise ValueError(f"action labels of state {s} must be unique, one per action")

    @classmethod
    def from_rectangular(cls, P, R, **labels) -> Mdp:
        """Build from dense ``P[s, a, s']`` and ``R[s, a, s']`` (or ``R[s, a]``)."""
        P = np.asarray(P, dtype=float)
        R = np.asarray(R, dtype=float)
        if R.ndim == 2:
            R = np.repeat(R[:, :, None], P.shape[2], axis=2)
        transitions = [[Dist.from_probs(P[s, a]) for a in range(P.shape[1])] for s in range(P.shape[0])]
        return cls(transitions, R, **labels)

    @property
    def n_states(self) -> int:
        return len(self._transitions)

    @property
    def actions(self) -> tuple[int, ...]:
        return self._actions

    @property
    def transitions(self) -> tuple[tuple[Dist, ...], ...]:
        return self._transitions

    @property
    def state_labels(self) -> tuple[str, ...]:
        return self._state_labels

    @property
    def action_labels(self) -> tuple[tuple[str, ...], ...]:
        return self._action_labels

    @property
    def P(self) -> np.ndarray:
        """Padded transition tensor ``(n, max A, n)``; padding rows are zero."""
        return self._P

    @property
    def R(self) -> np.ndarray:
        return self._R

    @property
    def rbar(self) -> np.ndarray:
        """Expected immediate rewards ``(n, max A)``; invalid actions hold ``-inf``."""
        return self._rbar

    @property
    def valid(self) -> np.ndarray:
        return self._valid

    @property
    def reward_bound(self) -> float:
        """``D = max |r(s, a, s')|`` over valid triples."""
        return float(np.max(np.abs(self._R[self._valid]))) if self._R.size else 0.0

    def T(self, s: int, a: int) -> Dist:
        self._check_action(s, a)
        return self._transitions[s][a]

    def reward(self, s: int, a: int, sp: int) -> float:
        self._check_action(s, a)
        return float(self._R[s, a, sp])

    def _check_action(self, s: int, a: int) -> None:
        if not 0 <= s < self.n_states:
            raise IndexError(f"state {s} out of range")
        if not 0 <= a < self._actions[s]:
            raise IndexError(f"action {a} out of range at state {s} (A(s)={self._actions[s]})")

    def check_rule(self, rule: DecisionRule) -> None:
        if len(rule) != self.n_states:
            raise ValueError(f"rule has {len(rule)} entries, MDP has {self.n_states} states")
        for s, a in enumerate(rule):
            if not 0 <= a < self._actions[s]:
                raise ValueError(f"rule picks action {a} at state {s}, but A(s)={self._actions[s]}")

    def __repr__(self) -> str:
        return f"Mdp(n_states={self.n_states}, actions={self._actions})"


@dataclass(frozen=True)
class DiscountedProblem:
    mdp: Mdp
    gamma: float

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError(f"discount must lie in [0, 1), got {self.gamma}")


def _mdp(obj: Mdp | DiscountedProblem) -> Mdp:
    return obj.mdp if isinstance(obj, DiscountedProblem) else obj


def n_rules(mdp: Mdp) -> int:
    return math.prod(mdp.actions)


def all_rules(mdp: Mdp) -> Iterator[DecisionRule]:
    """Every deterministic decision rule, in lexicographic order."""
    for choice in itertools.product(*(range(k) for k in mdp.actions)):
        yield DecisionRule(choice)


def expected_immediate_reward(mdp: Mdp | DiscountedProblem, s: int, a: int) -> float:
    mdp = _mdp(mdp)
    mdp._check_action(s, a)
    return float(mdp.rbar[s, a])


def step_expt_reward(mdp: Mdp | DiscountedProblem, rule: DecisionRule) -> ValueFn:
    mdp = _mdp(mdp)
    mdp.check_rule(rule)
    return ValueFn(mdp.rbar[np.arange(mdp.n_states), rule.choice])


def transition_matrix(mdp: Mdp | DiscountedProblem, rule: DecisionRule) -> np.ndarray:
    """Row-stochastic matrix of the kernel induced by ``rule``."""
    mdp = _mdp(mdp)
    mdp.check_rule(rule)
    return mdp.P[np.arange(mdp.n_states), rule.choice]


def kernel_for_rule(mdp: Mdp | DiscountedProblem, rule: DecisionRule) -> Kernel:
    mdp = _mdp(mdp)
    mdp.check_rule(rule)
    return Kernel([mdp.transitions[s][a] for s, a in enumerate(rule)])


def expt_reward_at_step(problem: Mdp | DiscountedProblem, rule: DecisionRule, s0: int, k: int) -> float:
    """Expected one-step reward collected at step ``k`` starting from ``s0``."""
    mdp = _mdp(problem)
    pk = kleisli_iterate(ret(s0, mdp.n_states), kernel_for_rule(mdp, rule), k)
    return expectation(pk, step_expt_reward(mdp, rule))


def bellman_op(problem: DiscountedProblem, rule: DecisionRule) -> Callable[[ValueFn], ValueFn]:
    """``W -> rbar_rule + gamma * T_rule W``."""
    problem.mdp.check_rule(rule)
    rows = np.arange(problem.mdp.n_states)
    choice = np.array(rule.choice)

    # read off the same backup table as the max operator so the two agree bit for bit
    def apply(W: ValueFn) -> ValueFn:
        return ValueFn(q_values(problem, W)[rows, choice])

    return apply


def q_values(problem: DiscountedProblem, W: ValueFn) -> np.ndarray:
    """One-step backups ``rbar(s,a) + gamma E_{T(s,a)} W``; invalid actions are ``-inf``."""
    mdp = problem.mdp
    if len(W) != mdp.n_states:
        raise ValueError(f"value function has {len(W)} entries, MDP has {mdp.n_states} states")
    return mdp.rbar + problem.gamma * (mdp.P @ W.values)


def bellman_max_op(problem: DiscountedProblem) -> Callable[[ValueFn], ValueFn]:
    """``W -> max_a (rbar(s,a) + gamma E_{T(s,a)} W)`` pointwise."""

    def apply(W: ValueFn) -> ValueFn:
        return ValueFn(np.max(q_values(problem, W), axis=1))

    return apply


def ltv_partial(problem: DiscountedProblem, rule: DecisionRule, n: int) -> ValueFn:
    """``n`` applications of the rule's Bellman operator to zero."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    B = bellman_op(problem, rule)
    V = ValueFn.zeros(problem.mdp.n_states)
    for _ in range(n):
        V = B(V)
    return V


def evaluate_policy(
    problem: DiscountedProblem, rule: DecisionRule, cfg: FixpointConfig | None = None
) -> FixpointResult:
    cfg = (cfg or FixpointConfig()).with_gamma(problem.gamma)
    return iterate_to_fixpoint(bellman_op(problem, rule), ValueFn.zeros(problem.mdp.n_states), cfg)


def ltv(problem: DiscountedProblem, rule: DecisionRule, cfg: FixpointConfig | None = None) -> ValueFn:
    """Long-term value of the stationary policy, as the Bellman fixed point."""
    return evaluate_policy(problem, rule, cfg).point


def ltv_exact(problem: DiscountedProblem, rule: DecisionRule) -> ValueFn:
    """Solve ``(I - gamma M) V = rbar`` directly.  Test oracle."""
    M = transition_matrix(problem.mdp, rule)
    r = step_expt_reward(problem.mdp, rule).values
    A = np.eye(problem.mdp.n_states) - problem.gamma * M
    return ValueFn(np.linalg.solve(A, r))


def q_function(
    problem: DiscountedProblem, rule: DecisionRule, cfg: FixpointConfig | None = None
) -> Callable[[int, int], float]:
    """``(s, a) -> rbar(s,a) + gamma E_{T(s,a)} V_rule``."""
    Q = q_values(problem, ltv(problem, rule, cfg))
    mdp = problem.mdp

    def q(s: int, a: int) -> float:
        mdp._check_action(s, a)
        return float(Q[s, a])

    return q
