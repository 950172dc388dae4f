"""Value iteration, greedy extraction and policy iteration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from mdpkit.errors import NonConvergence
from mdpkit.fixpoint import FixpointConfig, FixpointResult, iterate_to_fixpoint
from mdpkit.fnspace import ValueFn, le_within
from mdpkit.mdp import (
    DecisionRule,
    DiscountedProblem,
    bellman_max_op,
    bellman_op,
    evaluate_policy,
    ltv,
    ltv_exact,
    n_rules,
    q_values,
)

INCUMBENT_TOL = 1e-12


@dataclass(frozen=True)
class SolveResult:
    value: ValueFn
    policy: DecisionRule
    iterations: int
    residual: float
    error_bound: float
    algorithm: Literal["vi", "pi"]
    # PI only: the value of every evaluated rule, in order
    trace: tuple[ValueFn, ...] = ()


def greedy(problem: DiscountedProblem, V: ValueFn) -> DecisionRule:
    """Per-state argmax of the one-step backup; ties go to the lowest action."""
    return DecisionRule(np.argmax(q_values(problem, V), axis=1).tolist())


def value_iteration(problem: DiscountedProblem, cfg: FixpointConfig | None = None) -> SolveResult:
    """Iterate the optimality operator from zero, then read off the greedy rule."""
    cfg = (cfg or FixpointConfig()).with_gamma(problem.gamma)
    res = iterate_to_fixpoint(bellman_max_op(problem), ValueFn.zeros(problem.mdp.n_states), cfg)
    return SolveResult(
        value=res.point,
        policy=greedy(problem, res.point),
        iterations=res.iterations,
        residual=res.residual,
        error_bound=res.error_bound,
        algorithm="vi",
    )


def policy_evaluation(
    problem: DiscountedProblem, rule: DecisionRule, cfg: FixpointConfig | None = None
) -> ValueFn:
    return ltv(problem, rule, cfg)


def _improve_from(problem: DiscountedProblem, rule: DecisionRule, V: ValueFn, tol: float) -> DecisionRule:
    Q = q_values(problem, V)
    best = np.max(Q, axis=1)
    incumbent = Q[np.arange(len(rule)), rule.choice]
    keep = incumbent >= best - tol
    return DecisionRule(np.where(keep, rule.choice, np.argmax(Q, axis=1)).tolist())


def improve(
    problem: DiscountedProblem,
    rule: DecisionRule,
    cfg: FixpointConfig | None = None,
    tol: float = INCUMBENT_TOL,
) -> DecisionRule:
    """Greedy rule against ``V_rule``, keeping the incumbent action on ties."""
    problem.mdp.check_rule(rule)
    return _improve_from(problem, rule, ltv(problem, rule, cfg), tol)


def policy_iteration(
    problem: DiscountedProblem,
    initial: DecisionRule | None = None,
    cfg: FixpointConfig | None = None,
    tol: float = INCUMBENT_TOL,
) -> SolveResult:
    """Alternate evaluation and improvement until the rule stops changing.

    ``iterations`` counts improvement rounds.  Since values never decrease
    the rules visited are distinct, so the number of rounds is bounded by
    the number of decision rules.
    """
    mdp = problem.mdp
    rule = initial if initial is not None else DecisionRule([0] * mdp.n_states)
    mdp.check_rule(rule)
    limit = n_rules(mdp)
    trace = []
    res: FixpointResult | None = None
    for rounds in range(1, limit + 1):
        res = evaluate_policy(problem, rule, cfg)
        trace.append(res.point)
        new = _improve_from(problem, rule, res.point, tol)
        if new == rule:
            return SolveResult(
                value=res.point,
                policy=rule,
                iterations=rounds,
                residual=res.residual,
                error_bound=res.error_bound,
                algorithm="pi",
                trace=tuple(trace),
            )
        rule = new
    raise NonConvergence(
        f"policy iteration did not stabilise within {limit} rounds",
        residual=res.residual if res else float("nan"),
        iterations=limit,
    )


@dataclass(frozen=True)
class ImprovementReport:
    """Which improvement-theorem premises held and whether the conclusions did.

    ``*_holds`` is ``None`` when the matching premise failed (not applicable).
    """

    ge_applicable: bool
    ge_holds: bool | None
    le_applicable: bool
    le_holds: bool | None

    @property
    def applicable(self) -> bool:
        return self.ge_applicable or self.le_applicable

    @property
    def violated(self) -> bool:
        return self.ge_holds is False or self.le_holds is False


def check_policy_improvement_theorem(
    problem: DiscountedProblem,
    sigma: DecisionRule,
    tau: DecisionRule,
    hyp_tol: float = 1e-12,
    concl_tol: float = 1e-8,
    evaluate: Callable[[DiscountedProblem, DecisionRule], ValueFn] = ltv_exact,
) -> ImprovementReport:
    """Test ``B_tau V_sigma >= B_sigma V_sigma => V_tau >= V_sigma`` and its dual."""
    v_sigma = evaluate(problem, sigma)
    v_tau = evaluate(problem, tau)
    b_tau = bellman_op(problem, tau)(v_sigma)
    b_sigma = bellman_op(problem, sigma)(v_sigma)
    ge = le_within(b_sigma, b_tau, hyp_tol)
    le = le_within(b_tau, b_sigma, hyp_tol)
    return ImprovementReport(
        ge_applicable=ge,
        ge_holds=le_within(v_sigma, v_tau, concl_tol) if ge else None,
        le_applicable=le,
        le_holds=le_within(v_tau, v_sigma, concl_tol) if le else None,
    )
