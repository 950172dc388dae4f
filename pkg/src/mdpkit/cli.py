"""Command-line interface.

Exit codes
----------
    0  success
    1  parse or validation error (including a missing discount)
    2  solver did not converge
    3  brute-force enumeration guard exceeded
"""

from __future__ import annotations

import argparse
import os
import sys
from collections.abc import Sequence

from mdpkit.algorithms import policy_iteration, value_iteration
from mdpkit.dist import Dist, ret
from mdpkit.envs import turtle_mdp
from mdpkit.errors import EnumerationTooLarge, NonConvergence
from mdpkit.fixpoint import DEFAULT_MAX_ITER, DEFAULT_THETA, FixpointConfig
from mdpkit.horizon import PolicySequence, brute_force_optimal, optimal_finite_value
from mdpkit.mdp import DiscountedProblem, Mdp
from mdpkit.mdpfile import MdpFileError, dumps_canonical, load_mdp, result_to_doc, write_mdp

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NONCONVERGENCE = 2
EXIT_ENUMERATION = 3

MAX_ITER_ENV = "MDPKIT_MAX_ITER"


class _Invalid(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are parse errors: exit 1, keeping 2 for non-convergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _default_max_iter() -> int:
    raw = os.environ.get(MAX_ITER_ENV)
    if raw is None:
        return DEFAULT_MAX_ITER
    try:
        value = int(raw)
    except ValueError:
        raise _Invalid(f"{MAX_ITER_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise _Invalid(f"{MAX_ITER_ENV} must be >= 1, got {value}")
    return value


def _load(path: str) -> tuple[Mdp, float | None]:
    try:
        return load_mdp(path)
    except OSError as exc:
        raise _Invalid(f"cannot read {path}: {exc.strerror or exc}") from exc
    except MdpFileError as exc:
        raise _Invalid(f"{path}: {exc}") from exc


def _problem(args) -> DiscountedProblem:
    mdp, file_gamma = _load(args.path)
    gamma = args.gamma if args.gamma is not None else file_gamma
    if gamma is None:
        raise _Invalid("no discount given: pass --gamma or add \"gamma\" to the file")
    try:
        return DiscountedProblem(mdp, gamma)
    except ValueError as exc:
        raise _Invalid(str(exc)) from exc


def _p0(mdp: Mdp, spec: str) -> Dist:
    if spec in mdp.state_labels:
        return ret(mdp.state_labels.index(spec), mdp.n_states)
    if spec == "uniform":
        return Dist.uniform(mdp.n_states)
    raise _Invalid(f"--p0 must be a state label or 'uniform', got {spec!r}")


def _table(rows: Sequence[Sequence[object]]) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def cmd_validate(args) -> int:
    mdp, gamma = _load(args.path)
    pairs = sum(mdp.actions)
    extra = f", gamma={gamma!r}" if gamma is not None else ""
    print(f"OK: {mdp.n_states} states, {pairs} state-action pairs{extra}")
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = _problem(args)
    max_iter = args.max_iter if args.max_iter is not None else _default_max_iter()
    try:
        cfg = FixpointConfig(theta=args.theta, max_iter=max_iter)
    except ValueError as exc:
        raise _Invalid(str(exc)) from exc
    if args.algorithm == "vi":
        result = value_iteration(problem, cfg)
    else:
        result = policy_iteration(problem, cfg=cfg)
    doc = result_to_doc(problem.mdp, result, problem.gamma, args.theta)
    if args.output == "json":
        sys.stdout.write(dumps_canonical(doc))
    else:
        rows = [("state", "value", "policy")]
        rows += [(lab, repr(doc["value"][lab]), doc["policy"][lab]) for lab in problem.mdp.state_labels]
        print(_table(rows))
        print()
        print(_table([(k, doc[k]) for k in ("algorithm", "gamma", "theta", "iterations", "residual", "error_bound")]))
    return EXIT_OK


def _sequence_doc(mdp: Mdp, seq: PolicySequence) -> list[dict]:
    n = len(seq)
    return [
        {
            "steps_remaining": n - k,
            "policy": {mdp.state_labels[s]: mdp.action_labels[s][a] for s, a in enumerate(rule)},
        }
        for k, rule in enumerate(seq)
    ]


def _print_horizon(args, mdp: Mdp, gamma: float, value: float, seq: PolicySequence) -> None:
    doc = {"n": args.n, "gamma": gamma, "p0": args.p0, "value": value, "sequence": _sequence_doc(mdp, seq)}
    if args.output == "json":
        sys.stdout.write(dumps_canonical(doc))
        return
    print(_table([("n", args.n), ("gamma", gamma), ("p0", args.p0), ("value", repr(value))]))
    if len(seq):
        print()
        rows = [("state",) + tuple(f"k={k}" for k in range(len(seq), 0, -1))]
        for s, lab in enumerate(mdp.state_labels):
            rows.append((lab,) + tuple(mdp.action_labels[s][rule[s]] for rule in seq))
        print(_table(rows))


def _horizon_n(args) -> int:
    if args.n < 0:
        raise _Invalid(f"--n must be >= 0, got {args.n}")
    return args.n


def cmd_horizon(args) -> int:
    problem = _problem(args)
    n = _horizon_n(args)
    p0 = _p0(problem.mdp, args.p0)
    sol = optimal_finite_value(problem, n)
    _print_horizon(args, problem.mdp, problem.gamma, sol.pair(p0), sol.sequence)
    return EXIT_OK


def cmd_oracle(args) -> int:
    problem = _problem(args)
    n = _horizon_n(args)
    p0 = _p0(problem.mdp, args.p0)
    value, seq = brute_force_optimal(problem, p0, n)
    _print_horizon(args, problem.mdp, problem.gamma, value, seq)
    return EXIT_OK


def cmd_turtle_export(args) -> int:
    try:
        problem = turtle_mdp(args.gamma)
    except ValueError as exc:
        raise _Invalid(str(exc)) from exc
    try:
        write_mdp(args.path, problem.mdp, problem.gamma)
    except OSError as exc:
        raise _Invalid(f"cannot write {args.path}: {exc.strerror or exc}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdpkit", description="Solve finite discounted MDPs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an MDP file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="infinite-horizon optimum by value or policy iteration")
    p.add_argument("path")
    p.add_argument("--algorithm", choices=("vi", "pi"), default="vi")
    p.add_argument("--gamma", type=float)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--output", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_solve)

    for name, func, text in (
        ("horizon", cmd_horizon, "horizon-n optimum by backward induction"),
        ("oracle", cmd_oracle, "horizon-n optimum by exhaustive enumeration"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("path")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--p0", default="uniform", help="state label or 'uniform'")
        p.add_argument("--gamma", type=float)
        p.add_argument("--output", choices=("json", "table"), default="json")
        p.set_defaults(func=func)

    p = sub.add_parser("turtle-export", help="write the turtle grid world as an MDP file")
    p.add_argument("path")
    p.add_argument("--gamma", type=float, default=0.9)
    p.set_defaults(func=cmd_turtle_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Invalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonConvergence as exc:
        print(f"error: {exc} (last residual {exc.residual!r})", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENUMERATION


if __name__ == "__main__":
    raise SystemExit(main())
