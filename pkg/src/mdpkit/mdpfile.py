"""JSON interchange format for MDPs and solver results.

An MDP file looks like::

    {
      "states": ["s0", "s1"],
      "actions": [["stay", "go"], ["stay"]],
      "transitions": [{"s": "s0", "a": "go", "dist": [{"sp": "s1", "p": 1.0}]}, ...],
      "rewards": [{"s": "s0", "a": "go", "sp": "s1", "r": 1.0}, ...],
      "gamma": 0.9
    }

Missing reward triples default to 0 and ``gamma`` is optional.  Files
written by :func:`dumps_mdp` are canonical: sorted keys, two-space indent,
shortest round-trip float repr, transitions in state/action order with
compacted distributions, only nonzero rewards.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from mdpkit.dist import SUM_TOL, Dist, compact
from mdpkit.mdp import Mdp


class MdpFileError(ValueError):
    """The document is not a valid MDP file."""


def _labels(value: Any, what: str) -> list[str]:
    if not isinstance(value, list) or not value:
        raise MdpFileError(f"{what} must be a non-empty array of labels")
    for x in value:
        if not isinstance(x, str):
            raise MdpFileError(f"{what} contains a non-string label: {x!r}")
    dupes = sorted({x for x in value if value.count(x) > 1})
    if dupes:
        raise MdpFileError(f"{what} has duplicate labels: {dupes}")
    return value


def _number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise MdpFileError(f"{what} must be a finite number, got {value!r}")
    return float(value)


def _field(entry: Any, key: str, where: str) -> Any:
    if not isinstance(entry, dict) or key not in entry:
        raise MdpFileError(f"{where}: missing field {key!r}")
    return entry[key]


def parse_mdp(doc: Any) -> tuple[Mdp, float | None]:
    """Validate a decoded JSON document and build the MDP and optional discount."""
    if not isinstance(doc, dict):
        raise MdpFileError("top level must be a JSON object")
    for key in ("states", "actions", "transitions"):
        if key not in doc:
            raise MdpFileError(f"missing top-level key {key!r}")
    states = _labels(doc["states"], "states")
    s_index = {lab: i for i, lab in enumerate(states)}
    actions_doc = doc["actions"]
    if not isinstance(actions_doc, list) or len(actions_doc) != len(states):
        raise MdpFileError(f"actions must be an array with one label array per state ({len(states)})")
    actions = [_labels(row, f"actions of state {states[s]!r}") for s, row in enumerate(actions_doc)]
    a_index = [{lab: i for i, lab in enumerate(row)} for row in actions]
    n = len(states)

    def state_of(label: Any, where: str) -> int:
        if label not in s_index:
            raise MdpFileError(f"{where}: unknown state label {label!r}")
        return s_index[label]

    def action_of(s: int, label: Any, where: str) -> int:
        if label not in a_index[s]:
            raise MdpFileError(f"{where}: unknown action label {label!r} for state {states[s]!r}")
        return a_index[s][label]

    transitions: list[list[Dist | None]] = [[None] * len(row) for row in actions]
    if not isinstance(doc["transitions"], list):
        raise MdpFileError("transitions must be an array")
    for i, entry in enumerate(doc["transitions"]):
        where = f"transitions[{i}]"
        s = state_of(_field(entry, "s", where), where)
        a = action_of(s, _field(entry, "a", where), where)
        where = f"transition ({states[s]!r}, {actions[s][a]!r})"
        if transitions[s][a] is not None:
            raise MdpFileError(f"{where}: listed more than once")
        rows = _field(entry, "dist", where)
        if not isinstance(rows, list) or not rows:
            raise MdpFileError(f"{where}: dist must be a non-empty array")
        pairs = []
        for j, item in enumerate(rows):
            sp = state_of(_field(item, "sp", f"{where} dist[{j}]"), f"{where} dist[{j}]")
            p = _number(_field(item, "p", f"{where} dist[{j}]"), f"{where} dist[{j}].p")
            if p < 0:
                raise MdpFileError(f"{where}: negative probability {p!r}")
            pairs.append((p, sp))
        total = math.fsum(p for p, _ in pairs)
        if abs(total - 1.0) > SUM_TOL:
            raise MdpFileError(f"{where}: probabilities sum to {total!r}, expected 1")
        transitions[s][a] = Dist(pairs, n)
    for s, row in enumerate(transitions):
        for a, d in enumerate(row):
            if d is None:
                raise MdpFileError(f"transition ({states[s]!r}, {actions[s][a]!r}): no distribution given")

    rewards = [np.zeros((len(row), n)) for row in actions]
    seen = set()
    rewards_doc = doc.get("rewards", [])
    if not isinstance(rewards_doc, list):
        raise MdpFileError("rewards must be an array")
    for i, entry in enumerate(rewards_doc):
        where = f"rewards[{i}]"
        s = state_of(_field(entry, "s", where), where)
        a = action_of(s, _field(entry, "a", where), where)
        sp = state_of(_field(entry, "sp", where), where)
        if (s, a, sp) in seen:
            raise MdpFileError(f"{where}: reward ({states[s]!r}, {actions[s][a]!r}, {states[sp]!r}) listed twice")
        seen.add((s, a, sp))
        rewards[s][a, sp] = _number(_field(entry, "r", where), f"{where}.r")

    gamma = None
    if doc.get("gamma") is not None:
        gamma = _number(doc["gamma"], "gamma")
        if not 0 <= gamma < 1:
            raise MdpFileError(f"gamma must lie in [0, 1), got {gamma!r}")

    mdp = Mdp(transitions, rewards, state_labels=states, action_labels=actions)
    return mdp, gamma


def load_mdp(path: str | Path) -> tuple[Mdp, float | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MdpFileError(f"not valid JSON: {exc}") from exc
    return parse_mdp(doc)


def mdp_to_doc(mdp: Mdp, gamma: float | None = None) -> dict:
    states = list(mdp.state_labels)
    transitions, rewards = [], []
    for s in range(mdp.n_states):
        for a in range(mdp.actions[s]):
            s_lab, a_lab = states[s], mdp.action_labels[s][a]
            dist = [{"sp": states[sp], "p": w} for w, sp in compact(mdp.T(s, a)).entries]
            transitions.append({"s": s_lab, "a": a_lab, "dist": dist})
            for sp in range(mdp.n_states):
                r = mdp.reward(s, a, sp)
                if r != 0.0:
                    rewards.append({"s": s_lab, "a": a_lab, "sp": states[sp], "r": r})
    doc = {
        "states": states,
        "actions": [list(row) for row in mdp.action_labels],
        "transitions": transitions,
        "rewards": rewards,
    }
    if gamma is not None:
        doc["gamma"] = float(gamma)
    return doc


def dumps_canonical(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dumps_mdp(mdp: Mdp, gamma: float | None = None) -> str:
    return dumps_canonical(mdp_to_doc(mdp, gamma))


def write_mdp(path: str | Path, mdp: Mdp, gamma: float | None = None) -> None:
    Path(path).write_text(dumps_mdp(mdp, gamma), encoding="utf-8")


def result_to_doc(mdp: Mdp, result, gamma: float, theta: float) -> dict:
    """Solver result keyed by state label."""
    labels = mdp.state_labels
    return {
        "algorithm": result.algorithm,
        "gamma": gamma,
        "theta": theta,
        "iterations": result.iterations,
        "residual": result.residual,
        "error_bound": result.error_bound,
        "value": {labels[s]: result.value[s] for s in range(mdp.n_states)},
        "policy": {labels[s]: mdp.action_labels[s][a] for s, a in enumerate(result.policy)},
    }
