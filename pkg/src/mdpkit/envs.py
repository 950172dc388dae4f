"""Concrete environments: the 5x5 turtle grid world and seeded random MDPs."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from mdpkit.dist import Dist, Kernel
from mdpkit.fnspace import ValueFn
from mdpkit.mdp import DecisionRule, DiscountedProblem, Mdp

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator: 64-bit state, identical output on every platform."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def positive(self) -> float:
        """Uniform double in (0, 1]."""
        return 1.0 - self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in ``[lo, hi]`` inclusive."""
        return lo + (self.next_u64() % (hi - lo + 1))


def _rng(seed: int | SplitMix64) -> SplitMix64:
    return seed if isinstance(seed, SplitMix64) else SplitMix64(seed)


def random_probs(rng: int | SplitMix64, n: int) -> list[float]:
    rng = _rng(rng)
    draws = [rng.positive() for _ in range(n)]
    total = sum(draws)
    return [d / total for d in draws]


def random_dist(rng: int | SplitMix64, n: int) -> Dist:
    return Dist.from_probs(random_probs(rng, n))


def random_kernel(rng: int | SplitMix64, n_in: int, n_out: int | None = None) -> Kernel:
    rng = _rng(rng)
    return Kernel([random_dist(rng, n_out or n_in) for _ in range(n_in)])


def random_value_fn(rng: int | SplitMix64, n: int, scale: float = 10.0) -> ValueFn:
    rng = _rng(rng)
    return ValueFn([rng.uniform(-scale, scale) for _ in range(n)])


def random_rule(rng: int | SplitMix64, mdp: Mdp) -> DecisionRule:
    rng = _rng(rng)
    return DecisionRule([rng.randint(0, k - 1) for k in mdp.actions])


def random_mdp(
    rng: int | SplitMix64,
    n_states: int,
    actions_per_state: int | Sequence[int],
    reward_range: tuple[float, float] = (-1.0, 1.0),
) -> Mdp:
    """MDP with normalized positive transition rows and uniform rewards.

    Draw order is fixed (per state, per action: the row, then its rewards),
    so a seed determines the MDP exactly.
    """
    rng = _rng(rng)
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    if isinstance(actions_per_state, int):
        actions_per_state = [actions_per_state] * n_states
    if len(actions_per_state) != n_states or min(actions_per_state) < 1:
        raise ValueError("need one action count >= 1 per state")
    lo, hi = reward_range
    transitions, rewards = [], []
    for s in range(n_states):
        t_row, r_row = [], []
        for _ in range(actions_per_state[s]):
            t_row.append(random_dist(rng, n_states))
            r_row.append([rng.uniform(lo, hi) for _ in range(n_states)])
        transitions.append(t_row)
        rewards.append(r_row)
    return Mdp(transitions, rewards)


# --- turtle grid world -------------------------------------------------------

TURTLE_ACTIONS = ("up", "down", "left", "right")
_MOVES = {"up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0)}
_OPPOSITE = {"up": "down", "down": "up", "left": "right", "right": "left"}
CELL_REWARDS = MappingProxyType({"red": -10.0, "green": 2.0, "star": 1.0, "empty": 0.0})

_TURTLE_CELLS = {
    (1, 4): "green",
    (4, 2): "star",
    (3, 3): "star",
    (1, 2): "red",
    (2, 2): "red",
    (3, 2): "red",
    (4, 3): "red",
    (2, 4): "red",
    (4, 5): "red",
}


@dataclass(frozen=True)
class TurtleSpec:
    """Grid layout; coordinates are ``(x, y)`` with ``(1, 1)`` top-left."""

    width: int = 5
    height: int = 5
    cells: Mapping[tuple[int, int], str] = field(default_factory=lambda: MappingProxyType(dict(_TURTLE_CELLS)))
    slip: float = 0.25

    def __post_init__(self):
        greens = [c for c, kind in self.cells.items() if kind == "green"]
        if len(greens) != 1:
            raise ValueError(f"exactly one green cell required, found {len(greens)}")
        for (x, y), kind in self.cells.items():
            if not (1 <= x <= self.width and 1 <= y <= self.height):
                raise ValueError(f"cell {(x, y)} outside the grid")
            if kind not in CELL_REWARDS:
                raise ValueError(f"unknown cell kind {kind!r}")

    def cell(self, x: int, y: int) -> str:
        return self.cells.get((x, y), "empty")

    def index(self, x: int, y: int) -> int:
        return (y - 1) * self.width + (x - 1)

    def coords(self, s: int) -> tuple[int, int]:
        return s % self.width + 1, s // self.width + 1

    @property
    def green(self) -> tuple[int, int]:
        return next(c for c, kind in self.cells.items() if kind == "green")

    def step(self, x: int, y: int, action: str) -> tuple[int, int]:
        """Deterministic move; leaving the grid keeps the turtle in place."""
        dx, dy = _MOVES[action]
        nx, ny = x + dx, y + dy
        if 1 <= nx <= self.width and 1 <= ny <= self.height:
            return nx, ny
        return x, y


def turtle_mdp(gamma: float = 0.9, spec: TurtleSpec | None = None) -> DiscountedProblem:
    """The turtle grid world.

    The intended move happens with probability ``1 - slip``, the opposite
    move with ``slip``.  Reward depends only on the destination cell.  The
    green cell is absorbing and pays nothing once reached.
    """
    spec = spec or TurtleSpec()
    n = spec.width * spec.height
    green = spec.index(*spec.green)
    transitions, rewards = [], []
    for s in range(n):
        x, y = spec.coords(s)
        t_row, r_row = [], []
        for action in TURTLE_ACTIONS:
            if s == green:
                t_row.append(Dist([(1.0, green)], n))
                r_row.append(np.zeros(n))
                continue
            intended = spec.index(*spec.step(x, y, action))
            slipped = spec.index(*spec.step(x, y, _OPPOSITE[action]))
            t_row.append(Dist([(1.0 - spec.slip, intended), (spec.slip, slipped)], n))
            r_row.append(np.array([CELL_REWARDS[spec.cell(*spec.coords(sp))] for sp in range(n)]))
        transitions.append(t_row)
        rewards.append(r_row)
    labels = [f"({x},{y})" for x, y in map(spec.coords, range(n))]
    mdp = Mdp(transitions, rewards, state_labels=labels, action_labels=[TURTLE_ACTIONS] * n)
    return DiscountedProblem(mdp, gamma)
