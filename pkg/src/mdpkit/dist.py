"""Finitely supported probability distributions over ``range(n)``.

A :class:`Dist` is a list of ``(weight, outcome)`` pairs, the same shape as
a list-of-pairs probability mass function.  Duplicate outcomes are legal in
the raw form; :func:`compact` produces the canonical form (duplicates
merged, zero weights dropped, sorted by outcome) used for equality tests.

Stochastic kernels ``A -> Dist B`` are any callables; :class:`Kernel` is the
tabulated version that also remembers its domain and codomain sizes so
that composition can be checked.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from typing import Union

import numpy as np

SUM_TOL = 1e-9
ENTRY_TOL = 1e-12

KernelLike = Callable[[int], "Dist"]
RealFn = Union[Callable[[int], float], Sequence[float], np.ndarray]


class Dist:
    """Immutable probability distribution over the outcomes ``0..n-1``."""

    __slots__ = ("_entries", "_n")

    def __init__(self, entries: Iterable[tuple[float, int]], n: int):
        n = int(n)
        if n < 1:
            raise ValueError(f"cardinality must be >= 1, got {n}")
        items = []
        total = 0.0
        for weight, outcome in entries:
            weight = float(weight)
            outcome = int(outcome)
            if not math.isfinite(weight) or weight < 0.0:
                raise ValueError(f"invalid weight {weight!r} for outcome {outcome}")
            if not 0 <= outcome < n:
                raise ValueError(f"outcome {outcome} out of range for n={n}")
            items.append((weight, outcome))
            total += weight
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "_entries", tuple(items))
        object.__setattr__(self, "_n", n)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def from_probs(cls, probs: Sequence[float]) -> Dist:
        """Build from a dense probability vector, skipping exact zeros."""
        return cls(((p, i) for i, p in enumerate(probs) if p != 0.0), len(probs))

    @classmethod
    def uniform(cls, n: int) -> Dist:
        return cls(((1.0 / n, i) for i in range(n)), n)

    @property
    def entries(self) -> tuple[tuple[float, int], ...]:
        return self._entries

    @property
    def n(self) -> int:
        return self._n

    def prob(self, outcome: int) -> float:
        return sum(w for w, o in self._entries if o == outcome)

    def support(self) -> tuple[int, ...]:
        return tuple(sorted({o for w, o in self._entries if w > 0.0}))

    def to_array(self) -> np.ndarray:
        out = np.zeros(self._n)
        for w, o in self._entries:
            out[o] += w
        return out

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self._n == other._n and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self._n, self._entries))

    def __repr__(self) -> str:
        body = ", ".join(f"({w!r}, {o})" for w, o in self._entries)
        return f"Dist([{body}], n={self._n})"


class Kernel:
    """A tabulated stochastic kernel ``range(n_in) -> Dist over range(n_out)``."""

    __slots__ = ("_rows", "_n_out")

    def __init__(self, rows: Sequence[Dist]):
        rows = tuple(rows)
        if not rows:
            raise ValueError("kernel needs at least one row")
        n_out = rows[0].n
        for a, row in enumerate(rows):
            if row.n != n_out:
                raise ValueError(f"row {a} has cardinality {row.n}, expected {n_out}")
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "_n_out", n_out)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def from_function(cls, f: KernelLike, n_in: int) -> Kernel:
        return cls([f(a) for a in range(n_in)])

    @classmethod
    def from_matrix(cls, matrix) -> Kernel:
        return cls([Dist.from_probs(row) for row in np.asarray(matrix, dtype=float)])

    @property
    def rows(self) -> tuple[Dist, ...]:
        return self._rows

    @property
    def n_in(self) -> int:
        return len(self._rows)

    @property
    def n_out(self) -> int:
        return self._n_out

    def __call__(self, a: int) -> Dist:
        return self._rows[a]

    def to_matrix(self) -> np.ndarray:
        return np.vstack([row.to_array() for row in self._rows])

    def __repr__(self) -> str:
        return f"Kernel(n_in={self.n_in}, n_out={self.n_out})"


def ret(outcome: int, n: int) -> Dist:
    """Point mass at ``outcome``."""
    if not 0 <= outcome < n:
        raise ValueError(f"outcome {outcome} out of range for n={n}")
    return Dist([(1.0, outcome)], n)


def ret_kernel(n: int) -> Kernel:
    return Kernel([ret(a, n) for a in range(n)])


def _codomain(p: Dist, f: KernelLike) -> int | None:
    if isinstance(f, Kernel):
        if f.n_in != p.n:
            raise ValueError(f"kernel domain {f.n_in} does not match distribution cardinality {p.n}")
        return f.n_out
    return None


def bind(p: Dist, f: KernelLike) -> Dist:
    """Push ``p`` through the kernel ``f``.

    The raw result lists ``(p(a) * f(a)(b), b)`` for every entry of ``p`` and
    every entry of ``f(a)``, so it may hold duplicate outcomes.
    """
    n_out = _codomain(p, f)
    entries = []
    for w, a in p.entries:
        q = f(a)
        if n_out is None:
            n_out = q.n
        elif q.n != n_out:
            raise ValueError(f"kernel returned cardinality {q.n} at {a}, expected {n_out}")
        entries.extend((w * v, b) for v, b in q.entries)
    return Dist(entries, n_out)


def compact(p: Dist) -> Dist:
    merged: dict[int, float] = {}
    for w, o in p.entries:
        merged[o] = merged.get(o, 0.0) + w
    return Dist(((merged[o], o) for o in sorted(merged) if merged[o] != 0.0), p.n)


def kleisli_compose(f: Kernel, g: Kernel) -> Kernel:
    """Kernel ``x -> bind(f(x), g)``, compacted row by row."""
    if f.n_out != g.n_in:
        raise ValueError(f"cannot compose kernels: {f.n_out} outcomes into {g.n_in} inputs")
    return Kernel([compact(bind(row, g)) for row in f.rows])


def kleisli_iterate(p0: Dist, kernel: KernelLike, k: int) -> Dist:
    """Distribution after ``k`` steps of ``kernel`` from ``p0``."""
    if k < 0:
        raise ValueError(f"step count must be >= 0, got {k}")
    p = p0
    for _ in range(k):
        p = compact(bind(p, kernel))
    return p


def expectation(p: Dist, f: RealFn) -> float:
    """Expected value of ``f`` under ``p``; ``f`` may be callable or indexable."""
    if callable(f):
        return math.fsum(w * float(f(o)) for w, o in p.entries)
    return math.fsum(w * float(f[o]) for w, o in p.entries)


def close(p: Dist, q: Dist, tol: float = ENTRY_TOL) -> bool:
    """Per-outcome agreement of the compacted forms within ``tol``."""
    if p.n != q.n:
        return False
    return bool(np.max(np.abs(p.to_array() - q.to_array())) <= tol)
