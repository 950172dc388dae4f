"""Real-valued functions on ``range(n)``: sup norm, metric and pointwise order."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from mdpkit.errors import NonFinite


class ValueFn:
    """Immutable dense vector of finite reals indexed by state."""

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[float] | np.ndarray):
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size < 1:
            raise ValueError("value function needs at least one entry")
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"non-finite entry in value function: {arr!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "_values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ValueFn is immutable")

    @classmethod
    def zeros(cls, n: int) -> ValueFn:
        return cls(np.zeros(n))

    @classmethod
    def constant(cls, n: int, c: float) -> ValueFn:
        return cls(np.full(n, float(c)))

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __getitem__(self, s: int) -> float:
        return float(self._values[s])

    def __iter__(self):
        return (float(v) for v in self._values)

    def __add__(self, other: ValueFn | float) -> ValueFn:
        if isinstance(other, ValueFn):
            _same_length(self, other)
            return ValueFn(self._values + other._values)
        return ValueFn(self._values + float(other))

    __radd__ = __add__

    def __sub__(self, other: ValueFn | float) -> ValueFn:
        if isinstance(other, ValueFn):
            _same_length(self, other)
            return ValueFn(self._values - other._values)
        return ValueFn(self._values - float(other))

    def __mul__(self, alpha: float) -> ValueFn:
        return ValueFn(float(alpha) * self._values)

    __rmul__ = __mul__

    def __neg__(self) -> ValueFn:
        return ValueFn(-self._values)

    def __eq__(self, other: object) -> bool:
        # exact, bit-level equality; use ``dist`` for tolerant comparison
        if not isinstance(other, ValueFn):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(np.all(self._values == other._values))

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        return f"ValueFn({self._values.tolist()!r})"


def _same_length(f: ValueFn, g: ValueFn) -> None:
    if len(f) != len(g):
        raise ValueError(f"length mismatch: {len(f)} vs {len(g)}")


def sup_norm(f: ValueFn) -> float:
    return float(np.max(np.abs(f.values)))


def dist(f: ValueFn, g: ValueFn) -> float:
    """Sup-norm distance."""
    _same_length(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def le(f: ValueFn, g: ValueFn) -> bool:
    """Exact pointwise ``f <= g``."""
    _same_length(f, g)
    return bool(np.all(f.values <= g.values))


def le_within(f: ValueFn, g: ValueFn, eps: float) -> bool:
    """Pointwise ``f <= g + eps``."""
    _same_length(f, g)
    return bool(np.all(f.values <= g.values + eps))


def axpy(alpha: float, f: ValueFn, g: ValueFn) -> ValueFn:
    """``alpha * f + g``."""
    _same_length(f, g)
    return ValueFn(float(alpha) * f.values + g.values)


def add(f: ValueFn, g: ValueFn) -> ValueFn:
    return f + g


def sub(f: ValueFn, g: ValueFn) -> ValueFn:
    return f - g


def scale(alpha: float, f: ValueFn) -> ValueFn:
    return f * alpha
