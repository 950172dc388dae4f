"""Exceptions raised by the solvers."""

from __future__ import annotations


class NonConvergence(RuntimeError):
    """An iteration hit its budget before the residual fell below threshold."""

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NonFinite(ArithmeticError):
    """A value function picked up a NaN or infinite entry."""


class EnumerationTooLarge(ValueError):
    """Exhaustive enumeration would exceed the configured guard."""
