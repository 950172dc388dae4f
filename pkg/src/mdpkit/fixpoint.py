"""Fixed-point iteration for sup-norm contractions on :class:`ValueFn`.

The engine iterates ``x_{k+1} = F(x_k)`` and stops at the first iterate whose
successive residual ``||x_{k+1} - x_k||`` is below ``theta``.  When the
contraction modulus is known the standard posterior bound
``gamma * residual / (1 - gamma)`` on the distance to the true fixed point is
reported alongside, widened by a few ulps of ``||x||`` per step to cover
floating-point rounding in ``F`` itself.
"""

from __future__ import annotations

import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from mdpkit.errors import NonConvergence, NonFinite
from mdpkit.fnspace import ValueFn, dist, le_within, sup_norm

DEFAULT_THETA = 1e-10
DEFAULT_MAX_ITER = 10_000

# rounding slack per operator application, in units of eps * ||x||
ROUNDING_ULPS = 8

Operator = Callable[[ValueFn], ValueFn]


@dataclass(frozen=True)
class FixpointConfig:
    theta: float = DEFAULT_THETA
    max_iter: int = DEFAULT_MAX_ITER
    gamma_hint: float | None = None

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.gamma_hint is not None and not 0 <= self.gamma_hint < 1:
            raise ValueError(f"gamma_hint must lie in [0, 1), got {self.gamma_hint}")

    def with_gamma(self, gamma: float) -> FixpointConfig:
        return FixpointConfig(self.theta, self.max_iter, gamma)


@dataclass(frozen=True)
class FixpointResult:
    point: ValueFn
    iterations: int
    residual: float
    error_bound: float | None
    trajectory: tuple[ValueFn, ...] = ()


def error_bound(residual: float, gamma: float, scale: float = 0.0) -> float:
    """Distance from the last iterate to the true fixed point.

    ``gamma * residual / (1 - gamma)`` is exact in real arithmetic; each
    evaluation of ``F`` also carries a rounding error of order
    ``eps * ||x||``, which the contraction amplifies by ``1 / (1 - gamma)``.
    """
    return (gamma * residual + ROUNDING_ULPS * sys.float_info.epsilon * scale) / (1.0 - gamma)


def iterate_to_fixpoint(
    F: Operator,
    x0: ValueFn,
    cfg: FixpointConfig | None = None,
    keep_trajectory: bool = False,
) -> FixpointResult:
    """Iterate ``F`` from ``x0`` until successive iterates are within ``cfg.theta``.

    Raises :class:`NonConvergence` after ``cfg.max_iter`` applications and
    :class:`NonFinite` if ``F`` produces NaN or infinity.  With
    ``keep_trajectory`` the result carries ``x0, x1, ..., x_final``.
    """
    cfg = cfg or FixpointConfig()
    x = x0
    trajectory = [x0] if keep_trajectory else None
    residual = float("inf")
    for k in range(1, cfg.max_iter + 1):
        try:
            nxt = F(x)
        except NonFinite as exc:
            raise NonFinite(f"operator produced a non-finite value at iteration {k}: {exc}") from exc
        residual = dist(nxt, x)
        x = nxt
        if trajectory is not None:
            trajectory.append(x)
        if residual < cfg.theta:
            bound = None
            if cfg.gamma_hint is not None:
                bound = error_bound(residual, cfg.gamma_hint, sup_norm(x))
            return FixpointResult(x, k, residual, bound, tuple(trajectory or ()))
    raise NonConvergence(
        f"no convergence after {cfg.max_iter} iterations (last residual {residual:.3e})",
        residual=residual,
        iterations=cfg.max_iter,
    )


@dataclass(frozen=True)
class ContractionReport:
    modulus: float
    max_ratio: float
    pairs_checked: int
    holds: bool


def check_contraction(
    F: Operator,
    modulus: float,
    samples: Sequence[tuple[ValueFn, ValueFn]],
    slack: float = 1e-9,
) -> ContractionReport:
    """Largest observed Lipschitz ratio of ``F`` over sampled pairs.

    ``holds`` is true when ``d(F u, F v) <= modulus * d(u, v) + slack`` on
    every pair.  Pairs with ``u == v`` are skipped for the ratio but still
    checked against the additive slack.
    """
    if not 0 <= modulus < 1:
        raise ValueError(f"modulus must lie in [0, 1), got {modulus}")
    max_ratio = 0.0
    holds = True
    for u, v in samples:
        d_in = dist(u, v)
        d_out = dist(F(u), F(v))
        if d_out > modulus * d_in + slack:
            holds = False
        if d_in > 0:
            max_ratio = max(max_ratio, d_out / d_in)
    return ContractionReport(modulus, max_ratio, len(samples), holds)


@dataclass(frozen=True)
class CoinductionReport:
    """Outcome of the two order implications at a test point.

    ``below_*`` refers to ``F(x) <= x => fix <= x``; ``above_*`` to the dual
    ``x <= F(x) => x <= fix``.  A conclusion is ``None`` when its premise did
    not hold (not applicable).
    """

    below_applicable: bool
    below_holds: bool | None
    above_applicable: bool
    above_holds: bool | None

    @property
    def ok(self) -> bool:
        return self.below_holds is not False and self.above_holds is not False


def check_order_coinduction(
    F: Operator,
    x: ValueFn,
    fix: ValueFn,
    modulus: float,
    eps: float = 1e-12,
    solver_bound: float = 0.0,
) -> CoinductionReport:
    """Check the contraction-coinduction implications for monotone ``F`` at ``x``.

    Premises are tested with slack ``eps``; conclusions with
    ``eps / (1 - modulus) + solver_bound``, where ``solver_bound`` is the
    error bound attached to ``fix``.
    """
    if not 0 <= modulus < 1:
        raise ValueError(f"modulus must lie in [0, 1), got {modulus}")
    fx = F(x)
    concl_eps = eps / (1.0 - modulus) + solver_bound
    below = le_within(fx, x, eps)
    above = le_within(x, fx, eps)
    return CoinductionReport(
        below_applicable=below,
        below_holds=le_within(fix, x, concl_eps) if below else None,
        above_applicable=above,
        above_holds=le_within(x, fix, concl_eps) if above else None,
    )
