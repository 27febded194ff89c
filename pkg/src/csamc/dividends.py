"""Dividend models: cumulative dividend accounting, present value of future
dividends, the non-negative asset construction and total-return portfolios.

Conventions: cumulative dividends are right-continuous with D_0 = 0; the
proportional part integrates against the pre-dividend (left-limit) asset
value with the left-point rule; cash dividends step the account at their
payment times, which must be simulation grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._util import GridLookupError, grid_index
from .curves import CurveError, RateCurve, discount_factor

__all__ = [
    "CashDividend",
    "DividendSchedule",
    "NonNegAssetSpec",
    "DividendError",
    "NonNegConstructionError",
    "DegeneratePathError",
    "cumulative_dividend",
    "pv_future_dividends",
    "inner_spot",
    "build_nonneg_asset",
    "total_return",
    "total_return_recursive",
]


class DividendError(ValueError):
    """Invalid dividend schedule or dividend computation inputs."""


class NonNegConstructionError(ValueError):
    """The non-negative asset construction hypotheses are violated."""


class DegeneratePathError(ValueError):
    """A path hit a non-positive value where positivity is required."""


@dataclass(frozen=True)
class CashDividend:
    """Lump dividend at ``time``: fixed ``amount``, or ``fraction`` of the
    pre-dividend asset value when ``fraction`` is given."""

    time: float
    amount: float = 0.0
    fraction: float | None = None

    def __post_init__(self) -> None:
        if self.time <= 0:
            raise DividendError(f"cash dividend time must be positive, got {self.time}")
        if self.fraction is not None and not 0 <= self.fraction < 1:
            raise DividendError(f"dividend fraction must lie in [0, 1), got {self.fraction}")


@dataclass(frozen=True)
class DividendSchedule:
    """Proportional rate curve plus a strip of cash dividends up to ``horizon``."""

    proportional: RateCurve | None = None
    cash: tuple[CashDividend, ...] = ()
    horizon: float = math.inf

    def __post_init__(self) -> None:
        times = [d.time for d in self.cash]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DividendError("cash dividend times must be strictly increasing")
        if times and times[-1] > self.horizon:
            raise DividendError("cash dividend beyond the schedule horizon")

    @property
    def cash_times(self) -> tuple[float, ...]:
        return tuple(d.time for d in self.cash)

    def cash_within(self, t_end: float) -> tuple[CashDividend, ...]:
        """Cash dividends paying on or before ``t_end`` (the simulated ones)."""
        return tuple(d for d in self.cash if d.time <= t_end + 1e-10)

    def has_proportional(self) -> bool:
        return self.proportional is not None and any(r != 0.0 for r in self.proportional.rates)

    def deterministic_amounts(self) -> tuple[float, ...]:
        if any(d.fraction is not None for d in self.cash):
            raise DividendError("schedule has path-dependent cash amounts")
        return tuple(d.amount for d in self.cash)

    def q(self) -> RateCurve:
        return self.proportional if self.proportional is not None else RateCurve.zero()


def _cash_indices(schedule: DividendSchedule, grid: np.ndarray) -> np.ndarray:
    try:
        idx = [grid_index(grid, tau, "cash dividend time") for tau in schedule.cash_times]
    except GridLookupError as err:
        raise DividendError(str(err)) from None
    return np.asarray(idx, dtype=np.int64)


def cumulative_dividend(
    schedule: DividendSchedule,
    grid: np.ndarray,
    values: np.ndarray,
    cash_amounts: np.ndarray | None = None,
) -> np.ndarray:
    """Cumulative dividend D_t on the grid, per path.

    ``values`` holds the asset path (n, K+1); the proportional integral uses
    the left grid point of each step. ``cash_amounts`` (n, J) overrides the
    schedule's amounts with the per-path drops actually applied.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.atleast_2d(values)
    n, kp1 = values.shape
    if kp1 != len(grid):
        raise DividendError("values and grid have incompatible shapes")
    out = np.zeros((n, kp1))
    if schedule.has_proportional():
        q = schedule.q()
        dt = np.diff(grid)
        qleft = np.array([q.rate(t) for t in grid[:-1]])
        out[:, 1:] = np.cumsum(values[:, :-1] * qleft * dt, axis=1)
    if schedule.cash:
        idx = _cash_indices(schedule, grid)
        if cash_amounts is None:
            cash_amounts = np.broadcast_to(
                np.asarray(schedule.deterministic_amounts()), (n, len(idx))
            )
        step = np.zeros((n, kp1))
        for j, k in enumerate(idx):
            step[:, k] += cash_amounts[:, j]
        out += np.cumsum(step, axis=1)
    return out


def pv_future_dividends(
    schedule: DividendSchedule,
    discount: RateCurve,
    t: float,
    T: float,
    spot_forward: Callable[[float], float] | None = None,
) -> float:
    """Present value at t of the dividends paid in (t, T].

    Cash part: sum of P_t(tau_i) * amount_i. Proportional part: exact
    piecewise integral of P_t(u) q_u F(u) du where ``spot_forward`` supplies
    the expected spot F(u) = E_t[S_u]; with deterministic rates and the
    standard forward rule, P_t(u) F(u) is constant between dividend dates
    up to the factor exp(-int q), so each piece integrates in closed form.
    """
    if t > T:
        raise CurveError(f"pv_future_dividends requires t <= T, got t={t}, T={T}")
    pv = sum(
        d.amount * discount_factor(discount, t, d.time)
        for d in schedule.cash
        if t < d.time <= T
    )
    if any(d.fraction is not None and t < d.time <= T for d in schedule.cash):
        raise DividendError("pv_future_dividends needs deterministic cash amounts")
    if not schedule.has_proportional():
        return pv
    if spot_forward is None:
        raise DividendError("proportional dividends need a spot-forward rule")
    q = schedule.q()
    cuts = sorted(
        {t, T}
        | {p for p in q.pillars if t < p < T}
        | {d.time for d in schedule.cash if t < d.time < T}
    )
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        # On (a, b]: P_t(u) F(u) exp(int_t^u q) is the constant S_t minus
        # the accumulated dividend adjustments, so the integrand becomes
        # q exp(-int_t^u q) * [P_t(a) F(a) exp(int_t^a q)], exact per piece.
        scale = discount_factor(discount, t, a) * spot_forward(a) * math.exp(q.integral(t, a))
        total += scale * (math.exp(-q.integral(t, a)) - math.exp(-q.integral(t, b)))
    return pv + total


@dataclass(frozen=True)
class NonNegAssetSpec:
    """Inputs for the guaranteed-non-negative asset construction.

    The dividend schedule must carry deterministic times and amounts (cash
    only): the construction needs the cumulative dividend to be known one
    instant ahead.
    """

    spot: float
    schedule: DividendSchedule
    horizon: float = field(default=math.nan)

    def __post_init__(self) -> None:
        if self.spot <= 0:
            raise NonNegConstructionError("spot must be positive")
        if math.isnan(self.horizon):
            object.__setattr__(self, "horizon", self.schedule.horizon)
        if not math.isfinite(self.horizon):
            raise NonNegConstructionError("a finite horizon is required")
        if self.schedule.has_proportional():
            raise NonNegConstructionError(
                "the non-negative construction supports cash dividends only"
            )
        if any(d.fraction is not None for d in self.schedule.cash):
            raise NonNegConstructionError(
                "the non-negative construction needs deterministic dividend amounts"
            )
        if any(d.amount < 0 for d in self.schedule.cash):
            raise NonNegConstructionError("dividends must be non-negative")


def inner_spot(spec: NonNegAssetSpec, discount: RateCurve) -> float:
    """Spot net of the present value of all dividends up to the horizon."""
    pv = pv_future_dividends(spec.schedule, discount, 0.0, spec.horizon)
    s_star = spec.spot - pv
    if s_star <= 0:
        raise NonNegConstructionError(
            f"inner spot {s_star:.6g} is not positive: dividends exhaust the spot"
        )
    return s_star


def remaining_dividend_value(
    spec: NonNegAssetSpec, discount: RateCurve, grid: np.ndarray
) -> np.ndarray:
    """Deterministic V_t^D(horizon) on the grid (value of dividends still due)."""
    grid = np.asarray(grid, dtype=float)
    out = np.zeros_like(grid)
    for k, t in enumerate(grid):
        out[k] = sum(
            d.amount * discount_factor(discount, float(t), d.time)
            for d in spec.schedule.cash
            if d.time > t
        )
    return out


def build_nonneg_asset(
    spec: NonNegAssetSpec,
    martingale_paths: np.ndarray,
    discount: RateCurve,
    grid: np.ndarray,
) -> np.ndarray:
    """Asset paths S_t = S0* B_t M_t + V_t^D(horizon) from unit-mean
    multiplicative martingale paths M (n, K+1)."""
    grid = np.asarray(grid, dtype=float)
    m = np.atleast_2d(martingale_paths)
    if m.shape[1] != len(grid):
        raise DividendError("martingale paths and grid have incompatible shapes")
    if np.any(m < 0):
        raise NonNegConstructionError("martingale driver paths must be non-negative")
    s_star = inner_spot(spec, discount)
    bank = np.exp(discount.integrals_from_zero(grid))
    vd = remaining_dividend_value(spec, discount, grid)
    return s_star * bank[None, :] * m + vd[None, :]


def _total_return_factors(
    schedule: DividendSchedule,
    grid: np.ndarray,
    values: np.ndarray,
    cash_amounts: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if schedule.has_proportional():
        raise DividendError("total return supports lump dividends only")
    values = np.atleast_2d(values)
    n = values.shape[0]
    idx = _cash_indices(schedule, np.asarray(grid, dtype=float))
    if cash_amounts is None:
        cash_amounts = np.broadcast_to(
            np.asarray(schedule.deterministic_amounts()), (n, len(idx))
        )
    post = values[:, idx] if len(idx) else np.empty((n, 0))
    if np.any(post <= 0):
        raise DegeneratePathError("asset value not positive at a dividend time")
    return idx, np.asarray(cash_amounts, dtype=float), post


def total_return(
    schedule: DividendSchedule,
    grid: np.ndarray,
    values: np.ndarray,
    cash_amounts: np.ndarray | None = None,
) -> np.ndarray:
    """Total-return portfolio: the asset with every dividend reinvested.

    Product form: S^TR_t = S_t * prod over dividends up to t of
    (S_tau + phi) / S_tau, with S_tau the post-drop value.
    """
    values = np.atleast_2d(values)
    idx, amounts, post = _total_return_factors(schedule, grid, values, cash_amounts)
    out = values.copy()
    factor = np.ones(values.shape[0])
    prev = 0
    for j, k in enumerate(idx):
        out[:, prev : k] *= factor[:, None]
        factor = factor * (post[:, j] + amounts[:, j]) / post[:, j]
        prev = k
    out[:, prev:] *= factor[:, None]
    return out


def total_return_recursive(
    schedule: DividendSchedule,
    grid: np.ndarray,
    values: np.ndarray,
    cash_amounts: np.ndarray | None = None,
) -> np.ndarray:
    """Same portfolio built by explicit unit rebalancing at each dividend:
    units_i = units_{i-1} * (S_i + phi_i) / S_i, value = units * S_t.
    Cross-checks the product form path by path."""
    values = np.atleast_2d(values)
    idx, amounts, post = _total_return_factors(schedule, grid, values, cash_amounts)
    n, kp1 = values.shape
    units = np.ones(n)
    out = np.empty_like(values)
    j = 0
    for k in range(kp1):
        if j < len(idx) and idx[j] == k:
            units = units * (post[:, j] + amounts[:, j]) / post[:, j]
            j += 1
        out[:, k] = units * values[:, k]
    return out
