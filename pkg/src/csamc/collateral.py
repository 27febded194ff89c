"""Discrete margin-call engine: CSA collateral accounts and the futures
margin account.

Sign convention (investor viewpoint): positive account values are held by
the investor; a positive posting flow is cash received at the margin time.
Interest between margin times accrues simply at the remuneration rate, as
margin accounts do in practice; the undiscounted flows of a ledger always
telescope to zero (opening + postings + accruals + closing = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from ._util import grid_index
from .curves import RateCurve

__all__ = [
    "CsaSpec",
    "CollateralLedger",
    "CollateralError",
    "margin_times",
    "evolve_collateral",
    "discounted_collateral_flows",
    "futures_margin_account",
]

MARGIN_FREQUENCIES = {"monthly": 12, "weekly": 52, "daily": 252}


class CollateralError(ValueError):
    """Invalid collateral specification or inputs."""


def margin_times(horizon: float, frequency: str) -> tuple[float, ...]:
    """Margin grid t_0 = 0 < ... < t_N = horizon for a named frequency."""
    try:
        per_year = MARGIN_FREQUENCIES[frequency]
    except KeyError:
        raise CollateralError(
            f"unknown margin frequency {frequency!r}; use one of {sorted(MARGIN_FREQUENCIES)}"
        ) from None
    n = max(1, round(horizon * per_year))
    return tuple(np.linspace(0.0, horizon, n + 1))


@dataclass(frozen=True)
class CsaSpec:
    """Collateral agreement: currency, remuneration, haircut and margin grid.

    ``continuous=True`` means a margin call at every simulation grid point.
    Collateral is always re-hypothecated: every posting is a cash flow of
    the position.
    """

    currency: str
    remuneration: RateCurve
    haircut: RateCurve
    times: tuple[float, ...] = ()
    frequency: str | None = None
    continuous: bool = False

    def __post_init__(self) -> None:
        if any(r < 0 for r in self.haircut.rates):
            raise CollateralError("haircut must be non-negative")
        if self.times and any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise CollateralError("margin times must be strictly increasing")
        if not self.continuous and not self.times and self.frequency is None:
            raise CollateralError("margin times, a frequency, or continuous flag required")

    def margin_schedule(self, grid: np.ndarray) -> np.ndarray:
        """Indices of the margin times on the simulation grid (t_0 first)."""
        if self.continuous:
            return np.arange(len(grid), dtype=np.int64)
        times = self.times or margin_times(float(grid[-1]), self.frequency)
        if not math.isclose(times[0], grid[0], rel_tol=0.0, abs_tol=1e-10):
            raise CollateralError("the first margin time must be the contract start")
        return np.asarray(
            [grid_index(grid, t, "margin time") for t in times], dtype=np.int64
        )


@dataclass(frozen=True)
class CollateralLedger:
    """Margin account history at margin times, per path.

    values[:, i] is the account right after the call at t_i; flows[:, i-1]
    is the posting received at t_i net of the interest owed on the previous
    balance; accruals[:, i-1] is that interest. The terminal unwind flow is
    -values[:, -1] at t_N.
    """

    times: np.ndarray
    values: np.ndarray
    flows: np.ndarray
    accruals: np.ndarray
    currency: str

    @property
    def opening(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def closing(self) -> np.ndarray:
        return -self.values[:, -1]

    def telescoping_residual(self) -> np.ndarray:
        """opening + sum of postings + sum of accruals + closing, per path."""
        return (
            self.opening
            + self.flows.sum(axis=1)
            + self.accruals.sum(axis=1)
            + self.closing
        )


def _accrual_factors(c: RateCurve, times: np.ndarray) -> np.ndarray:
    """Simple-compounding accrual c_{t_{i-1}} * (t_i - t_{i-1}) per interval."""
    return np.array([c.rate(float(a)) * (b - a) for a, b in zip(times[:-1], times[1:])])


def evolve_collateral(
    csa: CsaSpec,
    marks: np.ndarray,
    times: np.ndarray,
    fx: np.ndarray | None = None,
) -> CollateralLedger:
    """Run the margin calls against left-limit marks.

    ``marks``: derivative values V_{t_i-} at the margin times (n, N+1), in
    the cash-flow currency. ``fx``: left-limit FX rates converting the
    cash-flow currency into the collateral currency at each margin time,
    required when they differ. The account is set to the target
    (1 + haircut) * mark * fx at every call; interest accrues simply.
    """
    marks = np.atleast_2d(np.asarray(marks, dtype=float))
    times = np.asarray(times, dtype=float)
    if marks.shape[1] != len(times):
        raise CollateralError("marks must be supplied at every margin time")
    if fx is None:
        fx = np.ones((1, len(times)))
    else:
        fx = np.atleast_2d(np.asarray(fx, dtype=float))
        if fx.shape[1] != len(times):
            raise CollateralError("fx must be supplied at every margin time")
    alpha = np.array([csa.haircut.rate(float(t)) for t in times])
    target = (1.0 + alpha)[None, :] * marks * fx
    acc = _accrual_factors(csa.remuneration, times)
    accruals = target[:, :-1] * acc[None, :]
    flows = target[:, 1:] - target[:, :-1] - accruals
    return CollateralLedger(
        times=times, values=target, flows=flows, accruals=accruals, currency=csa.currency
    )


def discounted_collateral_flows(ledger: CollateralLedger, bank: np.ndarray) -> np.ndarray:
    """Sum of posting flows discounted at their payment times, per path.

    This is the discrete-margination approximation of the continuously
    discounted flow integral: each net posting (including the interest
    leg) divides by the bank account at the margin time it settles.
    """
    bank = np.atleast_2d(np.asarray(bank, dtype=float))
    if bank.shape[1] != ledger.values.shape[1]:
        raise CollateralError("bank values must be supplied at every margin time")
    return (ledger.flows / bank[:, 1:]).sum(axis=1)


def futures_margin_account(
    initial_margin: Sequence[float] | np.ndarray,
    futures_quotes: np.ndarray,
    c: RateCurve,
    times: np.ndarray,
) -> CollateralLedger:
    """Clearing-house account: accrues at c, credits initial-margin top-ups
    and the daily variation-margin settlements of the futures quote.

    ``initial_margin``: deterministic account targets J at the margin times
    (N+1,). ``futures_quotes``: per-path quotes f at the margin times
    (n, N+1). The investor's own cash-flow stream is -dJ (the variation
    margin is settled inside the account); the ledger ``flows`` field keeps
    the full account increments net of accrual so telescoping still holds.
    """
    times = np.asarray(times, dtype=float)
    j = np.asarray(initial_margin, dtype=float)
    quotes = np.atleast_2d(np.asarray(futures_quotes, dtype=float))
    if len(j) != len(times) or quotes.shape[1] != len(times):
        raise CollateralError("initial margin and quotes must cover every margin time")
    if j[0] <= 0:
        raise CollateralError("the opening initial margin must be positive")
    acc = _accrual_factors(c, times)
    values, accruals = kernels.futures_account_sweep(
        np.full(quotes.shape[0], j[0]), acc, np.diff(j), np.diff(quotes, axis=1)
    )
    flows = np.diff(values, axis=1) - accruals
    return CollateralLedger(
        times=times, values=values, flows=flows, accruals=accruals, currency="d"
    )
