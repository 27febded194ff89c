"""Analytic deterministic-rate pricers and forwards.

Every function here is a closed formula: expectations of payoffs arrive
either from the Black formula (lognormal terminal laws) or from the Monte
Carlo engine; this layer never simulates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from .curves import CurveError, RateCurve, discount_factor
from .dividends import DividendSchedule

__all__ = [
    "ContractSpec",
    "PriceReport",
    "PricingError",
    "forward_price",
    "csa_price",
    "black_option",
    "collateralized_forward",
    "fx_forward",
    "quanto_forward",
    "repo_stock_value_rhs",
    "repo_forward",
    "sec_lending_forward",
    "sec_lending_forward_proportional",
    "futures_price",
]

CONTRACT_KINDS = (
    "european-option",
    "call-strip",
    "forward-contract",
    "fx-forward",
    "repo",
    "securities-lending",
    "futures",
    "quanto-forward",
)


class PricingError(ValueError):
    """Invalid contract or pricing inputs."""


@dataclass(frozen=True)
class ContractSpec:
    """Contract description shared by the analytic and Monte Carlo pricers."""

    kind: str
    underlying: str
    maturity: float
    strike: float = 0.0
    fixings: tuple[float, ...] = ()
    payment_lag: float = 0.0
    call: bool = True
    currency: str = "d"
    ell: RateCurve | None = None

    def __post_init__(self) -> None:
        if self.kind not in CONTRACT_KINDS:
            raise PricingError(f"unknown contract kind {self.kind!r}")
        if any(b <= a for a, b in zip(self.fixings, self.fixings[1:])):
            raise PricingError("fixings must be ascending")
        if self.payment_lag < 0:
            raise PricingError("payment lag must be non-negative")
        if self.fixings and self.fixings[-1] + self.payment_lag > self.maturity + 1e-12:
            raise PricingError("maturity must cover every fixing plus the payment lag")

    def fee_curve(self) -> RateCurve:
        return self.ell if self.ell is not None else RateCurve.zero()


@dataclass(frozen=True)
class PriceReport:
    """A price with its provenance; the standard error is present exactly
    when the method is Monte Carlo."""

    value: float
    currency: str
    method: str
    se: float | None = None
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in ("analytic", "mc"):
            raise PricingError(f"method must be analytic or mc, got {self.method!r}")
        if (self.se is None) != (self.method == "analytic"):
            raise PricingError("standard error is present iff the method is mc")


def forward_price(
    spot: float, schedule: DividendSchedule, r: RateCurve, t: float, T: float
) -> float:
    """Forward of a dividend-paying asset under deterministic rates.

    F_t(T) = (S_t - sum of P^mu_t(tau_i) phi_i over t < tau_i <= T) / P^mu_t(T)
    with mu = r - q and P^mu_t(u) = P_t(u) exp(int_t^u q).
    """
    if t > T:
        raise CurveError(f"forward_price requires t <= T, got t={t}, T={T}")
    q = schedule.q()

    def p_mu(u: float) -> float:
        return discount_factor(r, t, u) * math.exp(q.integral(t, u))

    adj = sum(d.amount * p_mu(d.time) for d in schedule.cash if t < d.time <= T)
    if any(d.fraction is not None and t < d.time <= T for d in schedule.cash):
        raise PricingError("forward_price needs deterministic cash amounts")
    fwd = (spot - adj) / p_mu(T)
    if fwd <= 0:
        warnings.warn(
            "forward is not positive: projected cash dividends exceed the spot, "
            "which a liability-free asset cannot support without arbitrage",
            stacklevel=2,
        )
    return fwd


def csa_price(
    contract: ContractSpec,
    z: RateCurve,
    payoff_expectations: Mapping[float, float],
    terminal_expectation: float = 0.0,
    t: float = 0.0,
) -> PriceReport:
    """Continuous-margining price: every expected flow discounts at the
    blended rate z, interim fixings paying at fixing time plus the lag.

    V_t = P^z_t(T) E[phi_T] + sum_j P^z_t(T_j + lag) E[phi_{T_j}]
    """
    for fix in contract.fixings:
        if fix not in payoff_expectations:
            raise PricingError(f"missing payoff expectation for fixing {fix}")
    extra = set(payoff_expectations) - set(contract.fixings)
    if extra:
        raise PricingError(f"payoff expectations for undeclared fixings {sorted(extra)}")
    value = terminal_expectation * discount_factor(z, t, contract.maturity)
    for fix in contract.fixings:
        value += payoff_expectations[fix] * discount_factor(
            z, t, fix + contract.payment_lag
        )
    return PriceReport(value=value, currency=contract.currency, method="analytic")


def black_option(forward, strike: float, sigma: float, expiry: float, df: float, call: bool = True):
    """Black formula on the forward; sigma = 0 returns discounted intrinsic.

    ``forward`` may be a scalar or an array of forwards (vectorized marks)."""
    forward = np.asarray(forward, dtype=float)
    if np.any(forward <= 0) or strike <= 0 or df <= 0 or expiry < 0:
        raise PricingError("black_option needs positive forward, strike and df")
    sd = sigma * math.sqrt(expiry)
    if sd == 0.0:
        intrinsic = forward - strike if call else strike - forward
        out = df * np.maximum(intrinsic, 0.0)
        return float(out) if out.ndim == 0 else out
    d1 = (np.log(forward / strike) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    if call:
        out = df * (forward * ndtr(d1) - strike * ndtr(d2))
    else:
        out = df * (strike * ndtr(-d2) - forward * ndtr(-d1))
    return float(out) if out.ndim == 0 else out


def collateralized_forward(
    value: float,
    flows: Sequence[tuple[float, float]],
    z: RateCurve,
    t: float,
    U: float,
) -> float:
    """Par forward on a collateralized value with interim expected flows:
    F_t(U) = [V_t - sum of P^z_t(T_i) E[phi_i] for t < T_i <= U] / P^z_t(U).
    """
    if t > U:
        raise CurveError(f"collateralized_forward requires t <= U, got t={t}, U={U}")
    interim = sum(
        amount * discount_factor(z, t, when) for when, amount in flows if t < when <= U
    )
    return (value - interim) / discount_factor(z, t, U)


def fx_forward(spot: float, r_xb: RateCurve, r_fb: RateCurve, t: float, U: float) -> float:
    """Par FX forward from the two basis discount curves:
    X_t(U) = X_t * P^{xb}_t(U) / P^{fb}_t(U)."""
    return spot * discount_factor(r_xb, t, U) / discount_factor(r_fb, t, U)


def quanto_forward(
    value: float,
    dividends: Sequence[tuple[float, float]],
    rho: RateCurve,
    r_fb: RateCurve,
    t: float,
    U: float,
) -> float:
    """Forward of a foreign value observed under the domestic measure: the
    price-FX covariation rate rho lowers the capitalization rate to
    eta = r_fb - rho."""
    eta = r_fb - rho
    return collateralized_forward(value, dividends, eta, t, U)


def repo_stock_value_rhs(
    expectation: float, alpha: float, c: RateCurve, kappa: RateCurve, t: float, T: float
) -> float:
    """Right-hand side of the repo-implied stock value identity.

    Given the c-discounted expectation of the terminal stock plus adjusted
    coupon flows, scales it by (1 + alpha) / (P^c/P^kappa + alpha). With
    c = kappa the scale is one: the identity collapses to the expectation.
    """
    if alpha < 0:
        raise PricingError("repo haircut must be non-negative")
    ratio = discount_factor(c, t, T) / discount_factor(kappa, t, T)
    return (1.0 + alpha) / (ratio + alpha) * expectation


def repo_forward(
    spot: float,
    kappa: RateCurve,
    coupons: Sequence[tuple[float, float]],
    t: float,
    U: float,
) -> float:
    """Stock forward implied by a repo at rate kappa with c = kappa and no
    haircut: the dirty-forward formula with repo-rate discounting,
    F_t(U) = [S_t - sum of P^kappa_t(u) E[dPhi_u]] / P^kappa_t(U)."""
    return collateralized_forward(spot, coupons, kappa, t, U)


def sec_lending_forward(
    spot: float,
    z: RateCurve,
    cash_flows: Sequence[tuple[float, float]] = (),
    q: RateCurve | None = None,
    t: float = 0.0,
    U: float = 0.0,
) -> float:
    """Forward of a lent stock under the securities-lending blended rate z
    (z = -alpha r + (1 + alpha) c - ell). Proportional dividends fold into
    the discounting: F_t(U) = [S_t - sum P^{z-q} E dPhi] / P^{z-q}_t(U).
    """
    zq = z - q if q is not None else z
    return collateralized_forward(spot, cash_flows, zq, t, U)


def sec_lending_forward_proportional(
    spot: float, q: RateCurve, ell: RateCurve, r: RateCurve, t: float, U: float
) -> float:
    """Fast path for proportional dividends and fee with collateral at the
    risk-free rate: F_t(U) = S_t exp(-int (q + ell)) / P_t(U)."""
    return spot * math.exp(-(q.integral(t, U) + ell.integral(t, U))) / discount_factor(r, t, U)


def futures_price(
    spot: float, schedule: DividendSchedule, r: RateCurve, t: float, T: float
) -> float:
    """Futures quote under deterministic rates: the risk-neutral expectation
    of the terminal spot, which coincides with the forward. Stochastic-rate
    futures come from the Monte Carlo engine's risk-neutral forward mode."""
    return forward_price(spot, schedule, r, t, T)
