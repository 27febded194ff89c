"""Monte Carlo valuation and the no-arbitrage verification identities.

The estimators this module builds are all functionals of a PathSet:

* deflated gain processes (bank account, deterministic-curve or positive
  asset numeraires) and their martingale diagnostics;
* exact pathwise self-financing replication of buy-and-hold portfolios;
* collateralized-derivative pricing with a discrete margin-call ledger,
  reported twice: a formula estimator (discounted payoff plus the
  collateral-adjusted dividend stream) and a P&L estimator (every
  simulated cash flow discounted), whose mean must be statistically zero;
* forward estimators under the T-forward and risk-neutral readings;
* margination-frequency convergence tables under common random numbers.

Statistical gates are fixed at three standard errors; raw drifts and
standard errors are always reported so callers can tighten.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from ._util import grid_index
from .collateral import CollateralLedger, CsaSpec, evolve_collateral, futures_margin_account
from .curves import CurveSet, RateCurve, basis_rate
from .dividends import DividendSchedule, cumulative_dividend
from .models import PathSet
from .pricing import ContractSpec, forward_price

__all__ = [
    "McError",
    "McEstimate",
    "DeflatedGain",
    "DiagnosticRow",
    "DiagnosticTable",
    "PriceMcResult",
    "deflated_gain",
    "martingale_diagnostic",
    "self_financing_replication",
    "price_mc",
    "forward_mc",
    "margination_convergence",
    "pnl_zero_test",
    "repo_seller_pnl",
    "sec_lending_pnl",
    "futures_investor_pnl",
]

GATE_SE = 3.0


class McError(ValueError):
    """Invalid Monte Carlo inputs."""


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error."""

    mean: float
    se: float
    n_paths: int
    seed: int

    @classmethod
    def from_samples(cls, samples: np.ndarray, seed: int) -> "McEstimate":
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0]
        if n < 2:
            raise McError("an estimate needs at least two paths")
        return cls(
            mean=float(samples.mean()),
            se=float(samples.std(ddof=1) / math.sqrt(n)),
            n_paths=n,
            seed=seed,
        )


def _deflator_matrix(paths: PathSet) -> np.ndarray:
    return np.exp(np.atleast_2d(paths.deflator_log))


@dataclass(frozen=True)
class DeflatedGain:
    """Per-path deflated gain process with its component breakdown.

    total = value (asset over numeraire) + dividends (numeraire-discounted
    dividend stream, left-point rule) + correction (the dividend-numeraire
    jump covariation, non-zero only when both move at the same grid time,
    i.e. for a simulated-driver numeraire at a cash dividend)."""

    times: np.ndarray
    total: np.ndarray
    value: np.ndarray
    dividends: np.ndarray
    correction: np.ndarray
    numeraire: str

    @property
    def initial(self) -> float:
        return float(self.total[:, 0].mean())


def _resolve_numeraire(
    paths: PathSet, numeraire: str, curves: CurveSet | None
) -> tuple[np.ndarray, bool]:
    """Numeraire values (n or 1, K+1) and whether it jumps at grid scale."""
    if numeraire == "bank":
        return _deflator_matrix(paths), False
    if numeraire in paths.values:
        beta = paths[numeraire]
        if beta.min() <= 0.0:
            raise McError(f"numeraire driver {numeraire!r} is not strictly positive")
        return beta, True
    if curves is not None and numeraire in curves.curves:
        curve = curves.curve(numeraire)
        return np.exp(curve.integrals_from_zero(paths.grid))[None, :], False
    raise McError(f"unknown numeraire {numeraire!r}")


def deflated_gain(
    paths: PathSet,
    asset: str,
    schedule: DividendSchedule | None = None,
    numeraire: str = "bank",
    curves: CurveSet | None = None,
) -> DeflatedGain:
    """Deflated gain of an asset: value over the numeraire plus the
    numeraire-discounted cumulative dividends.

    Cash dividends divide by the numeraire exactly at their grid time; for
    a driver numeraire this is booked as the left-limit division plus the
    jump-covariation correction, which the breakdown reports separately.
    """
    s = paths[asset]
    if schedule is None:
        schedule = paths.driver(asset).dividends or DividendSchedule()
    beta, beta_jumps = _resolve_numeraire(paths, numeraire, curves)
    grid = paths.grid
    n, kp1 = s.shape
    value = s / beta
    dividends = np.zeros((n, kp1))
    correction = np.zeros((n, kp1))
    if schedule.has_proportional():
        q = schedule.q()
        dt = np.diff(grid)
        qleft = np.array([q.rate(float(t)) for t in grid[:-1]])
        contrib = s[:, :-1] * (qleft * dt)[None, :] / beta[:, :-1]
        dividends[:, 1:] += np.cumsum(contrib, axis=1)
    live_cash = schedule.cash_within(float(grid[-1]))
    if live_cash:
        amounts = paths.cash_amounts.get(asset)
        if amounts is None or amounts.shape[1] != len(live_cash):
            raise McError(f"asset {asset!r} was not simulated with this cash schedule")
        step_div = np.zeros((n, kp1))
        step_corr = np.zeros((n, kp1))
        for j, div in enumerate(live_cash):
            k = grid_index(grid, div.time, "cash dividend time")
            phi = amounts[:, j]
            if beta_jumps:
                step_div[:, k] += phi / beta[:, k - 1]
                step_corr[:, k] += phi * (1.0 / beta[:, k] - 1.0 / beta[:, k - 1])
            else:
                step_div[:, k] += phi / np.broadcast_to(beta, (n, kp1))[:, k]
        dividends += np.cumsum(step_div, axis=1)
        correction += np.cumsum(step_corr, axis=1)
    total = value + dividends + correction
    return DeflatedGain(
        times=grid,
        total=total,
        value=value,
        dividends=dividends,
        correction=correction,
        numeraire=numeraire,
    )


@dataclass(frozen=True)
class DiagnosticRow:
    time: float
    drift: float
    se: float
    passed: bool


@dataclass(frozen=True)
class DiagnosticTable:
    name: str
    rows: tuple[DiagnosticRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def martingale_diagnostic(
    gain: DeflatedGain, times: Sequence[float], name: str = "gain"
) -> DiagnosticTable:
    """Mean drift of the gain process at the requested times, gated at
    three standard errors."""
    n = gain.total.shape[0]
    if n < 2:
        raise McError("martingale diagnostics need at least two paths")
    g0 = gain.initial
    rows = []
    for t in times:
        k = grid_index(gain.times, float(t))
        x = gain.total[:, k]
        drift = float(x.mean()) - g0
        se = float(x.std(ddof=1) / math.sqrt(n))
        rows.append(DiagnosticRow(time=float(t), drift=drift, se=se, passed=abs(drift) <= GATE_SE * se))
    return DiagnosticTable(name=name, rows=tuple(rows))


def self_financing_replication(
    paths: PathSet, asset: str, schedule: DividendSchedule | None = None
) -> np.ndarray:
    """Residual of the buy-and-hold replication identity, per path and time.

    The portfolio holds one unit of the asset and rolls every cash dividend
    into the bank account: units phi0_t = sum of phi_i / B_{tau_i}. Its
    deflated value must equal the deflated gain process exactly; the
    returned residual is zero to rounding by construction and guards the
    bookkeeping. Proportional dividends are rejected: their discrete
    integral would break pathwise exactness.
    """
    if schedule is None:
        schedule = paths.driver(asset).dividends or DividendSchedule()
    if schedule.has_proportional():
        raise McError("replication supports lump dividends only")
    s = paths[asset]
    bank = np.broadcast_to(_deflator_matrix(paths), s.shape)
    n, kp1 = s.shape
    units = np.zeros((n, kp1))
    live_cash = schedule.cash_within(float(paths.grid[-1]))
    if live_cash:
        amounts = paths.cash_amounts.get(asset)
        if amounts is None:
            raise McError(f"asset {asset!r} was not simulated with this cash schedule")
        step = np.zeros((n, kp1))
        for j, div in enumerate(live_cash):
            k = grid_index(paths.grid, div.time, "cash dividend time")
            step[:, k] += amounts[:, j] / bank[:, k]
        units = np.cumsum(step, axis=1)
    wealth = units * bank + s
    gain = deflated_gain(paths, asset, schedule, numeraire="bank")
    return wealth / bank - gain.total


# ---------------------------------------------------------------------------
# collateralized-derivative pricing
# ---------------------------------------------------------------------------


def payoff_flows(contract: ContractSpec, paths: PathSet) -> list[tuple[int, np.ndarray]]:
    """Contract cash flows as (grid index of payment, per-path amount)."""
    s = paths[contract.underlying]
    grid = paths.grid
    if contract.kind == "european-option":
        k = grid_index(grid, contract.maturity, "contract maturity")
        sign = 1.0 if contract.call else -1.0
        return [(k, np.maximum(sign * (s[:, k] - contract.strike), 0.0))]
    if contract.kind == "call-strip":
        flows = []
        for fix in contract.fixings:
            kf = grid_index(grid, fix, "fixing time")
            kp = grid_index(grid, fix + contract.payment_lag, "payment time")
            flows.append((kp, np.maximum(s[:, kf] - contract.strike, 0.0)))
        return flows
    if contract.kind == "forward-contract":
        k = grid_index(grid, contract.maturity, "contract maturity")
        return [(k, s[:, k] - contract.strike)]
    raise McError(f"no simulated payoff for contract kind {contract.kind!r}")


def _spread_curve(contract: ContractSpec, csa: CsaSpec, curves: CurveSet, paths: PathSet) -> RateCurve:
    """c^g minus the basis rate of the collateral currency (single-currency
    CSAs reduce to c minus r)."""
    return csa.remuneration - basis_rate(curves, csa.currency)


def _ledger_on_grid(ledger_values: np.ndarray, margin_idx: np.ndarray, kp1: int) -> np.ndarray:
    """Expand margin-time account values to the full grid (flat between calls)."""
    pos = np.searchsorted(margin_idx, np.arange(kp1), side="right") - 1
    return ledger_values[:, pos]


@dataclass(frozen=True)
class PriceMcResult:
    """Both collateralized-price estimators plus the margin ledger.

    ``estimate`` is the formula estimator (the price); ``pnl`` is the
    simulated-cash-flow estimator, whose mean is the margination bias
    against the analytic value used for the marks."""

    estimate: McEstimate
    pnl: McEstimate
    formula_samples: np.ndarray
    pnl_samples: np.ndarray
    ledger: CollateralLedger

    @property
    def diagnostics(self) -> Mapping[str, float]:
        return {
            "price": self.estimate.mean,
            "price_se": self.estimate.se,
            "pnl_mean": self.pnl.mean,
            "pnl_se": self.pnl.se,
        }


def price_mc(
    contract: ContractSpec,
    paths: PathSet,
    csa: CsaSpec,
    mark_fn: Callable[[float, np.ndarray], np.ndarray],
    curves: CurveSet,
    analytic_value: float,
    fx_driver: str | None = None,
) -> PriceMcResult:
    """Price a collateralized contract on simulated paths.

    ``mark_fn(t, underlying values) -> derivative values`` supplies the
    marks the margin calls chase (left limits are taken internally), which
    breaks the recursion between the price and the collateral. When the
    collateral currency differs from the cash-flow currency, ``fx_driver``
    names the simulated FX rate converting collateral currency into
    cash-flow currency.
    """
    k_mat = paths.time_index(contract.maturity)
    s = paths[contract.underlying][:, : k_mat + 1]
    grid = paths.grid[: k_mat + 1]
    n, kp1 = s.shape
    dt = np.diff(grid)
    disc = 1.0 / np.broadcast_to(_deflator_matrix(paths), (paths.n_paths, paths.n_times))[
        :, : k_mat + 1
    ]

    cross = csa.currency != contract.currency
    if cross:
        if fx_driver is None or fx_driver not in paths.values:
            raise McError(
                "cross-currency collateral needs the simulated FX driver "
                "(collateral currency into cash-flow currency)"
            )
        fx_gf = np.broadcast_to(paths[fx_driver], (n, paths.n_times))[:, : kp1]
    else:
        fx_gf = np.ones((1, kp1))

    marks = np.empty((n, kp1))
    for k in range(kp1):
        marks[:, k] = mark_fn(float(grid[k]), s[:, k])
    marks_left = np.empty_like(marks)
    marks_left[:, 0] = marks[:, 0]
    marks_left[:, 1:] = marks[:, :-1]

    margin_idx = csa.margin_schedule(grid)
    if margin_idx[-1] != kp1 - 1:
        raise McError("the margin schedule must extend to the contract maturity")
    fx_fg_left = np.ones((n, len(margin_idx)))
    if cross:
        left = np.maximum(margin_idx - 1, 0)
        fx_fg_left = 1.0 / fx_gf[:, left]
    ledger = evolve_collateral(
        csa, marks_left[:, margin_idx], grid[margin_idx], fx=fx_fg_left if cross else None
    )

    # formula estimator: discounted payoff plus the dividend stream of the
    # collateralized derivative, with the ledger's account as collateral
    spread = _spread_curve(contract, csa, curves, paths)
    spread_left = np.array([spread.rate(float(t)) for t in grid[:-1]])
    ell = contract.fee_curve()
    ell_left = np.array([ell.rate(float(t)) for t in grid[:-1]])
    c_on_grid = _ledger_on_grid(ledger.values, margin_idx, kp1)
    fx_collateral = fx_gf[:, :-1] if cross else 1.0
    dividend_steps = (
        ell_left * marks[:, :-1] * dt
        - c_on_grid[:, :-1] * fx_collateral * (spread_left * dt)
    ) * disc[:, :-1]
    formula = dividend_steps.sum(axis=1)
    pay_legs = payoff_flows(contract, paths)
    for k, amounts in pay_legs:
        formula = formula + amounts * disc[:, k]

    # P&L estimator: every cash flow of buying the contract, running the
    # margin account to maturity and unwinding, discounted to inception
    pnl = np.full(n, -analytic_value)
    fx_at_margin = fx_gf[:, margin_idx]
    pnl += ledger.values[:, 0] * fx_at_margin[:, 0]
    pnl += (ledger.flows * fx_at_margin[:, 1:] * disc[:, margin_idx[1:]]).sum(axis=1)
    pnl -= ledger.values[:, -1] * fx_at_margin[:, -1] * disc[:, -1]
    pnl += (ell_left * marks[:, :-1] * dt * disc[:, :-1]).sum(axis=1)
    for k, amounts in pay_legs:
        pnl = pnl + amounts * disc[:, k]

    return PriceMcResult(
        estimate=McEstimate.from_samples(formula, paths.seed),
        pnl=McEstimate.from_samples(pnl, paths.seed),
        formula_samples=formula,
        pnl_samples=pnl,
        ledger=ledger,
    )


def derivative_gain_processes(
    contract: ContractSpec,
    paths: PathSet,
    csa: CsaSpec,
    mark_fn: Callable[[float, np.ndarray], np.ndarray],
    curves: CurveSet,
    fx_driver: str | None = None,
) -> dict[str, DeflatedGain]:
    """Deflated gains of the derivative and of the collateralized position.

    "derivative": V over the funding account plus the collateral-adjusted
    dividend stream. "position": (V - C) deflated plus every margin flow.
    Both are martingales under the simulation measure up to the discrete
    margination residual.
    """
    s = paths[contract.underlying]
    grid = paths.grid
    n, kp1 = s.shape
    dt = np.diff(grid)
    disc = 1.0 / np.broadcast_to(_deflator_matrix(paths), (n, kp1))
    cross = csa.currency != contract.currency
    if cross and (fx_driver is None or fx_driver not in paths.values):
        raise McError("cross-currency collateral needs the simulated FX driver")
    fx_gf = np.broadcast_to(paths[fx_driver], (n, kp1)) if cross else np.ones((n, kp1))

    marks = np.empty((n, kp1))
    for k in range(kp1):
        marks[:, k] = mark_fn(float(grid[k]), s[:, k])
    marks_left = np.concatenate([marks[:, :1], marks[:, :-1]], axis=1)
    margin_idx = csa.margin_schedule(grid)
    left = np.maximum(margin_idx - 1, 0)
    ledger = evolve_collateral(
        csa,
        marks_left[:, margin_idx],
        grid[margin_idx],
        fx=(1.0 / fx_gf[:, left]) if cross else None,
    )
    spread = _spread_curve(contract, csa, curves, paths)
    spread_left = np.array([spread.rate(float(t)) for t in grid[:-1]])
    ell = contract.fee_curve()
    ell_left = np.array([ell.rate(float(t)) for t in grid[:-1]])
    c_on_grid = _ledger_on_grid(ledger.values, margin_idx, kp1)

    div_steps = np.zeros((n, kp1))
    div_steps[:, 1:] = (
        ell_left * marks[:, :-1] * dt
        - c_on_grid[:, :-1] * (fx_gf[:, :-1] if cross else 1.0) * (spread_left * dt)
    ) * disc[:, :-1]
    derivative = DeflatedGain(
        times=grid,
        total=marks * disc + np.cumsum(div_steps, axis=1),
        value=marks * disc,
        dividends=np.cumsum(div_steps, axis=1),
        correction=np.zeros((n, kp1)),
        numeraire="bank",
    )

    pos_steps = np.zeros((n, kp1))
    pos_steps[:, 1:] = (ell_left * marks[:, :-1] * dt) * disc[:, :-1]
    for i, k in enumerate(margin_idx[1:]):
        pos_steps[:, k] += ledger.flows[:, i] * fx_gf[:, k] * disc[:, k]
    c_in_f = c_on_grid * fx_gf
    position = DeflatedGain(
        times=grid,
        total=(marks - c_in_f) * disc + np.cumsum(pos_steps, axis=1),
        value=(marks - c_in_f) * disc,
        dividends=np.cumsum(pos_steps, axis=1),
        correction=np.zeros((n, kp1)),
        numeraire="bank",
    )
    return {"derivative": derivative, "position": position}


def forward_mc(paths: PathSet, asset: str, T: float, mode: str, zcb: float | None = None) -> McEstimate:
    """Forward estimators: "t-forward" is mean(S_T / B_T) / P_0(T); the
    "risk-neutral" mode is mean(S_T), the futures quote."""
    k = paths.time_index(T)
    s_t = paths[asset][:, k]
    if mode == "risk-neutral":
        return McEstimate.from_samples(s_t, paths.seed)
    if mode != "t-forward":
        raise McError(f"unknown forward mode {mode!r}")
    disc = np.broadcast_to(_deflator_matrix(paths), paths[asset].shape)[:, k]
    if zcb is None:
        zcb = float(np.mean(1.0 / disc))
    return McEstimate.from_samples(s_t / disc / zcb, paths.seed)


@dataclass(frozen=True)
class ConvergenceRow:
    frequency: str
    bias: float
    se: float


def margination_convergence(
    contract: ContractSpec,
    paths: PathSet,
    csa: CsaSpec,
    frequencies: Sequence[str],
    mark_fn: Callable[[float, np.ndarray], np.ndarray],
    curves: CurveSet,
    analytic_value: float,
    fx_driver: str | None = None,
) -> list[ConvergenceRow]:
    """Margination bias per margin frequency on one common path set.

    bias(frequency) = formula-estimator mean minus the analytic
    (continuous-margining) value; the shared paths make the frequency
    differences common-random-number comparisons. The margin times of
    every frequency must already be grid points.
    """
    rows = []
    for freq in frequencies:
        csa_f = replace(csa, frequency=freq, times=(), continuous=False)
        res = price_mc(contract, paths, csa_f, mark_fn, curves, analytic_value, fx_driver)
        rows.append(
            ConvergenceRow(
                frequency=freq, bias=res.estimate.mean - analytic_value, se=res.estimate.se
            )
        )
    return rows


@dataclass(frozen=True)
class PnlTestResult:
    estimate: McEstimate
    passed: bool


def pnl_zero_test(discounted_pnl: np.ndarray, seed: int = 0) -> PnlTestResult:
    """Equilibrium check: the mean discounted P&L of a full contract
    simulation must vanish within three standard errors."""
    est = McEstimate.from_samples(discounted_pnl, seed)
    return PnlTestResult(estimate=est, passed=abs(est.mean) <= GATE_SE * est.se)


# ---------------------------------------------------------------------------
# full-contract P&L simulations
# ---------------------------------------------------------------------------


def _margin_accruals(curve: RateCurve, times: np.ndarray) -> np.ndarray:
    return np.array([curve.rate(float(a)) * (b - a) for a, b in zip(times[:-1], times[1:])])


def _dividend_flow_sum(
    paths: PathSet, asset: str, disc: np.ndarray, schedule: DividendSchedule
) -> np.ndarray:
    """Discounted dividend income of holding the asset, per path."""
    s = paths[asset]
    grid = paths.grid
    total = np.zeros(s.shape[0])
    if schedule.has_proportional():
        q = schedule.q()
        dt = np.diff(grid)
        qleft = np.array([q.rate(float(t)) for t in grid[:-1]])
        total += (s[:, :-1] * (qleft * dt) * disc[:, :-1]).sum(axis=1)
    for j, div in enumerate(schedule.cash_within(float(grid[-1]))):
        k = grid_index(grid, div.time, "cash dividend time")
        total += paths.cash_amounts[asset][:, j] * disc[:, k]
    return total


def repo_seller_pnl(
    paths: PathSet,
    stock: str,
    kappa: RateCurve,
    c: RateCurve,
    alpha0: float,
    margin_times: np.ndarray,
) -> np.ndarray:
    """Discounted P&L of the repo seller of one stock unit.

    Stock-driven repo: the seller posts one unit of stock, receives the
    cash loan H = S_0 / (1 + alpha0), and cash margin keeps the collateral
    (stock plus cash) at (1 + alpha0) times the accrued loan. Stock
    collateral is marked at its current price at each call. Dividends pass
    through to the seller; at maturity the seller repays the accrued loan
    and the collateral unwinds.
    """
    if alpha0 < 0:
        raise McError("repo haircut must be non-negative")
    s = paths[stock]
    grid = paths.grid
    n, kp1 = s.shape
    disc = 1.0 / np.broadcast_to(_deflator_matrix(paths), (n, kp1))
    idx = np.asarray([grid_index(grid, float(t), "margin time") for t in margin_times])
    if idx[0] != 0 or idx[-1] != kp1 - 1:
        raise McError("repo margin times must start at inception and end at maturity")
    times = grid[idx]
    h0 = s[0, 0] / (1.0 + alpha0)
    loan = h0 * np.exp(kappa.integrals_from_zero(times))      # accrued cash loan X_t
    target = (1.0 + alpha0) * loan                            # collateral target
    cash = target[None, :] - s[:, idx]                        # cash collateral F_t held by buyer
    acc = _margin_accruals(c, times)
    calls = cash[:, 1:] - cash[:, :-1] * (1.0 + acc)[None, :] # margin call received by the buyer
    pnl = np.zeros(n)
    pnl -= (calls * disc[:, idx[1:]]).sum(axis=1)
    schedule = paths.driver(stock).dividends or DividendSchedule()
    pnl += _dividend_flow_sum(paths, stock, disc, schedule)
    pnl += (s[:, -1] + cash[:, -1] - loan[-1]) * disc[:, -1]
    pnl -= s[:, 0] + cash[:, 0] - loan[0]
    return pnl


def sec_lending_pnl(
    paths: PathSet,
    stock: str,
    ell: RateCurve,
    c: RateCurve,
    alpha: RateCurve,
    margin_times: np.ndarray,
) -> np.ndarray:
    """Discounted P&L of the stock lender under cash collateralization.

    The lender hands over the stock against cash collateral at
    (1 + haircut) times the left-limit stock value, earns the lending fee
    on the stock value and the pass-through dividends, pays collateral
    interest, and unwinds at maturity.
    """
    s = paths[stock]
    grid = paths.grid
    n, kp1 = s.shape
    disc = 1.0 / np.broadcast_to(_deflator_matrix(paths), (n, kp1))
    idx = np.asarray([grid_index(grid, float(t), "margin time") for t in margin_times])
    if idx[0] != 0 or idx[-1] != kp1 - 1:
        raise McError("margin times must start at inception and end at maturity")
    left = np.maximum(idx - 1, 0)
    alpha_i = np.array([alpha.rate(float(t)) for t in grid[idx]])
    coll = (1.0 + alpha_i)[None, :] * s[:, left]
    acc = _margin_accruals(c, grid[idx])
    calls = coll[:, 1:] - coll[:, :-1] * (1.0 + acc)[None, :]
    dt = np.diff(grid)
    ell_left = np.array([ell.rate(float(t)) for t in grid[:-1]])
    pnl = np.zeros(n)
    pnl -= s[:, 0] - coll[:, 0]
    pnl += (s[:, :-1] * (ell_left * dt) * disc[:, :-1]).sum(axis=1)
    pnl += (calls * disc[:, idx[1:]]).sum(axis=1)
    schedule = paths.driver(stock).dividends or DividendSchedule()
    pnl += _dividend_flow_sum(paths, stock, disc, schedule)
    pnl += (s[:, -1] - coll[:, -1]) * disc[:, -1]
    return pnl


def futures_investor_pnl(
    paths: PathSet,
    underlying: str,
    initial_margin: float,
    c: RateCurve,
    r: RateCurve,
    margin_times: np.ndarray,
    maturity: float,
) -> np.ndarray:
    """Discounted P&L of a futures investor entering at inception.

    Quotes are the deterministic-rate closed form f_t = E_t[S_T] applied to
    the simulated spot; the investor pays the initial margin, tops it up or
    withdraws as the deterministic schedule moves (constant here), and
    collects the account at expiry.
    """
    s = paths[underlying]
    grid = paths.grid
    n, kp1 = s.shape
    disc = 1.0 / np.broadcast_to(_deflator_matrix(paths), (n, kp1))
    idx = np.asarray([grid_index(grid, float(t), "margin time") for t in margin_times])
    if idx[0] != 0 or idx[-1] != kp1 - 1:
        raise McError("margin times must start at inception and end at maturity")
    schedule = paths.driver(underlying).dividends or DividendSchedule()
    q = schedule.q()
    quotes = np.empty((n, len(idx)))
    for col, k in enumerate(idx):
        t = float(grid[k])
        p_mu_T = math.exp(-(r.integral(t, maturity) - q.integral(t, maturity)))
        adj = sum(
            d.amount * math.exp(-(r.integral(t, d.time) - q.integral(t, d.time)))
            for d in schedule.cash
            if t < d.time <= maturity
        )
        quotes[:, col] = (s[:, k] - adj) / p_mu_T
    j = np.full(len(idx), initial_margin)
    ledger = futures_margin_account(j, quotes, c, grid[idx])
    pnl = np.zeros(n)
    pnl -= initial_margin
    # -dJ flows are zero for a constant initial-margin schedule
    pnl += ledger.values[:, -1] * disc[:, -1]
    return pnl
