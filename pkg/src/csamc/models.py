"""Correlated stochastic drivers and discrete-time path simulation.

Driver kinds: lognormal assets with compound-Poisson lognormal jumps and
cash-dividend drops, Vasicek short rates (exact joint transition of the
rate and its time integral), lognormal FX rates, and unit-mean exponential
martingales. Paths are simulated under a declared pricing measure; measure
changes are realized by switching drifts (and, for a jump numeraire, by
tilting its jump law), never by likelihood weights.

Per-step transitions are exact: there is no Euler bias in drift-only
quantities, and deflated assets are discrete-time martingales under the
simulation measure up to the left-point rule used for proportional
dividend integrals.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np

from . import kernels
from ._util import grid_index
from .curves import CurveError, CurveSet, RateCurve, basis_rate
from .dividends import DegeneratePathError, DividendSchedule

__all__ = [
    "DriverSpec",
    "Measure",
    "CorrelationMatrix",
    "PathSet",
    "ModelError",
    "simulate",
    "build_grid",
    "quadratic_covariation",
    "vasicek_zcb",
]

DEFAULT_BLOCK_SIZE = 65536


class ModelError(ValueError):
    """Invalid model specification or simulation inputs."""


@dataclass(frozen=True)
class DriverSpec:
    """One stochastic driver of the market model.

    kind:
      - "lognormal-jump-asset": dS/S = drift dt + sigma dW + jumps - drops;
        jumps are compound Poisson with lognormal sizes, compensated in the
        drift so the deflated, dividend-reinvested asset is a martingale.
      - "vasicek-short-rate": dr = a (theta - r) dt + sigma_r dW, simulated
        jointly with its integral (exact Gaussian transition).
      - "lognormal-fx": exact lognormal step, drift set by the measure rule.
      - "exponential-martingale": unit-start positive martingale, zero
        drift under the simulation measure.

    drift: "auto" resolves the risk-neutral rule for the measure (the short
    rate under Q, the basis rate of the measure currency under a foreign
    basis measure); a curve id pins the drift explicitly (repo-bound assets).
    """

    name: str
    kind: Literal[
        "lognormal-jump-asset", "vasicek-short-rate", "lognormal-fx", "exponential-martingale"
    ]
    sigma: float = 0.0
    initial: float = 1.0
    drift: str = "auto"
    jump_intensity: float = 0.0
    jump_mean: float = 0.0
    jump_std: float = 0.0
    mean_reversion: float = math.nan
    rate_vol: float = math.nan
    long_run: float = math.nan
    dividends: DividendSchedule | None = None
    fee: str | None = None
    pair: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ModelError(f"driver {self.name!r}: sigma must be non-negative")
        if self.jump_intensity < 0 or self.jump_std < 0:
            raise ModelError(f"driver {self.name!r}: jump parameters must be non-negative")
        if self.kind == "vasicek-short-rate":
            if not self.mean_reversion > 0:
                raise ModelError(f"driver {self.name!r}: mean reversion must be positive")
            if not self.rate_vol >= 0:
                raise ModelError(f"driver {self.name!r}: rate vol must be non-negative")
            if math.isnan(self.long_run):
                raise ModelError(f"driver {self.name!r}: long-run level required")
        elif self.kind == "lognormal-fx":
            if self.pair is None:
                raise ModelError(f"driver {self.name!r}: fx drivers need a currency pair")
            if self.initial <= 0:
                raise ModelError(f"driver {self.name!r}: initial fx rate must be positive")
            if self.jump_intensity:
                raise ModelError(f"driver {self.name!r}: fx drivers carry no jumps")
        elif self.kind in ("lognormal-jump-asset", "exponential-martingale"):
            if self.initial <= 0:
                raise ModelError(f"driver {self.name!r}: initial value must be positive")
        else:
            raise ModelError(f"driver {self.name!r}: unknown kind {self.kind!r}")
        if self.dividends is not None and self.kind != "lognormal-jump-asset":
            raise ModelError(f"driver {self.name!r}: only assets pay dividends")

    @property
    def jump_compensator(self) -> float:
        """lambda-rate compensation kappa-bar = E[e^J] - 1 of the jump law."""
        if self.jump_intensity == 0.0:
            return 0.0
        return math.expm1(self.jump_mean + 0.5 * self.jump_std**2)


@dataclass(frozen=True)
class Measure:
    """Pricing measure tag: Q (domestic risk-neutral), Q^{fb} (foreign basis
    measure of a currency), Q^T (T-forward; deterministic rates only, where
    it coincides with Q), or the measure of a positive asset numeraire."""

    kind: Literal["Q", "QFB", "QT", "QNUM"] = "Q"
    currency: str | None = None
    numeraire: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "QFB" and not self.currency:
            raise ModelError("foreign basis measure needs a currency")
        if self.kind == "QNUM" and not self.numeraire:
            raise ModelError("numeraire measure needs a numeraire driver id")

    @classmethod
    def q(cls) -> "Measure":
        return cls("Q")

    @classmethod
    def qfb(cls, currency: str) -> "Measure":
        return cls("QFB", currency=currency)

    @classmethod
    def qt(cls) -> "Measure":
        return cls("QT")

    @classmethod
    def numeraire_of(cls, driver: str) -> "Measure":
        return cls("QNUM", numeraire=driver)

    def label(self) -> str:
        if self.kind == "QFB":
            return f"Q^{self.currency}b"
        if self.kind == "QNUM":
            return f"Q^{self.numeraire}"
        return self.kind


@dataclass(frozen=True)
class CorrelationMatrix:
    """Correlations of the drivers' Brownian components, one per driver."""

    order: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        n = len(self.order)
        if m.shape != (n, n):
            raise ModelError(f"correlation matrix must be {n}x{n}")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ModelError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(m), 1.0, atol=1e-12):
            raise ModelError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(m) > 1 + 1e-12):
            raise ModelError("correlations must lie in [-1, 1]")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ModelError("correlation matrix is not positive semidefinite")

    @classmethod
    def identity(cls, order: Sequence[str]) -> "CorrelationMatrix":
        return cls(tuple(order), np.eye(len(order)))

    def rho(self, a: str, b: str) -> float:
        return float(self.matrix[self.order.index(a), self.order.index(b)])


@dataclass(frozen=True)
class PathSet:
    """Simulated driver values on a time grid, immutable after assembly.

    values[name] has shape (n_paths, len(grid)). Left limits at event times
    are realized as the previous grid point (``left_values``). For Vasicek
    drivers ``rate_integrals[name]`` holds the pathwise integral of the
    rate from 0. ``deflator_log`` is the log bank account of the measure's
    funding rate: per-path (n, K+1) when the short rate is simulated,
    deterministic (K+1,) otherwise. ``cash_amounts[name]`` records the
    dividend drops actually applied (n, number of dividends).
    """

    grid: np.ndarray
    values: Mapping[str, np.ndarray]
    rate_integrals: Mapping[str, np.ndarray]
    cash_amounts: Mapping[str, np.ndarray]
    deflator_log: np.ndarray
    measure: Measure
    drivers: tuple[DriverSpec, ...]
    seed: int
    block_size: int
    antithetic: bool

    @property
    def n_paths(self) -> int:
        return next(iter(self.values.values())).shape[0]

    @property
    def n_times(self) -> int:
        return len(self.grid)

    def driver(self, name: str) -> DriverSpec:
        for d in self.drivers:
            if d.name == name:
                return d
        raise ModelError(f"unknown driver id {name!r}")

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.values[name]
        except KeyError:
            raise ModelError(f"unknown driver id {name!r}") from None

    def left_values(self, name: str) -> np.ndarray:
        """Values one grid point earlier (the discrete left limit)."""
        v = self[name]
        out = np.empty_like(v)
        out[:, 0] = v[:, 0]
        out[:, 1:] = v[:, :-1]
        return out

    def deflator(self) -> np.ndarray:
        """Bank account of the measure's funding rate, per path or (K+1,)."""
        return np.exp(self.deflator_log)

    def time_index(self, t: float) -> int:
        return grid_index(self.grid, t)


def build_grid(
    horizon: float, steps_per_year: int = 252, event_times: Sequence[float] = ()
) -> np.ndarray:
    """Uniform base grid refined to include every event time."""
    if horizon <= 0:
        raise ModelError("horizon must be positive")
    n = max(1, round(horizon * steps_per_year))
    base = np.linspace(0.0, horizon, n + 1)
    events = sorted(set(float(t) for t in event_times))
    if any(t < 0 or t > horizon + 1e-12 for t in events):
        raise ModelError("event times must lie within [0, horizon]")
    keep = base[np.all(np.abs(base[:, None] - np.array(events)[None, :]) > 1e-9, axis=1)] if events else base
    grid = np.union1d(keep, events)
    grid[0], grid[-1] = 0.0, horizon
    return grid


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        if w.min() < -1e-10 * max(w.max(), 1.0):
            raise ModelError("step covariance is not positive semidefinite") from None
        return v * np.sqrt(np.clip(w, 0.0, None))


def _ou_moments(a: float, dt: float) -> tuple[float, float, float]:
    """Loading integrals for the exact OU (rate, integral) transition."""
    e1 = -math.expm1(-a * dt)          # 1 - e^{-a dt}
    e2 = -math.expm1(-2.0 * a * dt)    # 1 - e^{-2a dt}
    v_rr = e2 / (2.0 * a)
    v_ri = (e1 / a - e2 / (2.0 * a)) / a
    v_ii = (dt - 2.0 * e1 / a + e2 / (2.0 * a)) / (a * a)
    return v_rr, v_ri, v_ii


def _component_layout(drivers: Sequence[DriverSpec]) -> dict[str, int]:
    """Row index of each driver's first Gaussian component."""
    layout, row = {}, 0
    for d in drivers:
        layout[d.name] = row
        row += 2 if d.kind == "vasicek-short-rate" else 1
    layout["__n__"] = row
    return layout


def _step_covariance(
    drivers: Sequence[DriverSpec], corr: CorrelationMatrix, dt: float, layout: dict[str, int]
) -> np.ndarray:
    """Exact covariance of the per-step Gaussian components.

    Lognormal drivers contribute their raw Brownian increment; Vasicek
    drivers contribute the (rate, integral) innovation pair.
    """
    m = layout["__n__"]
    cov = np.zeros((m, m))
    for di in drivers:
        i = layout[di.name]
        for dj in drivers:
            j = layout[dj.name]
            if j < i:
                continue
            rho = corr.rho(di.name, dj.name)
            vi = di.kind == "vasicek-short-rate"
            vj = dj.kind == "vasicek-short-rate"
            if not vi and not vj:
                cov[i, j] = cov[j, i] = rho * dt
            elif vi and vj:
                ap, sp = di.mean_reversion, di.rate_vol
                aq, sq = dj.mean_reversion, dj.rate_vol
                if di.name == dj.name:
                    v_rr, v_ri, v_ii = _ou_moments(ap, dt)
                    cov[i, i] = sp * sp * v_rr
                    cov[i, i + 1] = cov[i + 1, i] = sp * sp * v_ri
                    cov[i + 1, i + 1] = sp * sp * v_ii
                else:
                    e_p = -math.expm1(-ap * dt) / ap
                    e_q = -math.expm1(-aq * dt) / aq
                    e_pq = -math.expm1(-(ap + aq) * dt) / (ap + aq)
                    c = rho * sp * sq
                    cov[i, j] = cov[j, i] = c * e_pq
                    cov[i, j + 1] = cov[j + 1, i] = c * (e_p - e_pq) / aq
                    cov[i + 1, j] = cov[j, i + 1] = c * (e_q - e_pq) / ap
                    cov[i + 1, j + 1] = cov[j + 1, i + 1] = c * (
                        dt - e_p - e_q + e_pq
                    ) / (ap * aq)
            else:
                # one lognormal Brownian against one OU pair
                if vi:
                    a, s, iv, ib = di.mean_reversion, di.rate_vol, i, j
                else:
                    a, s, iv, ib = dj.mean_reversion, dj.rate_vol, j, i
                e1 = -math.expm1(-a * dt) / a
                cov[ib, iv] = cov[iv, ib] = rho * s * e1
                cov[ib, iv + 1] = cov[iv + 1, ib] = rho * s * (dt - e1) / a
    return cov


def _resolve_drift_curve(
    d: DriverSpec, measure: Measure, curves: CurveSet, short_rate: str | None
) -> RateCurve | str | None:
    """Deterministic drift curve, or the name of the Vasicek driver whose
    pathwise integral drives the drift, or None for zero drift."""
    if d.kind == "exponential-martingale":
        return None
    if d.kind == "lognormal-fx":
        x, quote = d.pair
        if d.drift != "auto":
            return curves.curve(d.drift)
        if measure.kind in ("Q", "QT", "QNUM"):
            if quote != curves.domestic:
                raise ModelError(
                    f"fx driver {d.name!r}: quote currency must be domestic under {measure.label()}"
                )
            return curves.fx_drift(x)
        if quote != measure.currency:
            raise ModelError(
                f"fx driver {d.name!r}: quote currency must be {measure.currency!r} under "
                f"{measure.label()}"
            )
        return basis_rate(curves, measure.currency) - basis_rate(curves, x)
    # lognormal-jump-asset
    if d.drift != "auto":
        if d.drift in curves.curves:
            return curves.curve(d.drift)
        raise CurveError(f"driver {d.name!r}: unknown drift curve {d.drift!r}")
    if measure.kind == "QFB":
        return basis_rate(curves, measure.currency)
    if short_rate is not None:
        return short_rate
    return curves.r


def simulate(
    drivers: Sequence[DriverSpec],
    corr: CorrelationMatrix,
    measure: Measure,
    grid: np.ndarray,
    n_paths: int,
    seed: int,
    curves: CurveSet,
    antithetic: bool = True,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> PathSet:
    """Simulate all drivers on the grid under the given measure.

    Parallel-deterministic RNG: each path block owns a Philox stream keyed
    by (seed, block index); blocks fill disjoint slices and the assembly
    order is fixed, so results are bit-identical for identical inputs.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ModelError("grid must be ascending and start at 0")
    if n_paths < 1:
        raise ModelError("n_paths must be at least 1")
    if antithetic and n_paths % 2:
        raise ModelError("antithetic sampling needs an even path count")
    names = [d.name for d in drivers]
    if len(set(names)) != len(names):
        raise ModelError("driver names must be unique")
    if set(corr.order) != set(names):
        raise ModelError("correlation order must list exactly the driver names")

    vasicek = [d for d in drivers if d.kind == "vasicek-short-rate"]
    if measure.kind == "QT" and vasicek:
        raise ModelError("the T-forward measure is only valid with deterministic rates")
    if measure.kind == "QFB" and vasicek:
        raise ModelError("foreign basis measures are implemented for deterministic rates")
    short_rate = vasicek[0].name if len(vasicek) == 1 else None
    if len(vasicek) > 1:
        raise ModelError("at most one short-rate driver is supported")

    numeraire: DriverSpec | None = None
    if measure.kind == "QNUM":
        numeraire = next((d for d in drivers if d.name == measure.numeraire), None)
        if numeraire is None:
            raise ModelError(f"numeraire driver {measure.numeraire!r} is not simulated")
        if numeraire.kind != "lognormal-jump-asset" or numeraire.dividends is not None:
            raise ModelError("the numeraire must be a positive non-dividend asset driver")
        if vasicek:
            raise ModelError("asset-numeraire measures are implemented for deterministic rates")

    dt = np.diff(grid)
    n_steps = len(dt)
    layout = _component_layout(drivers)
    m = layout["__n__"]

    # deterministic per-step pieces -----------------------------------
    cov_cache: dict[float, np.ndarray] = {}
    factors = []
    for k in range(n_steps):
        key = float(dt[k])
        if key not in cov_cache:
            cov_cache[key] = _psd_factor(_step_covariance(drivers, corr, key, layout))
        factors.append(cov_cache[key])

    lognormals = [d for d in drivers if d.kind != "vasicek-short-rate"]
    log_drift: dict[str, np.ndarray] = {}
    stoch_drift: dict[str, str] = {}
    jump_lam_dt: dict[str, np.ndarray] = {}
    jump_mean_eff: dict[str, float] = {}
    drop_plan: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for d in lognormals:
        drift = _resolve_drift_curve(d, measure, curves, short_rate)
        base = np.zeros(n_steps)
        if isinstance(drift, RateCurve):
            ints = drift.integrals_from_zero(grid)
            base += np.diff(ints)
        elif isinstance(drift, str):
            stoch_drift[d.name] = drift
        if d.dividends is not None and d.dividends.has_proportional():
            base -= np.diff(d.dividends.q().integrals_from_zero(grid))
        if d.fee is not None:
            base -= np.diff(curves.curve(d.fee).integrals_from_zero(grid))
        lam, kbar = d.jump_intensity, d.jump_compensator
        sig2 = 0.5 * d.sigma**2
        if numeraire is not None and d.name == numeraire.name:
            # under its own measure the numeraire drifts at r + sigma^2 with
            # intensity-(1+kbar) jumps whose log-mean tilts by jump_std^2
            base += sig2 * dt - lam * kbar * dt
            jump_lam_dt[d.name] = lam * (1.0 + kbar) * dt
            jump_mean_eff[d.name] = d.jump_mean + d.jump_std**2
        else:
            base += -sig2 * dt - lam * kbar * dt
            if numeraire is not None and d.drift == "auto":
                rho = corr.rho(d.name, numeraire.name)
                base += rho * d.sigma * numeraire.sigma * dt
            jump_lam_dt[d.name] = lam * dt
            jump_mean_eff[d.name] = d.jump_mean
        log_drift[d.name] = base
        if d.dividends is not None and d.dividends.cash:
            live = d.dividends.cash_within(float(grid[-1]))
            idx = np.array(
                [
                    grid_index(grid, c.time, f"driver {d.name!r}: dividend time")
                    for c in live
                ],
                dtype=np.int64,
            ).reshape(-1)
            amounts = np.array([c.amount for c in live])
            fracs = np.array([math.nan if c.fraction is None else c.fraction for c in live])
            drop_plan[d.name] = (idx, amounts, fracs)
        else:
            drop_plan[d.name] = (
                np.empty(0, dtype=np.int64), np.empty(0), np.empty(0),
            )

    # output arrays ----------------------------------------------------
    values = {d.name: np.empty((n_paths, n_steps + 1)) for d in drivers}
    rate_integrals = {v.name: np.empty((n_paths, n_steps + 1)) for v in vasicek}
    cash_amounts = {
        name: np.empty((n_paths, len(plan[0]))) for name, plan in drop_plan.items()
    }

    jump_drivers = [d for d in lognormals if d.jump_intensity > 0.0]

    def run_block(b: int, lo: int, hi: int) -> None:
        nb = hi - lo
        half = nb // 2 if antithetic else nb
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(b,)))
        )
        diffusion = {d.name: np.empty((nb, n_steps)) for d in lognormals}
        vas_state: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for v in vasicek:
            values[v.name][lo:hi, 0] = v.initial
            rate_integrals[v.name][lo:hi, 0] = 0.0
            vas_state[v.name] = (np.full(nb, float(v.initial)), np.zeros(nb))
        for k in range(n_steps):
            z = rng.standard_normal((m, half))
            comps = factors[k] @ z
            if antithetic:
                comps = np.concatenate([comps, -comps], axis=1)
            step_di: dict[str, np.ndarray] = {}
            for v in vasicek:
                row = layout[v.name]
                a, theta = v.mean_reversion, v.long_run
                decay = math.exp(-a * dt[k])
                r_old, i_old = vas_state[v.name]
                dev = r_old - theta
                r_new = theta + dev * decay + comps[row]
                di = theta * dt[k] + dev * (1.0 - decay) / a + comps[row + 1]
                i_new = i_old + di
                vas_state[v.name] = (r_new, i_new)
                values[v.name][lo:hi, k + 1] = r_new
                rate_integrals[v.name][lo:hi, k + 1] = i_new
                step_di[v.name] = di
            for d in jump_drivers:
                lam_dt = jump_lam_dt[d.name][k]
                counts = rng.poisson(lam_dt, half)
                wj = rng.standard_normal(half)
                spread = d.jump_std * np.sqrt(counts) * wj
                mean_part = jump_mean_eff[d.name] * counts
                if antithetic:
                    js = np.concatenate([mean_part + spread, mean_part - spread])
                else:
                    js = mean_part + spread
                diffusion[d.name][:, k] = js
            for d in lognormals:
                col = diffusion[d.name][:, k]
                if d.jump_intensity == 0.0:
                    col[:] = 0.0
                col += d.sigma * comps[layout[d.name]]
                if d.name in stoch_drift:
                    col += step_di[stoch_drift[d.name]]
        for d in lognormals:
            idx, amounts, fracs = drop_plan[d.name]
            path, applied = kernels.asset_sweep(
                np.full(nb, float(d.initial)), log_drift[d.name], diffusion[d.name],
                idx, amounts, fracs,
            )
            values[d.name][lo:hi] = path
            if len(idx):
                cash_amounts[d.name][lo:hi] = applied
                if path.min() <= 0.0:
                    raise DegeneratePathError(
                        f"driver {d.name!r}: a cash dividend drove a path non-positive"
                    )

    edges = list(range(0, n_paths, block_size)) + [n_paths]
    blocks = list(enumerate(zip(edges, edges[1:])))
    if antithetic and any((hi - lo) % 2 for _, (lo, hi) in blocks):
        raise ModelError("antithetic sampling needs even block sizes")
    workers = int(os.environ.get("CSAMC_THREADS", "1") or "1")
    if workers > 1 and len(blocks) > 1:
        # blocks own disjoint output slices and independent RNG streams, so
        # threaded fill is race-free and bit-identical to the serial loop
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda job: run_block(job[0], *job[1]), blocks))
    else:
        for b, (lo, hi) in blocks:
            run_block(b, lo, hi)

    # deflator of the measure's funding rate ---------------------------
    if measure.kind == "QFB":
        fund = basis_rate(curves, measure.currency)
        deflator_log = fund.integrals_from_zero(grid)
    elif short_rate is not None:
        deflator_log = rate_integrals[short_rate]
    else:
        deflator_log = curves.r.integrals_from_zero(grid)

    for arr in (*values.values(), *rate_integrals.values(), *cash_amounts.values()):
        arr.setflags(write=False)
    deflator_log.setflags(write=False)
    return PathSet(
        grid=grid,
        values=values,
        rate_integrals=rate_integrals,
        cash_amounts=cash_amounts,
        deflator_log=deflator_log,
        measure=measure,
        drivers=tuple(drivers),
        seed=seed,
        block_size=block_size,
        antithetic=antithetic,
    )


def quadratic_covariation(
    paths: PathSet, a: str, b: str, path: int | None = None
) -> np.ndarray:
    """Discrete covariation estimator: cumulative sum of increment products."""
    va, vb = paths[a], paths[b]
    if path is not None:
        va, vb = va[path : path + 1], vb[path : path + 1]
    prod = np.diff(va, axis=1) * np.diff(vb, axis=1)
    out = np.zeros_like(va)
    np.cumsum(prod, axis=1, out=out[:, 1:])
    return out[0] if path is not None else out


def vasicek_zcb(a: float, theta: float, sigma_r: float, r0: float, t: float, T: float) -> float:
    """Closed-form Vasicek zero-coupon bond P(t, T) given the rate r0 at t."""
    if a <= 0:
        raise ModelError("vasicek mean reversion must be positive")
    if t > T:
        raise ModelError(f"vasicek_zcb requires t <= T, got t={t}, T={T}")
    tau = T - t
    if tau == 0.0:
        return 1.0
    b = -math.expm1(-a * tau) / a
    log_a = (theta - sigma_r**2 / (2 * a * a)) * (b - tau) - sigma_r**2 * b * b / (4 * a)
    return math.exp(log_a - b * r0)
