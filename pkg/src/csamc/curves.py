"""Deterministic term structures: piecewise-constant rate curves, bank
accounts, discount factors and the rate algebra (basis and blended rates).

Rates are instantaneous, continuously compounded, ACT/365F year fractions.
A curve is right-continuous in time: ``rates[i]`` applies on
``[pillars[i], pillars[i+1])`` and the last rate extrapolates flat.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

__all__ = [
    "RateCurve",
    "CurveSet",
    "CurveError",
    "bank_account",
    "discount_factor",
    "basis_rate",
    "blended_rate",
]


class CurveError(ValueError):
    """Raised for invalid curve construction, lookup or evaluation."""


@dataclass(frozen=True)
class RateCurve:
    """Piecewise-constant instantaneous rate curve.

    Parameters
    ----------
    pillars : strictly increasing times in years, first pillar at 0.
    rates : one rate per pillar; ``rates[i]`` holds on
        ``[pillars[i], pillars[i+1])``, flat extrapolation past the last.
    """

    pillars: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.pillars) != len(self.rates) or not self.pillars:
            raise CurveError("pillars and rates must be non-empty and of equal length")
        if self.pillars[0] != 0.0:
            raise CurveError("first pillar must be at t=0")
        if any(b <= a for a, b in zip(self.pillars, self.pillars[1:])):
            raise CurveError("pillars must be strictly increasing")
        if not all(math.isfinite(p) and math.isfinite(r) for p, r in zip(self.pillars, self.rates)):
            raise CurveError("pillars and rates must be finite")

    @classmethod
    def flat(cls, rate: float) -> "RateCurve":
        return cls((0.0,), (float(rate),))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "RateCurve":
        pts = sorted((float(t), float(r)) for t, r in pairs)
        return cls(tuple(t for t, _ in pts), tuple(r for _, r in pts))

    @classmethod
    def zero(cls) -> "RateCurve":
        return cls((0.0,), (0.0,))

    def rate(self, t: float) -> float:
        """Instantaneous rate at time t (right-continuous step lookup)."""
        if t < 0:
            raise CurveError(f"curve not defined for negative time {t}")
        i = bisect.bisect_right(self.pillars, t) - 1
        return self.rates[i]

    def integral(self, t0: float, t1: float) -> float:
        """Exact integral of the rate over [t0, t1]."""
        if t0 < 0 or t1 < t0:
            raise CurveError(f"invalid integration bounds [{t0}, {t1}]")
        if t1 == t0:
            return 0.0
        total = 0.0
        i = bisect.bisect_right(self.pillars, t0) - 1
        lo = t0
        n = len(self.pillars)
        while lo < t1:
            hi = self.pillars[i + 1] if i + 1 < n else t1
            hi = min(hi, t1)
            total += self.rates[i] * (hi - lo)
            lo = hi
            i += 1
        return total

    def integrals_from_zero(self, times: np.ndarray) -> np.ndarray:
        """Vector of exact integrals from 0 to each time of an ascending grid."""
        times = np.asarray(times, dtype=float)
        out = np.empty_like(times)
        acc = 0.0
        prev = 0.0
        for k, t in enumerate(times):
            acc += self.integral(prev, float(t))
            out[k] = acc
            prev = float(t)
        return out

    def pieces(self, t0: float, t1: float) -> list[tuple[float, float, float]]:
        """Segments (a, b, rate) covering [t0, t1] with constant rate on each."""
        if t0 < 0 or t1 < t0:
            raise CurveError(f"invalid bounds [{t0}, {t1}]")
        segs = []
        i = bisect.bisect_right(self.pillars, t0) - 1
        lo = t0
        n = len(self.pillars)
        while lo < t1:
            hi = self.pillars[i + 1] if i + 1 < n else t1
            hi = min(hi, t1)
            segs.append((lo, hi, self.rates[i]))
            lo = hi
            i += 1
        return segs

    # -- curve algebra: all results stay piecewise-constant and exact --

    def combine(self, other: "RateCurve", fn: Callable[[float, float], float]) -> "RateCurve":
        grid = sorted(set(self.pillars) | set(other.pillars))
        return RateCurve(tuple(grid), tuple(fn(self.rate(t), other.rate(t)) for t in grid))

    def __add__(self, other: "RateCurve") -> "RateCurve":
        return self.combine(other, lambda a, b: a + b)

    def __sub__(self, other: "RateCurve") -> "RateCurve":
        return self.combine(other, lambda a, b: a - b)

    def scale(self, k: float) -> "RateCurve":
        return RateCurve(self.pillars, tuple(k * r for r in self.rates))

    def shift(self, spread: float) -> "RateCurve":
        return RateCurve(self.pillars, tuple(r + spread for r in self.rates))


def bank_account(curve: RateCurve, t: float) -> float:
    """B_t = exp(integral of the rate over [0, t]); exact for step curves."""
    if t < 0:
        raise CurveError(f"bank account not defined for negative time {t}")
    return math.exp(curve.integral(0.0, t))


def discount_factor(curve: RateCurve, t: float, T: float) -> float:
    """Zero-coupon price P_t(T) = B_t / B_T for a deterministic curve."""
    if t > T:
        raise CurveError(f"discount_factor requires t <= T, got t={t}, T={T}")
    return math.exp(-curve.integral(t, T))


@dataclass(frozen=True)
class CurveSet:
    """Named curves plus the currency conventions of the model.

    ``curves`` must contain "r" (the domestic short-rate curve). Each
    non-domestic currency may declare an FX drift curve in ``basis_drifts``
    (curve-id of mu^x); undeclared drifts are zero, and the domestic drift
    is forced to zero.
    """

    curves: Mapping[str, RateCurve]
    domestic: str = "d"
    currencies: frozenset[str] = frozenset()
    basis_drifts: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if "r" not in self.curves:
            raise CurveError('CurveSet requires a curve named "r"')
        object.__setattr__(
            self, "currencies", frozenset(self.currencies) | {self.domestic}
        )
        for ccy, cid in self.basis_drifts.items():
            if ccy == self.domestic:
                raise CurveError("the domestic currency cannot carry an FX drift curve")
            if cid not in self.curves:
                raise CurveError(f"basis drift for {ccy!r} references unknown curve {cid!r}")
        unknown = set(self.basis_drifts) - set(self.currencies)
        if unknown:
            raise CurveError(f"basis drifts declared for undeclared currencies {sorted(unknown)}")

    def curve(self, curve_id: str) -> RateCurve:
        try:
            return self.curves[curve_id]
        except KeyError:
            raise CurveError(f"unknown curve id {curve_id!r}") from None

    @property
    def r(self) -> RateCurve:
        return self.curves["r"]

    def fx_drift(self, ccy: str) -> RateCurve:
        """mu^x, the risk-neutral drift rate of the FX rate x -> domestic."""
        if ccy not in self.currencies:
            raise CurveError(f"unknown currency {ccy!r}")
        if ccy == self.domestic:
            return RateCurve.zero()
        cid = self.basis_drifts.get(ccy)
        return self.curves[cid] if cid is not None else RateCurve.zero()


def basis_rate(curves: CurveSet, ccy: str) -> RateCurve:
    """Basis funding rate of a currency: r minus the FX drift (r for domestic)."""
    if ccy == curves.domestic:
        return curves.r
    return curves.r - curves.fx_drift(ccy)


_BLENDED_VARIANTS = ("foreign-measure", "domestic-measure", "single-ccy", "sec-lending")


def blended_rate(
    variant: str,
    alpha: RateCurve,
    c_g: RateCurve,
    r_gb: RateCurve,
    r_num: RateCurve,
    ell: RateCurve,
) -> RateCurve:
    """Effective discount rate for a continuously margined contract.

    foreign-measure / domestic-measure:
        z = (1 + alpha) * (c_g - r_gb + r_num) - (alpha * r_num + ell)
    where r_num is the funding rate of the pricing measure (the foreign
    basis rate, or the domestic short rate).

    single-ccy / sec-lending (collateral in the cash-flow currency, so the
    c_g - r_gb spread sits on the same curve as r_num):
        z = (1 + alpha) * c_g - (alpha * r_num + ell)
    """
    if variant not in _BLENDED_VARIANTS:
        raise CurveError(f"unknown blended_rate variant {variant!r}")
    grid = sorted(
        set(alpha.pillars) | set(c_g.pillars) | set(r_gb.pillars)
        | set(r_num.pillars) | set(ell.pillars)
    )
    rates = []
    for t in grid:
        a, c, rg, rn, l = (crv.rate(t) for crv in (alpha, c_g, r_gb, r_num, ell))
        if variant in ("single-ccy", "sec-lending"):
            z = (1.0 + a) * c - (a * rn + l)
        else:
            z = (1.0 + a) * (c - rg + rn) - (a * rn + l)
        rates.append(z)
    return RateCurve(tuple(grid), tuple(rates))
