"""Scenario files: the JSON front door of the toolkit.

A scenario declares curves, drivers, correlations, dividend schedules,
collateral agreements, contracts and run settings. Parsing validates the
document against a strict schema (unknown keys are rejected) and resolves
every cross-reference, reporting errors with their JSON path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import jsonschema

from .collateral import MARGIN_FREQUENCIES, CollateralError, CsaSpec
from .curves import CurveError, CurveSet, RateCurve
from .dividends import CashDividend, DividendError, DividendSchedule
from .models import CorrelationMatrix, DriverSpec, Measure, ModelError
from .pricing import ContractSpec, PricingError

__all__ = ["Scenario", "ScenarioError", "parse_scenario", "scenario_schema"]

DEFAULT_N_PATHS = 200_000
DEFAULT_SEED = 42
DEFAULT_STEPS_PER_YEAR = 252


class ScenarioError(ValueError):
    """Malformed scenario document; the message carries the JSON path."""


_CURVE_POINTS = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": ["t", "rate"],
        "properties": {"t": {"type": "number"}, "rate": {"type": "number"}},
    },
}

_CURVE = {"oneOf": [{"type": "number"}, _CURVE_POINTS]}


def scenario_schema() -> dict:
    """JSON schema of the scenario document."""
    return {
        "type": "object",
        "additionalProperties": False,
        "required": ["curves", "drivers"],
        "properties": {
            "domestic": {"type": "string"},
            "currencies": {"type": "array", "items": {"type": "string"}},
            "curves": {"type": "object", "additionalProperties": _CURVE},
            "basis_drifts": {"type": "object", "additionalProperties": {"type": "string"}},
            "dividends": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "proportional": {"type": "string"},
                        "cash": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["time"],
                                "properties": {
                                    "time": {"type": "number"},
                                    "amount": {"type": "number"},
                                    "fraction": {"type": "number"},
                                },
                            },
                        },
                        "horizon": {"type": "number"},
                    },
                },
            },
            "drivers": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["id", "kind"],
                    "properties": {
                        "id": {"type": "string"},
                        "kind": {
                            "enum": [
                                "lognormal-jump-asset",
                                "vasicek-short-rate",
                                "lognormal-fx",
                                "exponential-martingale",
                            ]
                        },
                        "sigma": {"type": "number"},
                        "initial": {"type": "number"},
                        "drift": {"type": "string"},
                        "jumps": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["intensity"],
                            "properties": {
                                "intensity": {"type": "number"},
                                "mean": {"type": "number"},
                                "std": {"type": "number"},
                            },
                        },
                        "mean_reversion": {"type": "number"},
                        "rate_vol": {"type": "number"},
                        "long_run": {"type": "number"},
                        "dividends": {"type": "string"},
                        "fee": {"type": "string"},
                        "pair": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "items": {"type": "string"},
                        },
                    },
                },
            },
            "correlation": {
                "type": "object",
                "additionalProperties": False,
                "required": ["order", "matrix"],
                "properties": {
                    "order": {"type": "array", "items": {"type": "string"}},
                    "matrix": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "number"}},
                    },
                },
            },
            "measure": {
                "type": "object",
                "additionalProperties": False,
                "required": ["kind"],
                "properties": {
                    "kind": {"enum": ["Q", "QFB", "QT", "QNUM"]},
                    "currency": {"type": "string"},
                    "numeraire": {"type": "string"},
                },
            },
            "csa": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["currency", "remuneration"],
                    "properties": {
                        "currency": {"type": "string"},
                        "remuneration": {"type": "string"},
                        "haircut": {"oneOf": [{"type": "number"}, {"type": "string"}]},
                        "frequency": {"enum": sorted(MARGIN_FREQUENCIES)},
                        "margin_times": {"type": "array", "items": {"type": "number"}},
                        "continuous": {"type": "boolean"},
                    },
                },
            },
            "contracts": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["id", "kind", "underlying", "maturity"],
                    "properties": {
                        "id": {"type": "string"},
                        "kind": {
                            "enum": [
                                "european-option",
                                "call-strip",
                                "forward-contract",
                                "fx-forward",
                                "repo",
                                "securities-lending",
                                "futures",
                                "quanto-forward",
                            ]
                        },
                        "underlying": {"type": "string"},
                        "maturity": {"type": "number"},
                        "strike": {"type": "number"},
                        "fixings": {"type": "array", "items": {"type": "number"}},
                        "payment_lag": {"type": "number"},
                        "call": {"type": "boolean"},
                        "currency": {"type": "string"},
                        "ell": {"type": "string"},
                        "csa": {"type": "string"},
                        "fx_driver": {"type": "string"},
                    },
                },
            },
            "run": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "n_paths": {"type": "integer", "minimum": 2},
                    "seed": {"type": "integer"},
                    "steps_per_year": {"type": "integer", "minimum": 1},
                    "antithetic": {"type": "boolean"},
                    "diagnostic_times": {"type": "array", "items": {"type": "number"}},
                    "gains": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["asset"],
                            "properties": {
                                "asset": {"type": "string"},
                                "numeraire": {"type": "string"},
                            },
                        },
                    },
                    "replication": {"type": "array", "items": {"type": "string"}},
                    "total_return": {"type": "array", "items": {"type": "string"}},
                    "pnl": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["type"],
                            "properties": {
                                "type": {"enum": ["repo", "sec-lending", "futures"]},
                                "asset": {"type": "string"},
                                "repo_rate": {"type": "string"},
                                "remuneration": {"type": "string"},
                                "haircut": {"oneOf": [{"type": "number"}, {"type": "string"}]},
                                "fee": {"type": "string"},
                                "initial_margin": {"type": "number"},
                                "frequency": {"enum": sorted(MARGIN_FREQUENCIES)},
                                "maturity": {"type": "number"},
                            },
                        },
                    },
                    "forwards": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["asset", "maturity"],
                            "properties": {
                                "asset": {"type": "string"},
                                "maturity": {"type": "number"},
                            },
                        },
                    },
                    "converge": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["contract", "frequencies"],
                        "properties": {
                            "contract": {"type": "string"},
                            "frequencies": {
                                "type": "array",
                                "minItems": 2,
                                "items": {"enum": sorted(MARGIN_FREQUENCIES)},
                            },
                        },
                    },
                },
            },
        },
    }


@dataclass(frozen=True)
class Scenario:
    """A fully validated scenario, ready for the runner."""

    curves: CurveSet
    dividends: Mapping[str, DividendSchedule]
    drivers: tuple[DriverSpec, ...]
    correlation: CorrelationMatrix
    measure: Measure
    csa: Mapping[str, CsaSpec]
    contracts: tuple[ContractSpec, ...]
    contract_ids: tuple[str, ...]
    contract_csa: Mapping[str, str]
    contract_fx: Mapping[str, str]
    n_paths: int
    seed: int
    steps_per_year: int
    antithetic: bool
    run: Mapping[str, Any]
    raw: Mapping[str, Any] = field(repr=False, default_factory=dict)

    def driver(self, name: str) -> DriverSpec:
        for d in self.drivers:
            if d.name == name:
                return d
        raise ScenarioError(f"unknown driver id {name!r}")

    def contract(self, cid: str) -> ContractSpec:
        try:
            return self.contracts[self.contract_ids.index(cid)]
        except ValueError:
            raise ScenarioError(f"unknown contract id {cid!r}") from None

    def to_dict(self) -> dict:
        """Canonical document form; parse(to_dict()) is the identity."""
        return json.loads(json.dumps(self.raw, sort_keys=True))


def _curve_from_json(doc: Any) -> RateCurve:
    if isinstance(doc, (int, float)):
        return RateCurve.flat(float(doc))
    return RateCurve.from_pairs((p["t"], p["rate"]) for p in doc)


def _fail(path: str, message: str) -> ScenarioError:
    return ScenarioError(f"{path}: {message}")


def parse_scenario(data: bytes | str | Mapping[str, Any]) -> Scenario:
    """Parse and fully validate a scenario document."""
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"malformed JSON: {err}") from None
    else:
        doc = json.loads(json.dumps(data))
    try:
        jsonschema.validate(doc, scenario_schema())
    except jsonschema.ValidationError as err:
        path = "$" + "".join(f"[{p!r}]" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path)
        raise ScenarioError(f"{path}: {err.message}") from None

    domestic = doc.get("domestic", "d")
    currencies = set(doc.get("currencies", [])) | {domestic}
    curve_ids = set(doc["curves"])
    curves_map = {cid: _curve_from_json(c) for cid, c in doc["curves"].items()}

    def need_curve(cid: str, path: str) -> RateCurve:
        if cid not in curve_ids:
            raise _fail(path, f"dangling curve id {cid!r}")
        return curves_map[cid]

    try:
        curves = CurveSet(
            curves=curves_map,
            domestic=domestic,
            currencies=frozenset(currencies),
            basis_drifts=doc.get("basis_drifts", {}),
        )
    except CurveError as err:
        raise ScenarioError(f"$['curves']: {err}") from None

    schedules: dict[str, DividendSchedule] = {}
    for name, spec in doc.get("dividends", {}).items():
        path = f"$['dividends'][{name!r}]"
        prop = None
        if "proportional" in spec:
            prop = need_curve(spec["proportional"], path)
        try:
            cash = tuple(
                CashDividend(
                    time=c["time"], amount=c.get("amount", 0.0), fraction=c.get("fraction")
                )
                for c in spec.get("cash", [])
            )
            schedules[name] = DividendSchedule(
                proportional=prop, cash=cash, horizon=spec.get("horizon", float("inf"))
            )
        except DividendError as err:
            raise _fail(path, str(err)) from None

    drivers: list[DriverSpec] = []
    for i, d in enumerate(doc["drivers"]):
        path = f"$['drivers'][{i}]"
        sched = None
        if "dividends" in d:
            if d["dividends"] not in schedules:
                raise _fail(path, f"dangling dividend schedule id {d['dividends']!r}")
            sched = schedules[d["dividends"]]
        if "fee" in d:
            need_curve(d["fee"], path)
        if d.get("drift", "auto") != "auto":
            need_curve(d["drift"], path)
        jumps = d.get("jumps", {})
        try:
            drivers.append(
                DriverSpec(
                    name=d["id"],
                    kind=d["kind"],
                    sigma=d.get("sigma", 0.0),
                    initial=d.get("initial", 1.0),
                    drift=d.get("drift", "auto"),
                    jump_intensity=jumps.get("intensity", 0.0),
                    jump_mean=jumps.get("mean", 0.0),
                    jump_std=jumps.get("std", 0.0),
                    mean_reversion=d.get("mean_reversion", float("nan")),
                    rate_vol=d.get("rate_vol", float("nan")),
                    long_run=d.get("long_run", float("nan")),
                    dividends=sched,
                    fee=d.get("fee"),
                    pair=tuple(d["pair"]) if "pair" in d else None,
                )
            )
        except ModelError as err:
            raise _fail(path, str(err)) from None
    names = [d.name for d in drivers]
    if len(set(names)) != len(names):
        raise ScenarioError("$['drivers']: driver ids must be unique")
    for i, d in enumerate(drivers):
        if d.pair is not None:
            for ccy in d.pair:
                if ccy not in currencies:
                    raise _fail(f"$['drivers'][{i}]", f"undeclared currency {ccy!r} in pair")

    corr_doc = doc.get("correlation")
    try:
        if corr_doc is None:
            correlation = CorrelationMatrix.identity(names)
        else:
            import numpy as np

            correlation = CorrelationMatrix(
                tuple(corr_doc["order"]), np.asarray(corr_doc["matrix"], dtype=float)
            )
            if set(correlation.order) != set(names):
                raise ModelError("correlation order must list exactly the driver ids")
    except ModelError as err:
        raise ScenarioError(f"$['correlation']: {err}") from None

    m_doc = doc.get("measure", {"kind": "Q"})
    try:
        measure = Measure(
            kind=m_doc["kind"], currency=m_doc.get("currency"), numeraire=m_doc.get("numeraire")
        )
    except ModelError as err:
        raise ScenarioError(f"$['measure']: {err}") from None
    if measure.kind == "QFB" and measure.currency not in currencies:
        raise ScenarioError(f"$['measure']: undeclared currency {measure.currency!r}")
    if measure.kind == "QNUM" and measure.numeraire not in names:
        raise ScenarioError(f"$['measure']: dangling numeraire driver {measure.numeraire!r}")

    csas: dict[str, CsaSpec] = {}
    for name, spec in doc.get("csa", {}).items():
        path = f"$['csa'][{name!r}]"
        if spec["currency"] not in currencies:
            raise _fail(path, f"undeclared currency {spec['currency']!r}")
        haircut = spec.get("haircut", 0.0)
        if isinstance(haircut, str):
            haircut_curve = need_curve(haircut, path)
        else:
            if haircut < 0:
                raise _fail(path, "haircut must satisfy alpha >= 0")
            haircut_curve = RateCurve.flat(haircut)
        try:
            csas[name] = CsaSpec(
                currency=spec["currency"],
                remuneration=need_curve(spec["remuneration"], path),
                haircut=haircut_curve,
                times=tuple(spec.get("margin_times", ())),
                frequency=spec.get("frequency"),
                continuous=spec.get("continuous", False),
            )
        except CollateralError as err:
            raise _fail(path, str(err)) from None

    contracts: list[ContractSpec] = []
    contract_ids: list[str] = []
    contract_csa: dict[str, str] = {}
    contract_fx: dict[str, str] = {}
    for i, c in enumerate(doc.get("contracts", [])):
        path = f"$['contracts'][{i}]"
        if c["underlying"] not in names:
            raise _fail(path, f"dangling underlying driver id {c['underlying']!r}")
        ell = None
        if "ell" in c:
            ell = need_curve(c["ell"], path)
        try:
            contracts.append(
                ContractSpec(
                    kind=c["kind"],
                    underlying=c["underlying"],
                    maturity=c["maturity"],
                    strike=c.get("strike", 0.0),
                    fixings=tuple(c.get("fixings", ())),
                    payment_lag=c.get("payment_lag", 0.0),
                    call=c.get("call", True),
                    currency=c.get("currency", domestic),
                    ell=ell,
                )
            )
        except PricingError as err:
            raise _fail(path, str(err)) from None
        cid = c["id"]
        if cid in contract_ids:
            raise _fail(path, f"duplicate contract id {cid!r}")
        contract_ids.append(cid)
        if "csa" in c:
            if c["csa"] not in csas:
                raise _fail(path, f"dangling csa id {c['csa']!r}")
            contract_csa[cid] = c["csa"]
        if "fx_driver" in c:
            if c["fx_driver"] not in names:
                raise _fail(path, f"dangling fx driver id {c['fx_driver']!r}")
            contract_fx[cid] = c["fx_driver"]

    run = doc.get("run", {})
    for g in run.get("gains", []):
        if g["asset"] not in names:
            raise ScenarioError(f"$['run']['gains']: dangling driver id {g['asset']!r}")
        num = g.get("numeraire", "bank")
        if num != "bank" and num not in names and num not in curve_ids:
            raise ScenarioError(f"$['run']['gains']: unknown numeraire {num!r}")
    for asset in run.get("replication", []) + run.get("total_return", []):
        if asset not in names:
            raise ScenarioError(f"$['run']: dangling driver id {asset!r}")
    if "converge" in run and run["converge"]["contract"] not in contract_ids:
        raise ScenarioError(
            f"$['run']['converge']: dangling contract id {run['converge']['contract']!r}"
        )

    return Scenario(
        curves=curves,
        dividends=schedules,
        drivers=tuple(drivers),
        correlation=correlation,
        measure=measure,
        csa=csas,
        contracts=tuple(contracts),
        contract_ids=tuple(contract_ids),
        contract_csa=contract_csa,
        contract_fx=contract_fx,
        n_paths=run.get("n_paths", DEFAULT_N_PATHS),
        seed=run.get("seed", DEFAULT_SEED),
        steps_per_year=run.get("steps_per_year", DEFAULT_STEPS_PER_YEAR),
        antithetic=run.get("antithetic", True),
        run=run,
        raw=doc,
    )
