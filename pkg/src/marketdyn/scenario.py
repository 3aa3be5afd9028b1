"""Scenario documents: parsing, validation, execution and serialization.

A scenario is a JSON document with a discriminated ``model`` object, a
time horizon and a sample count. Everything is deterministic: no seeds,
no clocks, and CSV output is byte-identical across runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import competition, feedback, games, monopoly, numerics
from .errors import (
    CalibrationInfeasibleError,
    MarketDynError,
    ParameterError,
    ScenarioValidationError,
)
from .trajectory import Trajectory, time_grid

MODEL_KINDS = ("simple", "scheduled", "segmented", "hesitation", "birth_death",
               "feedback", "innovators_only", "bass_competition",
               "spontaneous_churn", "periodic_churn", "stimulated_churn",
               "bpq", "complementary")


@dataclass(frozen=True)
class ValidationIssue:
    code: str       # unknown_kind | missing_field | bad_type | invariant
    path: str
    expected: str
    found: str

    def __str__(self):
        return f"[{self.code}] at {self.path}: expected {self.expected}, found {self.found}"


@dataclass(frozen=True)
class Scenario:
    """A validated model plus run settings."""

    kind: str
    model: Any
    horizon: float
    samples: int
    outputs: tuple[str, ...] | None = None
    time_unit: str = "year"
    name: str | None = None


@dataclass(frozen=True)
class RunReport:
    """Trajectory plus model-appropriate metrics and surfaced ledger notes."""

    scenario: Scenario
    trajectory: Trajectory
    metrics: tuple[tuple[str, object], ...]
    discrepancies: tuple[str, ...] = field(default=())


class _Reader:
    """Cursor over a JSON object collecting field-level issues."""

    def __init__(self, data: dict, path: str, issues: list[ValidationIssue]):
        self.data = data
        self.path = path
        self.issues = issues

    def sub(self, key: str) -> "_Reader":
        return _Reader(self.data.get(key), f"{self.path}.{key}", self.issues)

    def has(self, key: str) -> bool:
        return isinstance(self.data, dict) and key in self.data

    def number(self, key: str, required: bool = True, default: float = 0.0,
               minimum: float | None = None) -> float:
        if not self.has(key):
            if required:
                self.issues.append(ValidationIssue(
                    "missing_field", f"{self.path}.{key}", "a number", "nothing"))
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.issues.append(ValidationIssue(
                "bad_type", f"{self.path}.{key}", "a number", repr(value)))
            return default
        value = float(value)
        if minimum is not None and value < minimum:
            self.issues.append(ValidationIssue(
                "invariant", f"{self.path}.{key}", f"a number >= {minimum:g}", repr(value)))
            return default
        return value

    def integer(self, key: str, required: bool = True, default: int = 0,
                minimum: int | None = None) -> int:
        if not self.has(key):
            if required:
                self.issues.append(ValidationIssue(
                    "missing_field", f"{self.path}.{key}", "an integer", "nothing"))
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.issues.append(ValidationIssue(
                "bad_type", f"{self.path}.{key}", "an integer", repr(value)))
            return default
        if minimum is not None and value < minimum:
            self.issues.append(ValidationIssue(
                "invariant", f"{self.path}.{key}", f"an integer >= {minimum}", repr(value)))
            return default
        return value

    def string(self, key: str, required: bool = True, default: str = "") -> str:
        if not self.has(key):
            if required:
                self.issues.append(ValidationIssue(
                    "missing_field", f"{self.path}.{key}", "a string", "nothing"))
            return default
        value = self.data[key]
        if not isinstance(value, str):
            self.issues.append(ValidationIssue(
                "bad_type", f"{self.path}.{key}", "a string", repr(value)))
            return default
        return value

    def number_list(self, key: str, required: bool = True) -> list[float]:
        if not self.has(key):
            if required:
                self.issues.append(ValidationIssue(
                    "missing_field", f"{self.path}.{key}", "a list of numbers", "nothing"))
            return []
        value = self.data[key]
        if (not isinstance(value, list)
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
            self.issues.append(ValidationIssue(
                "bad_type", f"{self.path}.{key}", "a list of numbers", repr(value)))
            return []
        return [float(v) for v in value]

    def matrix(self, key: str, required: bool = True) -> list[list[float]]:
        if not self.has(key):
            if required:
                self.issues.append(ValidationIssue(
                    "missing_field", f"{self.path}.{key}", "a matrix", "nothing"))
            return []
        value = self.data[key]
        ok = isinstance(value, list) and all(
            isinstance(row, list) and all(
                not isinstance(v, bool) and isinstance(v, (int, float)) for v in row)
            for row in value)
        if not ok:
            self.issues.append(ValidationIssue(
                "bad_type", f"{self.path}.{key}", "a matrix of numbers", repr(value)))
            return []
        return [[float(v) for v in row] for row in value]

    def invariant(self, message: str, found: str) -> None:
        self.issues.append(ValidationIssue("invariant", self.path, message, found))


# ---------------------------------------------------------------------------
# Schedules, kernels, churn specs
# ---------------------------------------------------------------------------

def _parse_schedule(r: _Reader) -> monopoly.RateSchedule | None:
    if not isinstance(r.data, dict):
        r.issues.append(ValidationIssue("bad_type", r.path, "a schedule object", repr(r.data)))
        return None
    kind = r.string("kind")
    try:
        if kind == "constant":
            return monopoly.ConstantRate(r.number("a", minimum=0.0))
        if kind == "linear":
            return monopoly.LinearRate(r.number("a0", minimum=0.0), r.number("a1", minimum=0.0))
        if kind == "exp_decay":
            return monopoly.ExpDecayRate(r.number("a0", minimum=0.0), r.number("beta", minimum=0.0))
        if kind == "cutoff":
            return monopoly.CutoffRate(r.number("a", minimum=0.0), r.number("T", minimum=0.0))
        if kind == "tabulated":
            pts = r.matrix("points")
            if any(len(p) != 2 for p in pts):
                r.invariant("points as [time, rate] pairs", repr(pts))
                return None
            return monopoly.TabulatedRate(tuple((p[0], p[1]) for p in pts))
    except ParameterError as exc:
        r.invariant(str(exc), "the values above")
        return None
    r.issues.append(ValidationIssue(
        "unknown_kind", f"{r.path}.kind",
        "one of constant|linear|exp_decay|cutoff|tabulated", repr(kind)))
    return None


def _schedule_to_dict(s: monopoly.RateSchedule) -> dict:
    if isinstance(s, monopoly.ConstantRate):
        return {"kind": "constant", "a": s.a}
    if isinstance(s, monopoly.LinearRate):
        return {"kind": "linear", "a0": s.a0, "a1": s.a1}
    if isinstance(s, monopoly.ExpDecayRate):
        return {"kind": "exp_decay", "a0": s.a0, "beta": s.beta}
    if isinstance(s, monopoly.CutoffRate):
        return {"kind": "cutoff", "a": s.a, "T": s.T}
    if isinstance(s, monopoly.TabulatedRate):
        return {"kind": "tabulated", "points": [[t, v] for t, v in s.points]}
    raise TypeError(f"unknown schedule {type(s).__name__}")


def _parse_kernel(r: _Reader) -> feedback.FeedbackKernel | None:
    if not isinstance(r.data, dict):
        r.issues.append(ValidationIssue("bad_type", r.path, "a kernel object", repr(r.data)))
        return None
    kind = r.string("kind")
    if kind not in feedback.KERNEL_KINDS:
        r.issues.append(ValidationIssue(
            "unknown_kind", f"{r.path}.kind",
            "one of " + "|".join(feedback.KERNEL_KINDS), repr(kind)))
        return None
    try:
        return feedback.kernel(
            kind,
            ratio=r.number("ratio", required=False, default=None) if r.has("ratio") else None,
            n=r.number("n", required=False, default=None) if r.has("n") else None,
            u1=r.number("u1", required=False, default=None) if r.has("u1") else None)
    except ParameterError as exc:
        r.invariant(str(exc), "the values above")
        return None


def _kernel_to_dict(k: feedback.FeedbackKernel) -> dict:
    out: dict[str, Any] = {"kind": k.kind}
    if k.ratio is not None:
        out["ratio"] = k.ratio
    if k.n is not None:
        out["n"] = k.n
    if k.u1 is not None:
        out["u1"] = k.u1
    return out


def _parse_sinusoids(r: _Reader) -> tuple[competition.Sinusoid, ...]:
    if r.data is None:
        return ()
    if not isinstance(r.data, list):
        r.issues.append(ValidationIssue("bad_type", r.path, "a list of sinusoids", repr(r.data)))
        return ()
    terms = []
    for idx, item in enumerate(r.data):
        sub = _Reader(item, f"{r.path}[{idx}]", r.issues)
        if not isinstance(item, dict):
            r.issues.append(ValidationIssue("bad_type", sub.path, "a sinusoid object", repr(item)))
            continue
        try:
            terms.append(competition.Sinusoid(
                amplitude=sub.number("amplitude", minimum=0.0),
                period=sub.number("period", minimum=0.0),
                phase=sub.number("phase", required=False, default=0.0)))
        except ParameterError as exc:
            sub.invariant(str(exc), "the values above")
    return tuple(terms)


def _parse_churn(r: _Reader):
    if not isinstance(r.data, dict):
        r.issues.append(ValidationIssue("bad_type", r.path, "a churn object", repr(r.data)))
        return None
    kind = r.string("kind")
    try:
        if kind == "spontaneous":
            return competition.ChurnMatrix.from_rows(r.matrix("a"))
        if kind == "stimulated":
            return competition.StimulatedChurnSpec(
                churn=competition.ChurnMatrix.from_rows(r.matrix("a")),
                b=tuple(r.number_list("b")),
                eps=tuple(int(v) for v in r.number_list("eps")))
        if kind == "periodic":
            a0 = competition.ChurnMatrix.from_rows(r.matrix("a0"))
            mods = []
            eps_items = r.data.get("eps", [])
            if not isinstance(eps_items, list):
                r.issues.append(ValidationIssue(
                    "bad_type", f"{r.path}.eps", "a list of modulations", repr(eps_items)))
                eps_items = []
            for idx, item in enumerate(eps_items):
                sub = _Reader(item, f"{r.path}.eps[{idx}]", r.issues)
                mods.append(competition.PairModulation(
                    i=sub.integer("i", minimum=0), j=sub.integer("j", minimum=0),
                    terms=_parse_sinusoids(sub.sub("terms"))))
            return competition.PeriodicChurnSpec(a0=a0, eps=tuple(mods))
    except ParameterError as exc:
        r.invariant(str(exc), "the values above")
        return None
    r.issues.append(ValidationIssue(
        "unknown_kind", f"{r.path}.kind",
        "one of spontaneous|stimulated|periodic", repr(kind)))
    return None


def _churn_to_dict(c) -> dict:
    if isinstance(c, competition.ChurnMatrix):
        return {"kind": "spontaneous", "a": [list(row) for row in c.a]}
    if isinstance(c, competition.StimulatedChurnSpec):
        return {"kind": "stimulated", "a": [list(row) for row in c.churn.a],
                "b": list(c.b), "eps": list(c.eps)}
    if isinstance(c, competition.PeriodicChurnSpec):
        return {"kind": "periodic", "a0": [list(row) for row in c.a0.a],
                "eps": [{"i": m.i, "j": m.j,
                         "terms": [{"amplitude": s.amplitude, "period": s.period,
                                    "phase": s.phase} for s in m.terms]}
                        for m in c.eps]}
    raise TypeError(f"unknown churn spec {type(c).__name__}")


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

def _build_model(kind: str, r: _Reader):
    try:
        if kind == "simple":
            return monopoly.SimpleAdoption(
                a=r.number("a"), u0=r.number("u0", required=False, default=0.0),
                N=r.number("N", required=False, default=1.0))
        if kind == "scheduled":
            sched = _parse_schedule(r.sub("schedule"))
            if sched is None:
                return None
            return _Scheduled(sched, r.number("u0", required=False, default=0.0),
                              r.number("N", required=False, default=1.0))
        if kind == "segmented":
            segs = []
            items = r.data.get("segments")
            if not isinstance(items, list) or not items:
                r.issues.append(ValidationIssue(
                    "missing_field", f"{r.path}.segments", "a nonempty list", repr(items)))
                return None
            for idx, item in enumerate(items):
                sub = _Reader(item, f"{r.path}.segments[{idx}]", r.issues)
                sched = _parse_schedule(sub.sub("schedule"))
                if sched is None:
                    return None
                segs.append(monopoly.Segment(n=sub.number("n", minimum=0.0), schedule=sched))
            total = math.fsum(s.n for s in segs)
            if abs(total - 1.0) > 1e-12:
                r.invariant("segment sizes summing to 1", f"{total!r}")
                return None
            return _Segmented(tuple(segs), r.number("N", required=False, default=1.0))
        if kind == "hesitation":
            variant = r.data.get("variant", "absorbing_hesitation")
            if variant in (1, "1", "absorbing"):
                variant = "absorbing_hesitation"
            if variant in (2, "2", "returning"):
                variant = "returning_hesitation"
            return _Hesitation(monopoly.HesitationParams(
                a=r.number("a"), b=r.number("b"), c=r.number("c"), variant=variant),
                N=r.number("N", required=False, default=1.0))
        if kind == "birth_death":
            return _BirthDeath(monopoly.BirthDeathParams(
                a=r.number("a"), d=r.number("d"), f=r.number("f"), g=r.number("g")),
                N=r.number("N", required=False, default=1.0))
        if kind == "feedback":
            kern = _parse_kernel(r.sub("kernel"))
            if kern is None:
                return None
            u0 = r.number("u0", required=False, default=0.0)
            if r.has("rate") == r.has("T50"):
                r.invariant("exactly one of rate or T50", "both" if r.has("rate") else "neither")
                return None
            if r.has("T50"):
                rate = feedback.calibrate_rate(kern, r.number("T50"), u0)
            else:
                rate = r.number("rate")
            if kern.needs_positive_start and u0 == 0.0:
                r.invariant("u0 > 0 for a kernel with no innovators", repr(u0))
                return None
            return feedback.FeedbackModel(kernel=kern, rate=rate, u0=u0,
                                          N=r.number("N", required=False, default=1.0))
        if kind == "innovators_only":
            return _Innovators(tuple(r.number_list("m")))
        if kind == "bass_competition":
            churn = None
            if r.has("churn"):
                churn = _parse_churn(r.sub("churn"))
                if churn is None:
                    return None
            market = competition.BassCompetition(
                m=tuple(r.number_list("m")), r=tuple(r.number_list("r")),
                u0=tuple(r.number_list("u0")))
            return _Competition(market, churn)
        if kind == "spontaneous_churn":
            return _Spontaneous(tuple(r.number_list("m")),
                                competition.ChurnMatrix.from_rows(r.matrix("a")))
        if kind == "periodic_churn":
            a12 = r.number("a12_0", minimum=0.0)
            a21 = r.number("a21_0", minimum=0.0)
            mods = []
            eps12 = _parse_sinusoids(r.sub("eps12"))
            eps21 = _parse_sinusoids(r.sub("eps21"))
            if eps12:
                mods.append(competition.PairModulation(0, 1, eps12))
            if eps21:
                mods.append(competition.PairModulation(1, 0, eps21))
            spec = competition.PeriodicChurnSpec(
                a0=competition.ChurnMatrix.from_rows([[0.0, a12], [a21, 0.0]]),
                eps=tuple(mods))
            return _Periodic(spec, r.number("u1_0", minimum=0.0))
        if kind == "stimulated_churn":
            spec = competition.StimulatedChurnSpec(
                churn=competition.ChurnMatrix.from_rows(r.matrix("a")),
                b=tuple(r.number_list("b")),
                eps=tuple(int(v) for v in r.number_list("eps")))
            u0 = tuple(r.number_list("u0")) if r.has("u0") else None
            return _Stimulated(spec, u0)
        if kind == "bpq":
            return _parse_bpq(r)
        if kind == "complementary":
            return games.ComplementarySpec(
                g=r.number("g"), b=r.number("b"), a_c=r.number("a_c"),
                b_c=r.number("b_c"), tau=r.number("tau", required=False, default=0.0),
                N=r.number("N", required=False, default=1.0),
                N_c=r.number("N_c", required=False, default=None) if r.has("N_c") else None)
    except (ParameterError, MarketDynError) as exc:
        r.invariant(str(exc), "the values above")
        return None
    raise AssertionError(kind)


def _parse_bpq(r: _Reader):
    case_kind = r.string("case")
    n = r.number("N", required=False, default=1.0)
    try:
        if case_kind == "case1":
            def sched_of(key: str):
                raw = r.data.get(key, 0.0)
                if isinstance(raw, (int, float)) and not isinstance(raw, bool):
                    return monopoly.ConstantRate(float(raw))
                return _parse_schedule(r.sub(key))

            a, b, c = sched_of("a"), sched_of("b"), sched_of("c")
            if a is None or b is None or c is None:
                return None
            return games.Case1(a=a, b=b, c=c, N=n)
        if case_kind == "case2":
            return games.Case2(beta=r.number("beta"), b=r.number("b"), N=n,
                               P0=r.number("P0"),
                               Q0=r.number("Q0", required=False, default=0.0))
        if case_kind == "case3":
            return games.Case3(a=r.number("a"), beta=r.number("beta"),
                               b=r.number("b"), N=n)
        if case_kind == "case4":
            return games.Case4(beta=r.number("beta"), gamma=r.number("gamma"),
                               N=n, P0=r.number("P0"), Q0=r.number("Q0"))
        if case_kind == "case5":
            return games.Case5(a=r.number("a"), gamma=r.number("gamma"), N=n,
                               Q0=r.number("Q0"),
                               P0=r.number("P0", required=False, default=0.0))
        if case_kind == "case6":
            return games.Case6(a=r.number("a"), b=r.number("b"),
                               gamma=r.number("gamma"), N=n)
    except (ParameterError, MarketDynError) as exc:
        r.invariant(str(exc), "the values above")
        return None
    r.issues.append(ValidationIssue(
        "unknown_kind", f"{r.path}.case", "one of case1..case6", repr(case_kind)))
    return None


# Small wrappers pairing module-level parameter sets with run context.

@dataclass(frozen=True)
class _Scheduled:
    schedule: monopoly.RateSchedule
    u0: float
    N: float


@dataclass(frozen=True)
class _Segmented:
    segments: tuple[monopoly.Segment, ...]
    N: float


@dataclass(frozen=True)
class _Hesitation:
    params: monopoly.HesitationParams
    N: float


@dataclass(frozen=True)
class _BirthDeath:
    params: monopoly.BirthDeathParams
    N: float


@dataclass(frozen=True)
class _Innovators:
    m: tuple[float, ...]


@dataclass(frozen=True)
class _Competition:
    market: competition.BassCompetition
    churn: object | None


@dataclass(frozen=True)
class _Spontaneous:
    m: tuple[float, ...]
    churn: competition.ChurnMatrix


@dataclass(frozen=True)
class _Periodic:
    spec: competition.PeriodicChurnSpec
    u1_0: float


@dataclass(frozen=True)
class _Stimulated:
    spec: competition.StimulatedChurnSpec
    u0: tuple[float, ...] | None


# ---------------------------------------------------------------------------
# Parse / serialize
# ---------------------------------------------------------------------------

def parse_scenario(data: dict) -> Scenario:
    issues: list[ValidationIssue] = []
    root = _Reader(data, "$", issues)
    if not isinstance(data, dict):
        raise ScenarioValidationError([ValidationIssue(
            "bad_type", "$", "a scenario object", repr(data))])
    horizon = root.number("horizon", minimum=0.0)
    if horizon <= 0 and root.has("horizon"):
        root.invariant("horizon > 0", repr(horizon))
    samples = root.integer("samples", required=False, default=1000, minimum=2)
    outputs = None
    if root.has("outputs"):
        raw = data["outputs"]
        if not isinstance(raw, list) or not all(isinstance(v, str) for v in raw):
            issues.append(ValidationIssue(
                "bad_type", "$.outputs", "a list of channel names", repr(raw)))
        else:
            outputs = tuple(raw)
    time_unit = root.string("time_unit", required=False, default="year")
    name = root.string("name", required=False, default=None) if root.has("name") else None

    model_reader = root.sub("model")
    model = None
    kind = ""
    if not isinstance(model_reader.data, dict):
        issues.append(ValidationIssue(
            "missing_field" if model_reader.data is None else "bad_type",
            "$.model", "a model object", repr(model_reader.data)))
    else:
        kind = model_reader.string("kind")
        if kind and kind not in MODEL_KINDS:
            issues.append(ValidationIssue(
                "unknown_kind", "$.model.kind",
                "one of " + "|".join(MODEL_KINDS), repr(kind)))
        elif kind:
            model = _build_model(kind, model_reader)
    if issues:
        raise ScenarioValidationError(issues)
    assert model is not None
    return Scenario(kind=kind, model=model, horizon=horizon, samples=samples,
                    outputs=outputs, time_unit=time_unit, name=name)


def parse_scenario_text(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError([ValidationIssue(
            "bad_type", "$", "valid JSON", f"parse error: {exc}")]) from exc
    return parse_scenario(data)


def _model_to_dict(kind: str, model) -> dict:
    if kind == "simple":
        return {"kind": kind, "a": model.a, "u0": model.u0, "N": model.N}
    if kind == "scheduled":
        return {"kind": kind, "schedule": _schedule_to_dict(model.schedule),
                "u0": model.u0, "N": model.N}
    if kind == "segmented":
        return {"kind": kind, "N": model.N,
                "segments": [{"n": s.n, "schedule": _schedule_to_dict(s.schedule)}
                             for s in model.segments]}
    if kind == "hesitation":
        p = model.params
        return {"kind": kind, "a": p.a, "b": p.b, "c": p.c,
                "variant": p.variant, "N": model.N}
    if kind == "birth_death":
        p = model.params
        return {"kind": kind, "a": p.a, "d": p.d, "f": p.f, "g": p.g, "N": model.N}
    if kind == "feedback":
        return {"kind": kind, "kernel": _kernel_to_dict(model.kernel),
                "rate": model.rate, "u0": model.u0, "N": model.N}
    if kind == "innovators_only":
        return {"kind": kind, "m": list(model.m)}
    if kind == "bass_competition":
        out = {"kind": kind, "m": list(model.market.m), "r": list(model.market.r),
               "u0": list(model.market.u0)}
        if model.churn is not None:
            out["churn"] = _churn_to_dict(model.churn)
        return out
    if kind == "spontaneous_churn":
        return {"kind": kind, "m": list(model.m),
                "a": [list(row) for row in model.churn.a]}
    if kind == "periodic_churn":
        spec = model.spec

        def terms(i, j):
            return [{"amplitude": s.amplitude, "period": s.period, "phase": s.phase}
                    for m in spec.eps if (m.i, m.j) == (i, j) for s in m.terms]

        return {"kind": kind, "a12_0": spec.a0.a[0][1], "a21_0": spec.a0.a[1][0],
                "eps12": terms(0, 1), "eps21": terms(1, 0), "u1_0": model.u1_0}
    if kind == "stimulated_churn":
        out = {"kind": kind, "a": [list(row) for row in model.spec.churn.a],
               "b": list(model.spec.b), "eps": list(model.spec.eps)}
        if model.u0 is not None:
            out["u0"] = list(model.u0)
        return out
    if kind == "bpq":
        case = model
        if isinstance(case, games.Case1):
            return {"kind": kind, "case": "case1", "N": case.N,
                    "a": _schedule_to_dict(case.a), "b": _schedule_to_dict(case.b),
                    "c": _schedule_to_dict(case.c)}
        if isinstance(case, games.Case2):
            return {"kind": kind, "case": "case2", "N": case.N, "beta": case.beta,
                    "b": case.b, "P0": case.P0, "Q0": case.Q0}
        if isinstance(case, games.Case3):
            return {"kind": kind, "case": "case3", "N": case.N, "a": case.a,
                    "beta": case.beta, "b": case.b}
        if isinstance(case, games.Case4):
            return {"kind": kind, "case": "case4", "N": case.N, "beta": case.beta,
                    "gamma": case.gamma, "P0": case.P0, "Q0": case.Q0}
        if isinstance(case, games.Case5):
            return {"kind": kind, "case": "case5", "N": case.N, "a": case.a,
                    "gamma": case.gamma, "Q0": case.Q0, "P0": case.P0}
        if isinstance(case, games.Case6):
            return {"kind": kind, "case": "case6", "N": case.N, "a": case.a,
                    "b": case.b, "gamma": case.gamma}
    if kind == "complementary":
        out = {"kind": kind, "g": model.g, "b": model.b, "a_c": model.a_c,
               "b_c": model.b_c, "tau": model.tau, "N": model.N}
        if model.N_c is not None:
            out["N_c"] = model.N_c
        return out
    raise TypeError(f"cannot serialize model kind {kind!r}")


def scenario_to_dict(s: Scenario) -> dict:
    out: dict[str, Any] = {
        "model": _model_to_dict(s.kind, s.model),
        "horizon": s.horizon,
        "samples": s.samples,
        "time_unit": s.time_unit,
    }
    if s.outputs is not None:
        out["outputs"] = list(s.outputs)
    if s.name is not None:
        out["name"] = s.name
    return out


def scenario_to_text(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def _crossing_time(times: Sequence[float], values: Sequence[float],
                   level: float) -> float | None:
    """First grid crossing of a level, linearly interpolated."""
    for (t0, v0), (t1, v1) in zip(zip(times, values), zip(times[1:], values[1:])):
        if (v0 - level) * (v1 - level) <= 0.0 and v0 != v1:
            if min(v0, v1) <= level <= max(v0, v1):
                return t0 + (level - v0) * (t1 - t0) / (v1 - v0)
    if values and values[0] == level:
        return times[0]
    return None


def run_scenario(s: Scenario) -> RunReport:
    """Execute a scenario: trajectory plus model-appropriate metrics."""
    grid = time_grid(0.0, s.horizon, s.samples)
    kind, model = s.kind, s.model
    metrics: list[tuple[str, object]] = []
    discrepancies: tuple[str, ...] = ()

    if kind == "simple":
        traj = monopoly.simple_path(model, grid)
        lat = monopoly.simple_latency(model)
        metrics += [("a", model.a), ("T50", lat.t50), ("T10", lat.t10)]
    elif kind == "scheduled":
        traj = monopoly.scheduled_path(model.schedule, model.u0, grid, N=model.N)
        u = traj.channel("u")
        metrics.append(("u_end", u[-1]))
        for label, level in (("T10", 0.1), ("T50", 0.5)):
            t_hit = _crossing_time(grid, u, level)
            if t_hit is not None:
                metrics.append((label, t_hit))
        if isinstance(model.schedule, monopoly.ExpDecayRate):
            metrics.append(("u_asymptote", model.schedule.asymptotic_share(model.u0)))
    elif kind == "segmented":
        traj = monopoly.segmented_path(model.segments, model.N, grid)
        u = traj.channel("u")
        metrics.append(("u_end", u[-1]))
        for label, level in (("T10", 0.1), ("T50", 0.5)):
            t_hit = _crossing_time(grid, u, level)
            if t_hit is not None:
                metrics.append((label, t_hit))
    elif kind == "hesitation":
        traj = monopoly.hesitation_path(model.params, grid, N=model.N)
        u = traj.channel("u")
        for label, level in (("T10", 0.1), ("T50", 0.5)):
            t_hit = _crossing_time(grid, u, level)
            if t_hit is not None:
                metrics.append((label, t_hit))
        if model.params.variant == "returning_hesitation":
            lam1, lam2, r = model.params.eigenvalues()
            metrics += [("lambda1", lam1), ("lambda2", lam2), ("r", r)]
    elif kind == "birth_death":
        traj = monopoly.birth_death_path(model.params, grid, N=model.N)
        u = traj.channel("u")
        k = max(range(len(u)), key=lambda i: u[i])
        metrics += [("u_peak", u[k]), ("t_peak", grid[k])]
    elif kind == "feedback":
        traj = feedback.feedback_path(model, grid)
        m = feedback.latency_metrics(model)
        metrics += [("rate", model.rate), ("T50", m.t50), ("T10", m.t10),
                    ("T60_minus_T50", m.t60_minus_t50)]
        if m.u_infl is not None:
            metrics += [("u_inflection", m.u_infl), ("t_inflection", m.t_infl),
                        ("gradient_at_inflection", m.gradient_at_infl)]
        if model.kernel.kind == "quadratic":
            from .tables import _quadratic_catalog_ratio
            metrics += [("T10_over_T50", m.t10 / m.t50),
                        ("T10_over_T50_catalog_variant",
                         _quadratic_catalog_ratio(model.u0))]
        discrepancies = feedback.discrepancy_notes(model.kernel)
    elif kind == "innovators_only":
        traj = competition.innovators_only_path(model.m, grid)
        total = math.fsum(model.m)
        for i, mi in enumerate(model.m):
            metrics.append((f"u{i + 1}_asymptote", mi / total))
    elif kind == "bass_competition":
        traj = competition.competitive_path_numeric(model.market, model.churn, grid)
        for i in range(model.market.n):
            metrics.append((f"u{i + 1}_end", traj.channel(f"u{i + 1}")[-1]))
        if model.churn is None:
            try:
                fp = competition.fixed_point_no_churn(model.market)
                for i, v in enumerate(fp):
                    metrics.append((f"u{i + 1}_fixed_point", v))
            except (ParameterError, MarketDynError):
                pass
    elif kind == "spontaneous_churn":
        traj = competition.spontaneous_path(model.m, model.churn, grid)
        eq = competition.spontaneous_equilibrium(model.churn)
        for i, v in enumerate(eq):
            metrics.append((f"u{i + 1}_equilibrium", v))
        if model.churn.n == 2 and model.churn.a[0][1] == 0.0:
            metrics.append(("T_m_supplier2", competition.two_supplier_peak_time(
                model.m[0], model.m[1], model.churn.a[1][0])))
    elif kind == "periodic_churn":
        traj = competition.periodic_two_supplier_path(model.spec, model.u1_0, grid)
        a0 = model.spec.a0
        metrics.append(("mean_share_u1", a0.a[1][0] / (a0.a[0][1] + a0.a[1][0])))
    elif kind == "stimulated_churn":
        n = model.spec.n
        u0 = model.u0 if model.u0 is not None else tuple(1.0 / n for _ in range(n))
        market = competition.BassCompetition(
            m=tuple(0.0 for _ in range(n)), r=tuple(1.0 for _ in range(n)), u0=u0)
        traj = competition.competitive_path_numeric(market, model.spec, grid)
        fp = competition.stimulated_fixed_point(model.spec, u0=u0)
        metrics.append(("classification", fp.classification))
        for i, v in enumerate(fp.u):
            metrics.append((f"u{i + 1}_fixed_point", v))
    elif kind == "bpq":
        traj = games.bpq_path(model, grid)
        peak = games.peak_metrics(model, grid)
        metrics += [("T_m", peak.T_m), ("P_m", peak.P_m), ("C_inf", peak.C_inf)]
        if isinstance(model, games.Case2):
            rel = games.sir_relations(model)
            metrics += [("B_inf", rel.B_inf), ("B_at_peak", rel.B_Tm),
                        ("P_at_peak", rel.P_Tm)]
    elif kind == "complementary":
        traj = games.complementary_path(model, grid)
        p = traj.channel("P")
        k = max(range(len(p)), key=lambda i: p[i])
        pc = traj.channel("P_c")
        kc = max(range(len(pc)), key=lambda i: pc[i])
        metrics += [("T_m", grid[k]), ("P_m", p[k]),
                    ("T_m_companion", grid[kc]), ("P_m_companion", pc[kc])]
    else:
        raise ParameterError(f"cannot run model kind {kind!r}")

    return RunReport(scenario=s, trajectory=traj, metrics=tuple(metrics),
                     discrepancies=discrepancies + traj.notes)


# ---------------------------------------------------------------------------
# CSV / metrics serialization
# ---------------------------------------------------------------------------

def format_value(v: float) -> str:
    """Locale-independent 9-significant-digit rendering."""
    return format(float(v), ".9g")


def render_csv(traj: Trajectory, outputs: Sequence[str] | None = None,
               delimiter: str = ",") -> str:
    """Header row plus one line per sample; LF endings; deterministic bytes."""
    labels = list(outputs) if outputs else list(traj.labels)
    for label in labels:
        if label not in traj.labels:
            raise ParameterError(f"unknown output channel {label!r}; "
                                 f"have {', '.join(traj.labels)}")
    cols = [traj.channel(label) for label in labels]
    lines = [delimiter.join(["t"] + labels)]
    for i, t in enumerate(traj.times):
        lines.append(delimiter.join([format_value(t)] + [format_value(c[i]) for c in cols]))
    return "\n".join(lines) + "\n"


def render_metrics(report: RunReport, delimiter: str = ",") -> str:
    lines = ["metric" + delimiter + "value"]
    for name, value in report.metrics:
        rendered = value if isinstance(value, str) else format_value(value)
        lines.append(f"{name}{delimiter}{rendered}")
    for note in report.discrepancies:
        lines.append(f"note{delimiter}\"{note}\"")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

def calibrate(doc: dict) -> list[tuple[str, float]]:
    """Resolve model parameters from strategic targets.

    Supported target sets: T50 for the no-feedback and feedback-kernel
    markets; (T_m, ratio) for the externally driven game; (T_m, P_Tm)
    for the player-stimulated game, which recovers (b, beta).
    """
    issues: list[ValidationIssue] = []
    root = _Reader(doc, "$", issues)
    model_r = root.sub("model")
    targets_r = root.sub("targets")
    if not isinstance(model_r.data, dict):
        issues.append(ValidationIssue("missing_field", "$.model", "a model object",
                                      repr(model_r.data)))
    if not isinstance(targets_r.data, dict):
        issues.append(ValidationIssue("missing_field", "$.targets", "a targets object",
                                      repr(targets_r.data)))
    if issues:
        raise ScenarioValidationError(issues)

    kind = model_r.string("kind")
    if kind == "simple":
        t50 = targets_r.number("T50", minimum=0.0)
        if issues:
            raise ScenarioValidationError(issues)
        u0 = model_r.number("u0", required=False, default=0.0)
        if u0 >= 0.5:
            raise CalibrationInfeasibleError("u0 already at or above the 50% target")
        a = math.log((1.0 - u0) / 0.5) / t50
        return [("a", a)]
    if kind == "feedback":
        kern = _parse_kernel(model_r.sub("kernel"))
        t50 = targets_r.number("T50", minimum=0.0)
        if issues or kern is None:
            raise ScenarioValidationError(issues)
        u0 = model_r.number("u0", required=False, default=0.0)
        try:
            rate = feedback.calibrate_rate(kern, t50, u0)
        except (ParameterError, MarketDynError) as exc:
            raise CalibrationInfeasibleError(str(exc)) from exc
        return [("rate", rate)]
    if kind == "bpq":
        case = model_r.string("case")
        if case == "case1":
            t_m = targets_r.number("T_m", minimum=0.0)
            ratio = targets_r.number("ratio", minimum=0.0)
            if issues:
                raise ScenarioValidationError(issues)
            if ratio <= 0 or t_m <= 0:
                raise CalibrationInfeasibleError("T_m and ratio must be positive")
            return [("a_plus_c", games.calibrate_case1(t_m, ratio))]
        if case == "case2":
            n = model_r.number("N")
            p0 = model_r.number("P0")
            q0 = model_r.number("Q0", required=False, default=0.0)
            t_m = targets_r.number("T_m", minimum=0.0)
            p_tm = targets_r.number("P_Tm", minimum=0.0)
            if issues:
                raise ScenarioValidationError(issues)
            return _calibrate_sir(n, p0, q0, t_m, p_tm)
    raise ScenarioValidationError([ValidationIssue(
        "unknown_kind", "$.model.kind",
        "one of simple|feedback|bpq(case1|case2)", repr(kind))])


def _calibrate_sir(n: float, p0: float, q0: float, t_m: float,
                   p_tm: float) -> list[tuple[str, float]]:
    """Recover (b, beta) from the peak height and peak time.

    The peak height fixes x = b/beta through
    P_Tm = N - Q0 - x(1 + ln(B0/x)); the peak time then scales b via the
    b-free time integral.
    """
    b0 = n - p0 - q0
    if not p0 < p_tm:
        raise CalibrationInfeasibleError(
            f"peak player count must exceed the seed P0 = {p0:g}")
    if not p_tm < n - q0:
        raise CalibrationInfeasibleError(
            f"peak player count must stay below N - Q0 = {n - q0:g}")
    if not t_m > 0:
        raise CalibrationInfeasibleError("peak time must be positive")

    def gap(x: float) -> float:
        return n - q0 - x * (1.0 + math.log(b0 / x)) - p_tm

    x = numerics.solve_root(gap, 1e-9 * b0, b0 * (1.0 - 1e-12), tol=1e-13 * b0)
    q_tm = q0 + x * math.log(b0 / x)

    def integrand(u: float) -> float:
        return 1.0 / (n - u - b0 * math.exp(-(u - q0) / x))

    unit_time = numerics.quadrature(integrand, q0, q_tm, tol=1e-11)
    b = unit_time / t_m
    return [("b", b), ("beta", b / x)]
