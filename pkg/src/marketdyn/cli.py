"""Deterministic command-line front end.

Subcommands: ``simulate`` (CSV time series), ``metrics`` (metric block),
``tables`` (recomputed reference tables), ``calibrate`` (parameters from
strategic targets) and ``equilibrium`` (asymptotic market state).

Exit codes: 0 success, 2 validation error, 3 numeric failure,
4 infeasible calibration.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from . import competition, feedback, scenario, tables
from .errors import (
    CalibrationInfeasibleError,
    MarketDynError,
    NumericsError,
    ParameterError,
    ScenarioValidationError,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_CALIBRATION = 4


def _read_document(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ScenarioValidationError([scenario.ValidationIssue(
            "missing_field", "$", "a readable file", repr(path))])
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError([scenario.ValidationIssue(
            "bad_type", "$", "valid JSON", f"parse error: {exc}")])


def _load_scenarios(path: str) -> list[scenario.Scenario]:
    data = _read_document(path)
    if isinstance(data, list):
        return [scenario.parse_scenario(item) for item in data]
    return [scenario.parse_scenario(data)]


def _write(out_path: str | None, text: str) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _delimiter(fmt: str) -> str:
    return "\t" if fmt == "tsv" else ","


def _apply_samples(s: scenario.Scenario, samples: int | None) -> scenario.Scenario:
    if samples is None:
        return s
    return scenario.Scenario(kind=s.kind, model=s.model, horizon=s.horizon,
                             samples=samples, outputs=s.outputs,
                             time_unit=s.time_unit, name=s.name)


def _run_many(scenarios, jobs: int):
    if jobs <= 1 or len(scenarios) == 1:
        return [scenario.run_scenario(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(scenario.run_scenario, scenarios))


def cmd_simulate(args) -> int:
    scenarios = [_apply_samples(s, args.samples) for s in _load_scenarios(args.file)]
    reports = _run_many(scenarios, args.jobs)
    blocks = []
    for idx, report in enumerate(reports):
        csv_text = scenario.render_csv(report.trajectory, report.scenario.outputs,
                                       _delimiter(args.format))
        if len(reports) > 1:
            label = report.scenario.name or f"scenario {idx + 1}"
            blocks.append(f"# {label}\n{csv_text}")
        else:
            blocks.append(csv_text)
    _write(args.out, "".join(blocks))
    return EXIT_OK


def cmd_metrics(args) -> int:
    scenarios = [_apply_samples(s, args.samples) for s in _load_scenarios(args.file)]
    reports = _run_many(scenarios, args.jobs)
    blocks = []
    for idx, report in enumerate(reports):
        text = scenario.render_metrics(report, _delimiter(args.format))
        if len(reports) > 1:
            label = report.scenario.name or f"scenario {idx + 1}"
            blocks.append(f"# {label}\n{text}")
        else:
            blocks.append(text)
    _write(args.out, "".join(blocks))
    return EXIT_OK


def cmd_tables(args) -> int:
    if args.which == "latency_u0":
        _write(args.out, tables.render_latency_u0())
    else:
        _write(args.out, tables.render_latency_kernels())
    return EXIT_OK


def cmd_calibrate(args) -> int:
    doc = _read_document(args.file)
    results = scenario.calibrate(doc)
    delim = _delimiter(args.format)
    lines = ["parameter" + delim + "value"]
    lines += [f"{name}{delim}{scenario.format_value(value)}" for name, value in results]
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    scenarios = _load_scenarios(args.file)
    delim = _delimiter(args.format)
    blocks = []
    for s in scenarios:
        lines = ["quantity" + delim + "value"]
        if s.kind == "feedback":
            for point in feedback.classify_equilibria(s.model.kernel):
                lines.append(f"u={scenario.format_value(point.u)}{delim}{point.kind}")
        elif s.kind == "bass_competition" and s.model.churn is None:
            for i, v in enumerate(competition.fixed_point_no_churn(s.model.market)):
                lines.append(f"u{i + 1}{delim}{scenario.format_value(v)}")
        elif (s.kind == "bass_competition"
              and isinstance(s.model.churn, competition.ChurnMatrix)):
            for i, v in enumerate(competition.spontaneous_equilibrium(s.model.churn)):
                lines.append(f"u{i + 1}{delim}{scenario.format_value(v)}")
        elif (s.kind == "bass_competition"
              and isinstance(s.model.churn, competition.StimulatedChurnSpec)):
            fp = competition.stimulated_fixed_point(s.model.churn)
            lines.append(f"classification{delim}{fp.classification}")
            for i, v in enumerate(fp.u):
                lines.append(f"u{i + 1}{delim}{scenario.format_value(v)}")
        elif s.kind == "spontaneous_churn":
            for i, v in enumerate(competition.spontaneous_equilibrium(s.model.churn)):
                lines.append(f"u{i + 1}{delim}{scenario.format_value(v)}")
        elif s.kind == "stimulated_churn":
            fp = competition.stimulated_fixed_point(s.model.spec, u0=s.model.u0)
            lines.append(f"classification{delim}{fp.classification}")
            for i, v in enumerate(fp.u):
                lines.append(f"u{i + 1}{delim}{scenario.format_value(v)}")
        elif s.kind == "periodic_churn":
            a0 = s.model.spec.a0
            mean = a0.a[1][0] / (a0.a[0][1] + a0.a[1][0])
            lines.append(f"u1_mean{delim}{scenario.format_value(mean)}")
            lines.append(f"u2_mean{delim}{scenario.format_value(1.0 - mean)}")
        else:
            raise ParameterError(
                f"no equilibrium analysis for model kind {s.kind!r}")
        blocks.append("\n".join(lines) + "\n")
    _write(args.out, "".join(blocks))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketdyn",
        description="Solve dynamic market models and emit deterministic CSV")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "tsv"), default="csv")
        p.add_argument("--samples", type=int, default=None,
                       help="override the sample count (default from file, else 1000)")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel evaluation of batch scenarios (order preserved)")

    p_sim = sub.add_parser("simulate", help="run a scenario file, emit the time series")
    p_sim.add_argument("file")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_met = sub.add_parser("metrics", help="run a scenario file, emit the metrics block")
    p_met.add_argument("file")
    common(p_met)
    p_met.set_defaults(func=cmd_metrics)

    p_tab = sub.add_parser("tables", help="recompute a reference table")
    p_tab.add_argument("which", choices=("latency_u0", "latency_kernels"))
    common(p_tab)
    p_tab.set_defaults(func=cmd_tables)

    p_cal = sub.add_parser("calibrate", help="solve model parameters from targets")
    p_cal.add_argument("file")
    common(p_cal)
    p_cal.set_defaults(func=cmd_calibrate)

    p_eq = sub.add_parser("equilibrium", help="asymptotic market state of a scenario")
    p_eq.add_argument("file")
    common(p_eq)
    p_eq.set_defaults(func=cmd_equilibrium)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioValidationError as exc:
        for issue in exc.issues:
            print(f"error {issue}", file=sys.stderr)
        return EXIT_VALIDATION
    except ParameterError as exc:
        print(f"error [invariant] {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CalibrationInfeasibleError as exc:
        print(f"error [calibration] {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except NumericsError as exc:
        print(f"error [numeric] {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MarketDynError as exc:
        print(f"error [numeric] {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
