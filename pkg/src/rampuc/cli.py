"""Command-line entry point.

    rampuc solve STUDY [--window T] [--formulation F] [--out DIR]
    rampuc roll STUDY
    rampuc audit STUDY [--window T]
    rampuc evaluate STUDY [--alpha-multipliers 2.8,3.0,3.5] [--scenarios N] [--seed S]
    rampuc export-lp STUDY [--window T]
    rampuc report STUDY ...      evaluate, then render the expected-cost figure

Exit codes: 0 success, 2 usage, 3 study parse error, 4 invariant violation,
5 infeasible model, 6 solver gap limit, 7 external solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import evaluation, rolling, tables
from .milp import BACKENDS, export_lp_file
from .milp.external import ExternalSolverError
from .requirements import study_requirements
from .system import (
    FORMULATIONS,
    InvariantError,
    NetLoadForecast,
    Study,
    StudyFormatError,
    load_system,
    with_config,
)
from .ucmodel import GapLimitError, InfeasibleModelError, UcModel, UcSolution, build_uc, solve_model

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INVARIANT = 4
EXIT_INFEASIBLE = 5
EXIT_GAP_LIMIT = 6
EXIT_SOLVER = 7

VERBS = ("solve", "roll", "audit", "evaluate", "export-lp", "report")


def _multipliers(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("need one or more non-negative multipliers")
    return vals


def _gap(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("gap must lie in (0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rampuc", description="Unit commitment with deliverable flexible ramping capability.")
    sub = ap.add_subparsers(dest="verb", required=True, metavar="VERB")
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("study", help="study file (JSON)")
        p.add_argument("--formulation", choices=FORMULATIONS)
        p.add_argument("--gap", type=_gap)
        p.add_argument("--backend", choices=BACKENDS)
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        if verb in ("solve", "audit", "export-lp"):
            p.add_argument("--window", type=int, help="first period of the window (default: study start)")
        if verb in ("evaluate", "report"):
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--scenarios", type=int, default=100)
            p.add_argument("--alpha-multipliers", type=_multipliers, default=list(evaluation.DEFAULT_MULTIPLIERS))
            p.add_argument("--lookahead", type=int, default=0, help="re-dispatch look-ahead periods")
            if verb == "report":
                p.add_argument("--figure-format", choices=("svg", "png"), default="svg")
    return ap


def _study(args) -> Study:
    study = load_system(args.study)
    changes = {}
    if args.formulation:
        changes["formulation"] = args.formulation
    if args.gap is not None:
        changes["mip_gap"] = args.gap
    if args.backend:
        changes["backend"] = args.backend
    return with_config(study, **changes) if changes else study


def window_model(study: Study, window: int | None) -> tuple[UcModel, rolling.RollingLog | None]:
    """Model of the window starting at ``window``; later windows are reached by rolling."""
    start = study.boundary.start_period
    if window is None or window == start:
        req = study_requirements(study.forecast, study.config)
        return build_uc(study.generators, study.forecast, study.boundary, study.config, req), None
    rows = study.config.rolling_forecasts
    idx = window - start
    if not 0 < idx < len(rows):
        raise InvariantError("--window", f"window {window} not reachable from the study's rolling forecasts")
    log = rolling.RollingLog(study.config.formulation, tuple(study.generators))
    for row in rows[:idx]:
        rolling.step(log, row[0], row[1:], study)
    row = rows[idx]
    bc = rolling.next_boundary(log.steps[-1], study.generators)
    nl = NetLoadForecast(tuple(row), window, True)
    req = study_requirements(nl, study.config)
    return build_uc(study.generators, nl, bc, study.config, req), log


def _solve_window(study: Study, window: int | None) -> tuple[UcSolution, UcModel]:
    m, _ = window_model(study, window)
    return solve_model(m), m


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def execute(args) -> int:
    study = _study(args)
    out: Path = args.out
    verb = args.verb
    status = EXIT_OK
    if verb == "solve":
        sol, m = _solve_window(study, args.window)
        text = tables.solution_csv(sol, list(study.generators))
        _write(out, f"solution_{sol.formulation}_t{sol.periods[0]}.csv", text)
        sys.stdout.write(text)
        status = EXIT_GAP_LIMIT if sol.status == "gap-limit" else EXIT_OK
    elif verb == "audit":
        sol, m = _solve_window(study, args.window)
        text = tables.audit_csv(rolling.audit_deliverable_frc(sol, study.generators))
        _write(out, f"audit_{sol.formulation}_t{sol.periods[0]}.csv", text)
        sys.stdout.write(text)
        status = EXIT_GAP_LIMIT if sol.status == "gap-limit" else EXIT_OK
    elif verb == "roll":
        log = rolling.run(study)
        f = log.formulation
        _write(out, f"roll_{f}.json", tables.log_json(log))
        _write(out, f"roll_{f}_windows.csv", tables.window_power_csv(log))
        text = tables.rolling_csv(log)
        _write(out, f"roll_{f}.csv", text)
        sys.stdout.write(text)
        if any(s.solution.status == "gap-limit" for s in log.steps):
            status = EXIT_GAP_LIMIT
    elif verb == "export-lp":
        m, _ = window_model(study, args.window)
        out.mkdir(parents=True, exist_ok=True)
        path = export_lp_file(m.problem, out / f"window_{study.config.formulation}_t{m.t0}.lp")
        sys.stdout.write(f"{path}\n")
    elif verb in ("evaluate", "report"):
        if args.scenarios < 1:
            raise InvariantError("--scenarios", "need at least one scenario")
        cmp = evaluation.run_comparison(study, args.alpha_multipliers, args.scenarios, args.seed,
                                        lookahead=args.lookahead)
        _write(out, "evaluation.csv", evaluation.report_csv(cmp))
        plot = evaluation.plot_data_csv(cmp)
        _write(out, "plot_data.csv", plot)
        if verb == "report":
            from .plotting import expected_cost_figure
            out.mkdir(parents=True, exist_ok=True)
            expected_cost_figure(cmp.summary_rows(), out / f"expected_cost.{args.figure_format}", args.figure_format)
        sys.stdout.write(plot)
        bad = [r for r in cmp.summary_rows() if r["status"] != "ok"]
        if any(r["status"] == "infeasible" for r in bad):
            status = EXIT_INFEASIBLE
        elif bad:
            status = EXIT_GAP_LIMIT
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return execute(args)
    except StudyFormatError as exc:
        print(f"rampuc: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        print(f"rampuc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except InfeasibleModelError as exc:
        print(f"rampuc: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except GapLimitError as exc:
        print(f"rampuc: gap limit: {exc}", file=sys.stderr)
        return EXIT_GAP_LIMIT
    except ExternalSolverError as exc:
        print(f"rampuc: external solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
