"""External solver hook: export an LP file, run a command, read a key=value solution.

The command comes from ``RAMPUC_SOLVER_CMD`` (or the ``command`` argument).
It is a template; ``{lp}``, ``{sol}`` and ``{gap}`` are substituted.  When
unset, the bundled HiGHS runner (``python -m rampuc.milp.highs_runner``) is
used.

Solution file format, one ``key=value`` per line::

    status=optimal            # optimal | infeasible | unbounded | gap-limit
    objective=44100.0
    gap=0.0
    node_count=12
    var.<lp name>=<value>     # one line per variable, LP-file names
"""

from __future__ import annotations

import math
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from .lpfile import export_lp_file, mangle_names
from .problem import GAP_LIMIT, OPTIMAL, MilpProblem, SolveResult, check_feasibility

ENV_VAR = "RAMPUC_SOLVER_CMD"
STATUSES = ("optimal", "infeasible", "unbounded", "gap-limit")


class ExternalSolverError(RuntimeError):
    pass


def default_command() -> str:
    return f"{shlex.quote(sys.executable)} -m rampuc.milp.highs_runner {{lp}} {{sol}} --gap {{gap}}"


def write_solution(path, status: str, objective: float, gap: float, node_count: int,
                   values: dict[str, float]) -> None:
    lines = [f"status={status}", f"objective={objective!r}", f"gap={gap!r}", f"node_count={node_count}"]
    lines += [f"var.{k}={float(v)!r}" for k, v in values.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_solution(path) -> dict:
    out: dict = {"values": {}}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ExternalSolverError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        if key.startswith("var."):
            out["values"][key[4:]] = float(val)
        elif key == "status":
            if val.strip() not in STATUSES:
                raise ExternalSolverError(f"{path}:{lineno}: unknown status {val!r}")
            out["status"] = val.strip()
        elif key in ("objective", "gap"):
            out[key] = float(val)
        elif key == "node_count":
            out[key] = int(val)
    if "status" not in out:
        raise ExternalSolverError(f"{path}: missing status line")
    return out


def solve_external(problem: MilpProblem, gap: float = 1e-3, command: str | None = None,
                   workdir=None, feas_tol: float = 1e-6, time_limit: float | None = None) -> SolveResult:
    """Solve via the external command; the returned point must pass check_feasibility.

    ``time_limit`` (seconds) is appended to the bundled runner's command line
    and offered to custom templates as ``{time_limit}``.
    """
    command = command or os.environ.get(ENV_VAR)
    if not command:
        command = default_command() + (f" --time-limit {time_limit!r}" if time_limit else "")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp = Path(tmp) / "model.lp"
        sol = Path(tmp) / "model.sol"
        export_lp_file(problem, lp)
        cmd = command.format(lp=shlex.quote(str(lp)), sol=shlex.quote(str(sol)), gap=repr(gap),
                             time_limit=repr(time_limit or 0))
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
        if proc.returncode != 0 or not sol.exists():
            raise ExternalSolverError(f"solver command failed ({proc.returncode}): {proc.stderr.strip()[-2000:]}")
        data = read_solution(sol)
    names = [v.name for v in problem.variables]
    status = data["status"]
    if status not in (OPTIMAL, GAP_LIMIT):
        return SolveResult(status, None, math.nan, math.inf, data.get("node_count", 0), names)
    lp_names = mangle_names(names)
    try:
        x = np.array([data["values"][n] for n in lp_names])
    except KeyError as exc:
        raise ExternalSolverError(f"solution file lacks variable {exc.args[0]}") from None
    for j in problem.binary_indices:
        x[j] = round(x[j])
    bad = check_feasibility(problem, x, tol=feas_tol)
    if bad:
        worst = max(bad, key=lambda v: v.magnitude)
        raise ExternalSolverError(f"external solution infeasible: {len(bad)} violations, worst {worst}")
    return SolveResult(status, x, problem.objective_value(x), data.get("gap", 0.0),
                       data.get("node_count", 0), names)
