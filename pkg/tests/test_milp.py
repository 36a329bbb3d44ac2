import math
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from scipy.optimize import linprog

from rampuc.milp import (
    EQ,
    GE,
    LE,
    MilpProblem,
    branch_and_bound,
    check_feasibility,
    dual_objective,
    lp_text,
    parse_lp_text,
    read_lp_file,
    solve,
    solve_lp,
    var,
)
from rampuc.milp.external import ExternalSolverError, solve_external
from rampuc.milp.lpfile import LpFormatError, mangle_names
from rampuc.milp.problem import ProblemError

from .oracles import brute_force

GOLDEN = Path(__file__).parent / "golden"


def tiny() -> MilpProblem:
    p = MilpProblem("tiny")
    x = p.add_var("x_G1_2", 0, 10)
    y = p.add_var("on[G1,2]", binary=True)
    f = p.add_var("slack", -math.inf, math.inf)
    p.add_objective(3 * var(x) + 100 * var(y) - 0.5 * var(f))
    p.add_constraint("cap", var(x) - 10 * var(y), LE, 0)
    p.add_constraint("demand", var(x) + var(f), GE, 4)
    p.add_constraint("fix", var(f), EQ, 1.5)
    return p


def test_lp_text_matches_golden():
    assert lp_text(tiny()) == (GOLDEN / "tiny.lp").read_text()


def test_lp_round_trip_preserves_model(tmp_path):
    p = tiny()
    q = parse_lp_text(lp_text(p))
    assert [v.binary for v in q.variables] == [v.binary for v in p.variables]
    assert [(v.lb, v.ub) for v in q.variables] == [(v.lb, v.ub) for v in p.variables]
    assert [(c.sense, c.rhs, c.coefs) for c in q.constraints] == [(c.sense, c.rhs, c.coefs) for c in p.constraints]
    assert q.objective == p.objective
    assert lp_text(q) == lp_text(p)


def test_lp_parse_errors_have_line_numbers():
    with pytest.raises(LpFormatError, match="line"):
        parse_lp_text("Minimize\n obj: 2 x\nSubject To\n c1: 2 x >= \nEnd\n")


def test_name_mangling_is_unique_and_legal():
    names = mangle_names(["a b", "a_b", "a[b]", "x" * 300])
    assert len(set(names)) == 4
    assert all(len(n) <= 255 for n in names)


@st.composite
def random_lp(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(1, 5))
    c = draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n))
    p = MilpProblem("r")
    for j in range(n):
        p.add_var(f"v{j}", 0, draw(st.integers(1, 10)))
    p.add_objective(sum((c[j] * var(j) for j in range(n)), start=var(0) * 0))
    for i in range(m):
        a = draw(st.lists(st.integers(-4, 4), min_size=n, max_size=n))
        sense = draw(st.sampled_from([LE, GE, EQ]))
        p.add_constraint(f"r{i}", sum((a[j] * var(j) for j in range(n)), start=var(0) * 0), sense,
                         draw(st.integers(-10, 20)))
    return p


def _linprog(p: MilpProblem):
    c, A, senses, b, lb, ub = p.arrays()
    le = [i for i, s in enumerate(senses) if s == LE]
    ge = [i for i, s in enumerate(senses) if s == GE]
    eq = [i for i, s in enumerate(senses) if s == EQ]
    A_ub = np.vstack([A[le], -A[ge]]) if le or ge else None
    b_ub = np.concatenate([b[le], -b[ge]]) if le or ge else None
    return linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A[eq] if eq else None, b_eq=b[eq] if eq else None,
                   bounds=list(zip(lb, ub)), method="highs")


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_lp())
def test_simplex_agrees_with_reference_lp(p):
    ours = solve_lp(p)
    ref = _linprog(p)
    if ref.status == 2:
        assert ours.status == "infeasible"
        return
    assert ref.status == 0
    assert ours.status == "optimal"
    assert ours.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
    assert not check_feasibility(p, ours.x, tol=1e-7)
    # strong duality at the returned basis
    assert dual_objective(p, ours) == pytest.approx(ours.objective, rel=1e-7, abs=1e-6)


@st.composite
def random_milp(draw):
    p = draw(random_lp())
    for v in p.variables[: draw(st.integers(0, len(p.variables)))]:
        v.binary = True
        v.ub = 1.0
    return p


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_milp())
def test_branch_and_bound_agrees_with_enumeration(p):
    best, _ = brute_force(p)
    r = branch_and_bound(p, gap=1e-9)
    if math.isinf(best):
        assert r.status == "infeasible"
    else:
        assert r.status == "optimal"
        assert r.objective == pytest.approx(best, rel=1e-6, abs=1e-6)
        assert not check_feasibility(p, r.x)


def test_node_limit_reports_gap_limit():
    p = MilpProblem("knap")
    w = [12, 7, 11, 8, 9, 13, 5, 6, 10, 4, 14, 3]
    for j in range(len(w)):
        p.add_var(f"b{j}", binary=True)
    p.add_objective(sum((-(w[j] + (j % 3)) * var(j) for j in range(len(w))), start=var(0) * 0))
    p.add_constraint("cap", sum((w[j] * var(j) for j in range(len(w))), start=var(0) * 0), LE, 40.5)
    r = branch_and_bound(p, gap=1e-9, node_limit=3)
    assert r.status in ("gap-limit", "optimal")
    full = branch_and_bound(p, gap=1e-9)
    assert full.status == "optimal"
    if r.status == "gap-limit":
        assert r.gap > 0


def test_problem_rejects_bad_input():
    p = MilpProblem()
    p.add_var("a")
    with pytest.raises(ProblemError):
        p.add_var("a")
    with pytest.raises(ProblemError):
        p.add_var("b", 2, 1)
    with pytest.raises(ProblemError):
        p.add_constraint("c", var(0), "<>", 1)
    with pytest.raises(ProblemError):
        p.add_constraint("c", var(5), LE, 1)


def test_external_backend_via_bundled_runner():
    p = tiny()
    ours = solve(p, 1e-9, "builtin")
    ext = solve(p, 1e-9, "external")
    assert ext.status == "optimal"
    assert ext.objective == pytest.approx(ours.objective, rel=1e-9)


def _fake_solver(tmp_path, body: str) -> str:
    script = tmp_path / "fake.py"
    script.write_text(textwrap.dedent(body))
    return f"{sys.executable} {script} {{lp}} {{sol}} {{gap}}"


def test_external_rejects_infeasible_point(tmp_path):
    cmd = _fake_solver(tmp_path, """
        import sys
        open(sys.argv[2], "w").write("status=optimal\\nobjective=0\\nvar.x_G1_2=0\\nvar.on_G1_2_=0\\nvar.slack=0\\n")
    """)
    with pytest.raises(ExternalSolverError, match="infeasible"):
        solve_external(tiny(), command=cmd)


def test_external_reports_command_failure(tmp_path):
    cmd = _fake_solver(tmp_path, "raise SystemExit(3)\n")
    with pytest.raises(ExternalSolverError, match="failed"):
        solve_external(tiny(), command=cmd)


def test_external_passes_through_infeasible_status(tmp_path):
    cmd = _fake_solver(tmp_path, """
        import sys
        open(sys.argv[2], "w").write("status=infeasible\\n")
    """)
    assert solve_external(tiny(), command=cmd).status == "infeasible"


def test_read_lp_file(tmp_path):
    path = tmp_path / "t.lp"
    path.write_text(lp_text(tiny()))
    assert read_lp_file(path).num_vars == 3


def test_lp_bad_bound_reports_line():
    with pytest.raises(LpFormatError, match="line 5"):
        parse_lp_text("Minimize\n obj: x\nSubject To\nBounds\n 0 <= x <= big\nEnd\n")
