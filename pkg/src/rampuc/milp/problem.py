"""Generic mixed-integer linear program container and solve result."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

LE, GE, EQ = "<=", ">=", "="
SENSES = (LE, GE, EQ)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
GAP_LIMIT = "gap-limit"


class ProblemError(ValueError):
    pass


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    binary: bool = False


@dataclass
class Constraint:
    name: str
    coefs: dict[int, float]
    sense: str
    rhs: float


class LinExpr:
    """Sparse affine expression over variable indices.

    Used by model builders to transcribe inequalities that mix variables and
    boundary constants on both sides.
    """

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[int, float] | None = None, const: float = 0.0):
        self.terms: dict[int, float] = dict(terms or {})
        self.const = float(const)

    @staticmethod
    def of(value: "LinExpr | float | int") -> "LinExpr":
        if isinstance(value, LinExpr):
            return value
        return LinExpr(const=float(value))

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def __add__(self, other):
        out = self.copy()
        other = LinExpr.of(other)
        for k, v in other.terms.items():
            out.terms[k] = out.terms.get(k, 0.0) + v
        out.const += other.const
        return out

    __radd__ = __add__

    def __neg__(self):
        return LinExpr({k: -v for k, v in self.terms.items()}, -self.const)

    def __sub__(self, other):
        return self + (-LinExpr.of(other))

    def __rsub__(self, other):
        return LinExpr.of(other) + (-self)

    def __mul__(self, scalar: float):
        s = float(scalar)
        return LinExpr({k: v * s for k, v in self.terms.items()}, self.const * s)

    __rmul__ = __mul__

    def __repr__(self):
        return f"LinExpr({self.terms!r}, {self.const!r})"


def var(index: int) -> LinExpr:
    return LinExpr({index: 1.0})


class MilpProblem:
    """Minimisation problem: variables with bounds/integrality, linear rows, linear objective."""

    def __init__(self, name: str = "problem"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self._var_index: dict[str, int] = {}
        self._con_index: dict[str, int] = {}

    # construction -------------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf, binary: bool = False) -> int:
        if name in self._var_index:
            raise ProblemError(f"duplicate variable name {name!r}")
        if binary:
            lb, ub = max(0.0, lb), min(1.0, ub)
        if lb > ub:
            raise ProblemError(f"variable {name!r}: lower bound {lb} exceeds upper bound {ub}")
        self.variables.append(Variable(name, float(lb), float(ub), binary))
        idx = len(self.variables) - 1
        self._var_index[name] = idx
        return idx

    def add_constraint(self, name: str, lhs, sense: str, rhs=0.0) -> int:
        """Add ``lhs sense rhs``; either side may be a LinExpr or a number."""
        if sense not in SENSES:
            raise ProblemError(f"unknown sense {sense!r}")
        if name in self._con_index:
            raise ProblemError(f"duplicate constraint name {name!r}")
        expr = LinExpr.of(lhs) - LinExpr.of(rhs)
        coefs = {k: v for k, v in sorted(expr.terms.items()) if v != 0.0}
        for k in coefs:
            if not 0 <= k < len(self.variables):
                raise ProblemError(f"constraint {name!r} references unknown variable {k}")
        self.constraints.append(Constraint(name, coefs, sense, -expr.const))
        idx = len(self.constraints) - 1
        self._con_index[name] = idx
        return idx

    def replace_constraint(self, name: str, lhs, sense: str, rhs=0.0) -> int:
        idx = self._con_index[name]
        expr = LinExpr.of(lhs) - LinExpr.of(rhs)
        coefs = {k: v for k, v in sorted(expr.terms.items()) if v != 0.0}
        self.constraints[idx] = Constraint(name, coefs, sense, -expr.const)
        return idx

    def add_objective(self, expr) -> None:
        expr = LinExpr.of(expr)
        for k, v in expr.terms.items():
            self.objective[k] = self.objective.get(k, 0.0) + v

    def set_bounds(self, index: int, lb: float, ub: float) -> None:
        v = self.variables[index]
        if lb > ub:
            raise ProblemError(f"variable {v.name!r}: lower bound {lb} exceeds upper bound {ub}")
        v.lb, v.ub = float(lb), float(ub)

    # lookup -------------------------------------------------------------
    def var_index(self, name: str) -> int:
        return self._var_index[name]

    def con_index(self, name: str) -> int:
        return self._con_index[name]

    def has_constraint(self, name: str) -> bool:
        return name in self._con_index

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def binary_indices(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.binary]

    def free_binaries(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.binary and v.lb < v.ub]

    # transforms ---------------------------------------------------------
    def copy(self) -> "MilpProblem":
        out = MilpProblem(self.name)
        out.variables = [Variable(v.name, v.lb, v.ub, v.binary) for v in self.variables]
        out.constraints = [Constraint(c.name, dict(c.coefs), c.sense, c.rhs) for c in self.constraints]
        out.objective = dict(self.objective)
        out._var_index = dict(self._var_index)
        out._con_index = dict(self._con_index)
        return out

    def relaxed(self) -> "MilpProblem":
        out = self.copy()
        for v in out.variables:
            v.binary = False
        return out

    def validate(self) -> None:
        for v in self.variables:
            if v.lb > v.ub:
                raise ProblemError(f"variable {v.name!r} has lb > ub")
            if v.binary and (v.lb < 0 or v.ub > 1):
                raise ProblemError(f"binary variable {v.name!r} has bounds outside [0, 1]")
        n = len(self.variables)
        for c in self.constraints:
            if c.sense not in SENSES:
                raise ProblemError(f"constraint {c.name!r} has sense {c.sense!r}")
            for k in c.coefs:
                if not 0 <= k < n:
                    raise ProblemError(f"constraint {c.name!r} references unknown variable {k}")
        for k in self.objective:
            if not 0 <= k < n:
                raise ProblemError(f"objective references unknown variable {k}")

    def arrays(self):
        """Dense (c, A, senses, b, lb, ub) view used by the LP solvers."""
        n, m = len(self.variables), len(self.constraints)
        c = np.zeros(n)
        for k, v in self.objective.items():
            c[k] = v
        A = np.zeros((m, n))
        b = np.zeros(m)
        senses = []
        for i, con in enumerate(self.constraints):
            for k, v in con.coefs.items():
                A[i, k] = v
            b[i] = con.rhs
            senses.append(con.sense)
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return c, A, senses, b, lb, ub

    def objective_value(self, values: Iterable[float]) -> float:
        x = list(values)
        return math.fsum(v * x[k] for k, v in self.objective.items())


@dataclass
class SolveResult:
    status: str
    x: np.ndarray | None
    objective: float
    gap: float = 0.0
    node_count: int = 0
    names: list[str] = field(default_factory=list, repr=False)
    duals: np.ndarray | None = field(default=None, repr=False)
    reduced_costs: np.ndarray | None = field(default=None, repr=False)
    iterations: int = 0
    root_bound: float = -math.inf

    @property
    def values(self) -> dict[str, float]:
        if self.x is None:
            return {}
        return {n: float(v) for n, v in zip(self.names, self.x)}

    @property
    def has_solution(self) -> bool:
        return self.x is not None and self.status in (OPTIMAL, GAP_LIMIT)


@dataclass(frozen=True)
class Violation:
    kind: str  # "bound", "constraint" or "integrality"
    name: str
    magnitude: float


def check_feasibility(problem: MilpProblem, values, tol: float = 1e-6) -> list[Violation]:
    """List every bound, row and integrality violation larger than ``tol``."""
    if isinstance(values, Mapping):
        x = [float(values[v.name]) for v in problem.variables]
    else:
        x = [float(v) for v in values]
    if len(x) != problem.num_vars:
        raise ProblemError(f"expected {problem.num_vars} values, got {len(x)}")
    out: list[Violation] = []
    for v, val in zip(problem.variables, x):
        if val < v.lb - tol:
            out.append(Violation("bound", v.name, v.lb - val))
        elif val > v.ub + tol:
            out.append(Violation("bound", v.name, val - v.ub))
        if v.binary and abs(val - round(val)) > tol:
            out.append(Violation("integrality", v.name, abs(val - round(val))))
    for c in problem.constraints:
        lhs = math.fsum(a * x[k] for k, a in c.coefs.items())
        if c.sense == LE:
            viol = lhs - c.rhs
        elif c.sense == GE:
            viol = c.rhs - lhs
        else:
            viol = abs(lhs - c.rhs)
        if viol > tol:
            out.append(Violation("constraint", c.name, viol))
    return out
