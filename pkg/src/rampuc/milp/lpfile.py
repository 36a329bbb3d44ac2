"""CPLEX-style LP text export and a parser for the subset we write.

The subset: ``Minimize`` objective, ``Subject To`` rows (<=, >=, =), a
``Bounds`` section listing every variable explicitly, ``Binaries`` and
``End``.  Coefficients use Python's shortest round-trip float repr, so a
parse of an exported file reproduces every coefficient exactly.
"""

from __future__ import annotations

import hashlib
import math
import re
from pathlib import Path

from .problem import GE, LE, LinExpr, MilpProblem

MAX_NAME = 255
MAX_LINE = 250
_BAD = re.compile(r"[^A-Za-z0-9_.]")


class LpFormatError(ValueError):
    pass


def mangle_names(names: list[str], limit: int = MAX_NAME) -> list[str]:
    """Map arbitrary names onto LP-legal, unique identifiers (deterministic)."""
    out: list[str] = []
    seen: set[str] = set()
    for raw in names:
        name = _BAD.sub("_", raw) or "_"
        if not (name[0].isalpha() or name[0] == "_"):
            name = "_" + name
        if len(name) > limit:
            digest = hashlib.sha1(raw.encode()).hexdigest()[:10]
            name = name[: limit - 11] + "_" + digest
        base, k = name, 1
        while name in seen:
            suffix = f"_{k}"
            name = base[: limit - len(suffix)] + suffix
            k += 1
        seen.add(name)
        out.append(name)
    return out


def _num(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _terms(coefs: dict[int, float], names: list[str]) -> list[str]:
    parts = []
    for k, v in sorted(coefs.items()):
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {_num(abs(v))} {names[k]}")
    if not parts:
        parts.append(f"+ 0 {names[0]}" if names else "0")
    return parts


def _wrap(head: str, parts: list[str], tail: str = "") -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + len(p) + 1 > MAX_LINE:
            lines.append(cur)
            cur = "   "
        cur += " " + p
    if tail:
        if len(cur) + len(tail) + 1 > MAX_LINE:
            lines.append(cur)
            cur = "   "
        cur += " " + tail
    lines.append(cur)
    return lines


def lp_text(problem: MilpProblem) -> str:
    names = mangle_names([v.name for v in problem.variables])
    rows = mangle_names([c.name for c in problem.constraints])
    lines = [f"\\ {problem.name}", "Minimize"]
    lines += _wrap(" obj:", _terms(problem.objective, names))
    lines.append("Subject To")
    for rname, con in zip(rows, problem.constraints):
        lines += _wrap(f" {rname}:", _terms(con.coefs, names), f"{con.sense} {_num(con.rhs)}")
    lines.append("Bounds")
    for name, v in zip(names, problem.variables):
        if v.lb == v.ub:
            lines.append(f" {name} = {_num(v.lb)}")
        elif v.lb == -math.inf and v.ub == math.inf:
            lines.append(f" {name} free")
        else:
            lines.append(f" {_num(v.lb)} <= {name} <= {_num(v.ub)}")
    binaries = [n for n, v in zip(names, problem.variables) if v.binary]
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp_file(problem: MilpProblem, path) -> Path:
    path = Path(path)
    path.write_text(lp_text(problem))
    return path


# parsing ------------------------------------------------------------------
_TOKEN = re.compile(
    r"<=|>=|=<|=>|=|[+-]|:"
    r"|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
    r"|[^\s+\-<>=:]+"
)


def _parse_float(tok: str) -> float:
    t = tok.lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return tok.lower() in ("inf", "infinity")
    return True


def _linear(tokens: list[str]) -> dict[str, float]:
    coefs: dict[str, float] = {}
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
        elif _is_number(tok):
            coef = float(tok)
        else:
            val = sign * (1.0 if coef is None else coef)
            coefs[tok] = coefs.get(tok, 0.0) + val
            sign, coef = 1.0, None
    return coefs


def parse_lp_text(text: str) -> MilpProblem:
    """Parse LP text in the subset produced by :func:`lp_text`."""
    section = None
    name = "problem"
    obj_lines: list[str] = []
    con_lines: list[tuple[int, str]] = []
    bound_lines: list[tuple[int, str]] = []
    binary_names: list[str] = []
    buf: list[str] = []
    buf_line = 0

    def flush():
        if buf:
            con_lines.append((buf_line, " ".join(buf)))
            buf.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            if lineno == 1:
                name = line[1:].strip() or name
            continue
        low = line.lower()
        if low in ("minimize", "minimise", "min"):
            section = "obj"
            continue
        if low in ("subject to", "st", "s.t."):
            section = "con"
            continue
        if low == "bounds":
            flush()
            section = "bounds"
            continue
        if low in ("binaries", "binary", "bin"):
            flush()
            section = "bin"
            continue
        if low == "end":
            flush()
            section = "end"
            continue
        if section == "obj":
            obj_lines.append(line)
        elif section == "con":
            if re.match(r"^[A-Za-z_][\w.]*:", line) and buf:
                flush()
            if not buf:
                buf_line = lineno
            buf.append(line)
        elif section == "bounds":
            bound_lines.append((lineno, line))
        elif section == "bin":
            binary_names.extend(line.split())
        else:
            raise LpFormatError(f"line {lineno}: content outside a section: {line!r}")

    # objective
    obj_text = " ".join(obj_lines)
    if ":" in obj_text:
        obj_text = obj_text.split(":", 1)[1]
    obj = _linear(_TOKEN.findall(obj_text))

    rows = []
    for lineno, text_row in con_lines:
        rname, body = text_row.split(":", 1) if ":" in text_row else (f"c{len(rows)}", text_row)
        toks = _TOKEN.findall(body)
        sense_pos = next((i for i, t in enumerate(toks) if t in ("<=", ">=", "=", "=<", "=>")), None)
        if sense_pos is None:
            raise LpFormatError(f"line {lineno}: row {rname.strip()!r} has no relation")
        sense = {"=<": LE, "=>": GE}.get(toks[sense_pos], toks[sense_pos])
        try:
            rhs = _parse_float("".join(toks[sense_pos + 1:]))
        except ValueError:
            raise LpFormatError(f"line {lineno}: row {rname.strip()!r} has no numeric right-hand side") from None
        rows.append((rname.strip(), _linear(toks[:sense_pos]), sense, rhs))

    bounds: dict[str, tuple[float, float]] = {}
    for lineno, line in bound_lines:
        parts = line.split()
        try:
            if len(parts) == 2 and parts[1].lower() == "free":
                bounds[parts[0]] = (-math.inf, math.inf)
            elif len(parts) == 3 and parts[1] == "=":
                v = _parse_float(parts[2])
                bounds[parts[0]] = (v, v)
            elif len(parts) == 5 and parts[1] == "<=" and parts[3] == "<=":
                bounds[parts[2]] = (_parse_float(parts[0]), _parse_float(parts[4]))
            else:
                raise ValueError
        except ValueError:
            raise LpFormatError(f"line {lineno}: unsupported bound {line!r}") from None

    order: list[str] = []
    seen = set()
    for nm in list(bounds) + list(obj) + [k for r in rows for k in r[1]] + binary_names:
        if nm not in seen:
            seen.add(nm)
            order.append(nm)
    p = MilpProblem(name)
    binset = set(binary_names)
    for nm in order:
        lo, hi = bounds.get(nm, (0.0, math.inf))
        p.add_var(nm, lo, hi, binary=nm in binset)
    for k, v in obj.items():
        p.objective[p.var_index(k)] = v
    for rname, coefs, sense, rhs in rows:
        p.add_constraint(rname, LinExpr({p.var_index(k): v for k, v in coefs.items()}), sense, rhs)
    return p


def read_lp_file(path) -> MilpProblem:
    return parse_lp_text(Path(path).read_text())
