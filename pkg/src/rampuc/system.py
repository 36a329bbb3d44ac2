"""Domain types for generators, net-load series and study configuration, plus study-file I/O.

Study files are JSON documents with a versioned header; see ``docs/study-format.md``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence

FAST = "fast-start"
SLOW = "slow-start"
MUST_RUN = "must-run"
KINDS = (FAST, SLOW, MUST_RUN)

CONVENTIONAL = "conventional"
PROPOSED = "proposed"
FORMULATIONS = (CONVENTIONAL, PROPOSED)

FORMAT_NAME = "rampuc-study"
FORMAT_VERSION = 1


class StudyError(Exception):
    """Base class for study-file problems."""


class StudyFormatError(StudyError):
    """The file cannot be parsed or does not follow the schema."""


class InvariantError(StudyError):
    """A value parses but violates a domain invariant."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class TrajectoryError(InvariantError):
    pass


@dataclass(frozen=True)
class Generator:
    id: str
    kind: str
    no_load_cost: float  # $/period
    linear_cost: float  # $/MWh
    startup_cost: float  # $
    p_max: float  # MW
    p_min: float  # MW
    ramp_rate: float  # MW/period
    startup_ramp: float  # MW/period
    shutdown_ramp: float  # MW/period
    startup_trajectory: tuple[float, ...] = ()
    shutdown_trajectory: tuple[float, ...] = ()
    min_up: int = 1
    min_down: int = 1

    def __post_init__(self):
        object.__setattr__(self, "startup_trajectory", tuple(float(v) for v in self.startup_trajectory))
        object.__setattr__(self, "shutdown_trajectory", tuple(float(v) for v in self.shutdown_trajectory))
        f = f"generator {self.id}"
        if self.kind not in KINDS:
            raise InvariantError(f"{f}.class", f"unknown class {self.kind!r}, expected one of {KINDS}")
        if not 0 <= self.p_min <= self.p_max:
            raise InvariantError(f"{f}.p_min", f"need 0 <= p_min <= p_max, got p_min={self.p_min}, p_max={self.p_max}")
        for name in ("ramp_rate", "startup_ramp", "shutdown_ramp"):
            if getattr(self, name) < 0:
                raise InvariantError(f"{f}.{name}", "must be non-negative")
        for name in ("min_up", "min_down"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise InvariantError(f"{f}.{name}", "must be a positive integer")
        if self.kind == SLOW:
            validate_trajectory(self)
        elif self.startup_trajectory or self.shutdown_trajectory:
            raise InvariantError(f"{f}.startup_trajectory", f"{self.kind} units carry no trajectories")
        if self.kind == MUST_RUN and self.p_min != self.p_max:
            raise InvariantError(f"{f}.p_min", "must-run units need p_min == p_max")

    @property
    def is_slow(self) -> bool:
        return self.kind == SLOW

    @property
    def su_periods(self) -> int:
        return len(self.startup_trajectory)

    @property
    def sd_periods(self) -> int:
        return len(self.shutdown_trajectory)


def validate_trajectory(g: Generator) -> None:
    """Raise TrajectoryError unless ``g`` has well-formed startup/shutdown trajectories.

    Startup points must be nondecreasing, shutdown points nonincreasing, and
    every point must lie in (0, p_min].
    """
    f = f"generator {g.id}"
    for label, traj, step_ok in (
        ("startup_trajectory", g.startup_trajectory, lambda a, b: b >= a),
        ("shutdown_trajectory", g.shutdown_trajectory, lambda a, b: b <= a),
    ):
        if not traj:
            raise TrajectoryError(f"{f}.{label}", "slow-start units need a nonempty trajectory")
        for k, v in enumerate(traj, 1):
            if not 0 < v <= g.p_min:
                raise TrajectoryError(f"{f}.{label}[{k}]", f"point {v} MW outside (0, p_min={g.p_min}]")
        for k in range(1, len(traj)):
            if not step_ok(traj[k - 1], traj[k]):
                raise TrajectoryError(
                    f"{f}.{label}[{k}->{k + 1}]",
                    f"segment {traj[k - 1]} -> {traj[k]} MW breaks the required monotone shape",
                )


@dataclass(frozen=True)
class NetLoadForecast:
    """Net load over consecutive periods starting at ``start_period``.

    When ``realized_first`` is set the first value is the realized net load of
    the current period and the rest are forecasts.
    """

    values: tuple[float, ...]
    start_period: int = 1
    realized_first: bool = True
    demand: tuple[float, ...] | None = None
    wind: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 2:
            raise InvariantError("series.net_load", "need at least two periods")
        if any(v < 0 for v in self.values):
            raise InvariantError("series.net_load", "net load must be non-negative")

    def __len__(self):
        return len(self.values)

    @property
    def periods(self) -> range:
        return range(self.start_period, self.start_period + len(self.values))


def net_load(demand: Sequence[float], wind: Sequence[float], start_period: int = 1,
             realized_first: bool = True) -> NetLoadForecast:
    """Demand minus wind, clamped at zero."""
    if len(demand) != len(wind):
        raise InvariantError("series.wind", f"length {len(wind)} does not match demand length {len(demand)}")
    values = tuple(max(float(d) - float(w), 0.0) for d, w in zip(demand, wind))
    return NetLoadForecast(values, start_period, realized_first,
                           tuple(float(d) for d in demand), tuple(float(w) for w in wind))


@dataclass(frozen=True)
class BoundaryCondition:
    """State inherited by a window starting at ``start_period``.

    ``initial_power`` is the dispatch in ``start_period - 1``;
    ``fixed_commitments`` maps (generator, period) to an already-decided on/off bit
    and must include ``start_period - 1`` for every generator.
    """

    start_period: int
    initial_power: dict[str, float]
    fixed_commitments: dict[tuple[str, int], int] = field(default_factory=dict)

    def commitment(self, gid: str, period: int) -> int | None:
        return self.fixed_commitments.get((gid, period))

    def history(self, gid: str, period: int) -> int:
        """On/off bit at a past period, extrapolating the earliest known bit backwards."""
        v = self.fixed_commitments.get((gid, period))
        if v is not None:
            return v
        known = sorted(t for (g, t) in self.fixed_commitments if g == gid and t < self.start_period)
        if not known:
            raise InvariantError(f"boundary.commitments.{gid}", "no commitment history")
        if period < known[0]:
            return self.fixed_commitments[(gid, known[0])]
        prior = [t for t in known if t <= period]
        return self.fixed_commitments[(gid, prior[-1])]

    def validate(self, generators: Sequence[Generator]) -> None:
        ids = {g.id for g in generators}
        for gid in self.initial_power:
            if gid not in ids:
                raise InvariantError(f"boundary.initial_power.{gid}", "unknown generator")
        for gid, _ in self.fixed_commitments:
            if gid not in ids:
                raise InvariantError(f"boundary.commitments.{gid}", "unknown generator")
        for (gid, t), v in self.fixed_commitments.items():
            if v not in (0, 1):
                raise InvariantError(f"boundary.commitments.{gid}.{t}", "commitment must be 0 or 1")
        for g in generators:
            if g.id not in self.initial_power:
                raise InvariantError(f"boundary.initial_power.{g.id}", "missing initial power")
            p0 = self.initial_power[g.id]
            if not 0 <= p0 <= g.p_max + 1e-9:
                raise InvariantError(f"boundary.initial_power.{g.id}", f"{p0} MW outside [0, p_max={g.p_max}]")
            if (g.id, self.start_period - 1) not in self.fixed_commitments:
                raise InvariantError(f"boundary.commitments.{g.id}",
                                     f"missing on/off state for period {self.start_period - 1}")
            if g.kind == MUST_RUN and any(v == 0 for (gid, _), v in self.fixed_commitments.items() if gid == g.id):
                raise InvariantError(f"boundary.commitments.{g.id}", "must-run unit cannot be off")
            self._check_min_times(g)

    def _check_min_times(self, g: Generator) -> None:
        periods = sorted(t for (gid, t) in self.fixed_commitments if gid == g.id)
        bits = [self.fixed_commitments[(g.id, t)] for t in periods]
        # runs strictly inside the known record must honour min up/down
        run_start = 0
        for i in range(1, len(bits) + 1):
            if i == len(bits) or bits[i] != bits[run_start] or periods[i] != periods[i - 1] + 1:
                closed = i < len(bits) and periods[i] == periods[i - 1] + 1
                opened = run_start > 0 and periods[run_start] == periods[run_start - 1] + 1
                if closed and opened:
                    need = g.min_up if bits[run_start] else g.min_down
                    if i - run_start < need:
                        raise InvariantError(f"boundary.commitments.{g.id}",
                                             f"run of {i - run_start} periods at state {bits[run_start]} "
                                             f"breaks minimum {'up' if bits[run_start] else 'down'} time {need}")
                run_start = i


@dataclass(frozen=True)
class StudyConfig:
    horizon: int = 4
    period_minutes: int = 15
    voll: float = 9000.0
    alpha_multiplier: float = 1.0
    mip_gap: float = 1e-3
    formulation: str = CONVENTIONAL
    sigma_mw: float | None = None  # fixed net-load error sigma; overrides the demand/wind rule
    installed_wind: float = 0.0
    sigma_demand_frac: float = 0.01
    sigma_wind_frac: float = 0.04
    window_length: int = 4
    rolling_forecasts: tuple[tuple[float, ...], ...] = ()
    backend: str = "builtin"

    def __post_init__(self):
        object.__setattr__(self, "rolling_forecasts",
                           tuple(tuple(float(v) for v in row) for row in self.rolling_forecasts))
        if not self.voll > 0:
            raise InvariantError("config.voll", "must be positive")
        if not 0 < self.mip_gap < 1:
            raise InvariantError("config.mip_gap", "must lie in (0, 1)")
        if self.alpha_multiplier < 0:
            raise InvariantError("config.alpha_multiplier", "must be non-negative")
        if self.formulation not in FORMULATIONS:
            raise InvariantError("config.formulation", f"expected one of {FORMULATIONS}")
        if self.horizon < 2:
            raise InvariantError("config.horizon", "need at least two periods")
        if self.window_length < 2:
            raise InvariantError("config.window_length", "need at least two periods")
        if self.sigma_mw is not None and self.sigma_mw < 0:
            raise InvariantError("config.sigma_mw", "must be non-negative")
        if self.backend not in ("builtin", "external"):
            raise InvariantError("config.backend", "expected builtin or external")


class Study(NamedTuple):
    generators: tuple[Generator, ...]
    forecast: NetLoadForecast
    boundary: BoundaryCondition
    config: StudyConfig

    def generator(self, gid: str) -> Generator:
        for g in self.generators:
            if g.id == gid:
                return g
        raise KeyError(gid)


# ---------------------------------------------------------------------------
# file I/O

_GEN_FIELDS = [f.name for f in fields(Generator)]
_CONFIG_FIELDS = {f.name for f in fields(StudyConfig)}


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise StudyFormatError(f"{where}: expected an object")
    if key not in d:
        raise StudyFormatError(f"{where}.{key}: missing field")
    return d[key]


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise StudyFormatError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _numbers(v, where: str) -> list[float]:
    if not isinstance(v, list):
        raise StudyFormatError(f"{where}: expected a list of numbers")
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]


def parse_study(doc: dict, source: str = "<study>") -> Study:
    if not isinstance(doc, dict):
        raise StudyFormatError(f"{source}: top level must be an object")
    if doc.get("format") != FORMAT_NAME:
        raise StudyFormatError(f"{source}: format must be {FORMAT_NAME!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise StudyFormatError(f"{source}: unsupported version {doc.get('version')!r}")

    gens = []
    raw_gens = _need(doc, "generators", "study")
    if not isinstance(raw_gens, list) or not raw_gens:
        raise StudyFormatError("study.generators: expected a nonempty list")
    for i, rg in enumerate(raw_gens):
        where = f"generators[{i}]"
        kw = {"id": str(_need(rg, "id", where)), "kind": _need(rg, "class", where)}
        for name in ("no_load_cost", "linear_cost", "startup_cost", "p_max", "p_min",
                     "ramp_rate", "startup_ramp", "shutdown_ramp"):
            kw[name] = _number(_need(rg, name, where), f"{where}.{name}")
        for name in ("startup_trajectory", "shutdown_trajectory"):
            kw[name] = tuple(_numbers(rg.get(name, []), f"{where}.{name}"))
        for name in ("min_up", "min_down"):
            v = rg.get(name, 1)
            if isinstance(v, bool) or not isinstance(v, int):
                raise StudyFormatError(f"{where}.{name}: expected an integer")
            kw[name] = v
        unknown = set(rg) - set(_GEN_FIELDS) - {"class"}
        if unknown:
            raise StudyFormatError(f"{where}: unknown fields {sorted(unknown)}")
        gens.append(Generator(**kw))
    ids = [g.id for g in gens]
    if len(set(ids)) != len(ids):
        raise InvariantError("generators", "duplicate generator ids")

    series = _need(doc, "series", "study")
    start = int(series.get("start_period", 1))
    realized_first = bool(series.get("realized_first", True))
    if "net_load" in series:
        forecast = NetLoadForecast(tuple(_numbers(series["net_load"], "series.net_load")), start, realized_first)
    else:
        demand = _numbers(_need(series, "demand", "series"), "series.demand")
        wind = _numbers(_need(series, "wind", "series"), "series.wind")
        forecast = net_load(demand, wind, start, realized_first)

    cfg_doc = dict(doc.get("config", {}))
    unknown = set(cfg_doc) - _CONFIG_FIELDS
    if unknown:
        raise StudyFormatError(f"config: unknown fields {sorted(unknown)}")
    if "rolling_forecasts" in cfg_doc:
        cfg_doc["rolling_forecasts"] = tuple(
            tuple(_numbers(row, f"config.rolling_forecasts[{i}]")) for i, row in enumerate(cfg_doc["rolling_forecasts"]))
    config = StudyConfig(**cfg_doc)

    bdoc = _need(doc, "boundary", "study")
    initial = {str(k): _number(v, f"boundary.initial_power.{k}") for k, v in _need(bdoc, "initial_power", "boundary").items()}
    fixed = {}
    for gid, per in bdoc.get("commitments", {}).items():
        for t, bit in per.items():
            try:
                fixed[(str(gid), int(t))] = int(bit)
            except (TypeError, ValueError):
                raise StudyFormatError(f"boundary.commitments.{gid}.{t}: expected integer period and bit") from None
    for g in gens:
        if g.kind == MUST_RUN:
            fixed.setdefault((g.id, start - 1), 1)
    boundary = BoundaryCondition(start, initial, fixed)
    boundary.validate(gens)
    return Study(tuple(gens), forecast, boundary, config)


def load_system(path) -> Study:
    """Read and validate a study file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StudyFormatError(f"{path}: cannot read ({exc.strerror or exc})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StudyFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_study(doc, str(path))


def study_document(study: Study, name: str = "study") -> dict:
    gens = []
    for g in study.generators:
        d = asdict(g)
        d["class"] = d.pop("kind")
        d["startup_trajectory"] = list(g.startup_trajectory)
        d["shutdown_trajectory"] = list(g.shutdown_trajectory)
        gens.append({"id": d.pop("id"), "class": d.pop("class"), **d})
    fc = study.forecast
    series: dict = {"start_period": fc.start_period, "realized_first": fc.realized_first}
    if fc.demand is not None:
        series["demand"] = list(fc.demand)
        series["wind"] = list(fc.wind)
    else:
        series["net_load"] = list(fc.values)
    cfg = asdict(study.config)
    cfg["rolling_forecasts"] = [list(r) for r in study.config.rolling_forecasts]
    commitments: dict[str, dict[str, int]] = {}
    for (gid, t), v in sorted(study.boundary.fixed_commitments.items()):
        commitments.setdefault(gid, {})[str(t)] = v
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "name": name,
        "config": cfg,
        "generators": gens,
        "series": series,
        "boundary": {"initial_power": dict(study.boundary.initial_power), "commitments": commitments},
    }


def dump_system(study: Study, path, name: str = "study") -> Path:
    path = Path(path)
    path.write_text(json.dumps(study_document(study, name), indent=1) + "\n")
    return path


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("rampuc") / "data" / name))


def toy_study() -> Study:
    return load_system(fixture_path("toy.json"))


def ieee118_study() -> Study:
    return load_system(fixture_path("ieee118_synthetic.json"))


def with_config(study: Study, **changes) -> Study:
    return study._replace(config=replace(study.config, **changes))
