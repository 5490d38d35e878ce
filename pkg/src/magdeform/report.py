"""Experiment configuration, report rows and the CSV/JSON writers."""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

__all__ = [
    "EXPERIMENTS",
    "MODES",
    "STATUSES",
    "ConfigError",
    "ExperimentConfig",
    "ReportRow",
    "ExperimentResult",
    "load_config",
    "sweep_table",
]

EXPERIMENTS = ("flat-average", "ho-average", "zonal-average", "restriction", "admissibility", "sup-scaling")
STATUSES = ("ok", "warning:out-of-band", "error:resolution")
CSV_COLUMNS = ("experiment", "hbar", "x", "value", "oracle", "rel_gap", "status")
# first entry is the default mode of each experiment
MODES = {
    "flat-average": ("identity",),
    "ho-average": ("average", "triangle", "invariants"),
    "zonal-average": ("average", "consistency"),
    "restriction": ("fubini",),
    "admissibility": ("families",),
    "sup-scaling": ("oscillator", "zonal"),
}


class ConfigError(ValueError):
    """The experiment configuration is unreadable or violates a precondition."""


@dataclass
class ExperimentConfig:
    """Flat key-value description of one experiment run.

    Unknown keys are rejected.  ``x_samples`` may be given explicitly or via
    ``x_min``/``x_max``/``x_count``; zonal runs list ``degrees`` instead of
    ``hbar_list`` (``hbar = (n(n+1))^{-1/2}``).
    """

    experiment: str
    mode: str = None
    hbar_list: list = field(default_factory=list)
    degrees: list = field(default_factory=list)
    t0: float = 0.5
    epsilon: float = 0.5
    grid_count: int = 2048
    half_width: float = 10.0
    u_nodes: int = 24
    disk_radial: int = 64
    disk_angular: int = 96
    x_samples: list = None
    x_min: float = None
    x_max: float = None
    x_count: int = None
    chi_inner: float = 1.0
    chi_outer: float = 2.0
    omega_exponent: float = 0.25
    c0: float = 4.0
    models: list = field(default_factory=lambda: ["oscillator", "flat2d"])
    families: list = field(default_factory=lambda: ["constant", "degenerate", "overcomplete"])
    u_values: list = field(default_factory=lambda: [0.0, 0.25, -0.25])
    max_degree: int = 400
    tolerance: float = None
    band_bound: float = 2.0
    report: str = "report.csv"
    summary: str = "summary.json"
    plot: str = "plot.dat"

    def __post_init__(self):
        self._coerce()
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        allowed = MODES[self.experiment]
        self.mode = allowed[0] if self.mode is None else self.mode
        if self.mode not in allowed:
            raise ConfigError(f"mode {self.mode!r} is not one of {allowed} for {self.experiment}")
        if self.degrees:
            if any(int(n) != n or n < 1 for n in self.degrees):
                raise ConfigError("degrees must be positive integers")
            self.degrees = [int(n) for n in self.degrees]
            if not self.hbar_list:
                self.hbar_list = [1.0 / math.sqrt(n * (n + 1)) for n in self.degrees]
        if any(not h > 0 for h in self.hbar_list):
            raise ConfigError("hbar_list entries must be positive numbers")
        if any(b >= a for a, b in zip(self.hbar_list, self.hbar_list[1:])):
            raise ConfigError("hbar_list must be strictly decreasing")
        if not self.t0 > 0:
            raise ConfigError("t0 must be positive")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.grid_count < 8 or self.u_nodes < 1:
            raise ConfigError("grid_count >= 8 and u_nodes >= 1 required")
        if not 0 < self.omega_exponent:
            raise ConfigError("omega_exponent must be positive")
        if self.x_samples is None and self.x_count is not None:
            if self.x_min is None or self.x_max is None:
                raise ConfigError("x_count needs x_min and x_max")
            self.x_samples = np.linspace(self.x_min, self.x_max, int(self.x_count)).tolist()
        self.x_samples = [] if self.x_samples is None else [float(v) for v in self.x_samples]

    def _coerce(self):
        # YAML 1.1 reads "1e-2" as a string; accept it as a number
        def num(name, value, kind):
            try:
                return kind(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{name} must be a number, got {value!r}") from None

        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.type is float:
                setattr(self, f.name, num(f.name, value, float))
            elif f.type is int:
                if isinstance(value, float) and not value.is_integer():
                    raise ConfigError(f"{f.name} must be an integer")
                setattr(self, f.name, num(f.name, value, int))
        for name in ("hbar_list", "u_values", "x_samples"):
            value = getattr(self, name)
            if value is not None:
                if not isinstance(value, (list, tuple)):
                    raise ConfigError(f"{name} must be a list")
                setattr(self, name, [num(name, v, float) for v in value])
        for name in ("models", "families"):
            if not isinstance(getattr(self, name), (list, tuple)):
                raise ConfigError(f"{name} must be a list")

    @classmethod
    def from_mapping(cls, data, experiment=None):
        data = dict(data or {})
        if experiment is not None:
            given = data.setdefault("experiment", experiment)
            if given != experiment:
                raise ConfigError(f"config is for {given!r}, subcommand is {experiment!r}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config must name an experiment")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        return asdict(self)


def load_config(path, experiment=None):
    """Read a UTF-8 ``key: value`` file into an :class:`ExperimentConfig`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
        data = yaml.safe_load(text)
    except (OSError, UnicodeDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config must be a flat key-value mapping")
    return ExperimentConfig.from_mapping(data, experiment)


@dataclass
class ReportRow:
    experiment: str
    hbar: float = None
    x: float = None
    value: float = None
    oracle: float = None
    rel_gap: float = None
    status: str = "ok"

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"invalid status {self.status!r}")

    def cells(self):
        return [self.experiment] + [_fmt(getattr(self, c)) for c in CSV_COLUMNS[1:-1]] + [self.status]


@dataclass
class ExperimentResult:
    experiment: str
    rows: list
    summary: dict

    @property
    def exit_code(self):
        return 2 if any(r.status == "error:resolution" for r in self.rows) else 0


def _fmt(value):
    if value is None:
        return "n/a"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def sweep_table(results, out_dir, report="report.csv", summary="summary.json", plot="plot.dat"):
    """Write ``report.csv``, ``summary.json`` and a gnuplot-ready ``plot.dat``.

    ``results`` is one :class:`ExperimentResult` or a list of them.  Returns
    the three paths.
    """
    results = [results] if isinstance(results, ExperimentResult) else list(results)
    if not results:
        raise ValueError("sweep_table needs at least one result")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for res in results:
        for row in res.rows:
            writer.writerow(row.cells())
    paths = (out / report, out / summary, out / plot)
    paths[0].write_bytes(buf.getvalue().encode("utf-8"))
    payload = {res.experiment: _jsonable(res.summary) for res in results}
    paths[1].write_bytes((json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    lines = ["# gnuplot: plot 'plot.dat' using 2:4 (hbar vs value); columns as in report.csv",
             "# " + " ".join(CSV_COLUMNS)]
    for res in results:
        for row in res.rows:
            cells = row.cells()
            lines.append(" ".join(c if c != "n/a" else "NaN" for c in cells))
    paths[2].write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    return paths
