"""TOML run configuration for the command-line tool.

A configuration holds a ``[chain]`` table (or ``chain_file`` pointing to a
file with one) and optional ``[initial]``, ``[modulator]``, ``[sweep]`` and
``[output]`` tables::

    [chain]
    n_spins = 7
    field_magnitude = 5.0
    field_angle = "pi/4"
    coupling = 0.1
    dissipation_rate = [1e-3, 0, 0, 0, 0, 0, 1e-3]
    temperature = [10, 10, 10, 10, 10, 10, 5]

    [sweep]
    param = "Tb"
    values = [2, 5, 10]
    kappa_b = [0.0, 1e-3]

Fields, couplings, temperatures and dissipation rates are in units of
``energy_unit`` (default 1).  Angles accept numbers or expressions in
``pi`` such as ``"pi/4"``.
"""
from __future__ import annotations

import ast
import math
import operator
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, SpinlindError
from .model import ChainSpec
from .transport import ModulatorScenario

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

FORMATS = ("csv", "json")
SWEEP_PARAMS = ("Tb", "theta")
INITIAL_STATES = ("components", "uniform")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_angle(value):
    """Angle from a number or an arithmetic expression in ``pi``."""
    if isinstance(value, bool):
        raise ValueError("angle cannot be a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"angle must be a number or string, got {type(value).__name__}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported angle expression {value!r}")

    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"unsupported angle expression {value!r}") from exc
    return ev(tree)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.

    ``initial`` is ``'components'`` (equal subspace weights, the default),
    ``'uniform'``, a ``{mu: 'e'|'g'}`` mapping or a tuple of component
    fractions.  ``initial_given`` records whether the file set it.
    ``format`` is ``None`` when unset, leaving the choice to the command
    (JSON for ``solve``, CSV otherwise).
    """

    spec: ChainSpec
    chain_path: str | None = None
    energy_unit: float = 1.0
    initial: object = "components"
    initial_given: bool = False
    scenario: str = "s2"
    thetas: tuple | None = None
    points: int = 25
    sweep_param: str = "Tb"
    sweep_values: tuple = ()
    kappa_b: tuple = ()
    chain_lengths: tuple = ()
    out: str | None = None
    format: str | None = None
    workers: int = 1
    source: str | None = field(default=None, compare=False)

    def modulator_scenario(self):
        if self.thetas is not None:
            base = ModulatorScenario.named(self.scenario, 2)
            return ModulatorScenario(base.swept, self.thetas)
        return ModulatorScenario.named(self.scenario, self.points)

    def to_dict(self):
        """Plain representation whose values re-parse to the same config."""
        out = {"chain": self.spec.to_dict(), "energy_unit": self.energy_unit,
               "output": {"workers": self.workers}}
        if self.format is not None:
            out["output"]["format"] = self.format
        if self.out is not None:
            out["output"]["path"] = self.out
        init = self.initial
        if isinstance(init, dict):
            out["initial"] = {"spins": {str(k): v for k, v in init.items()}}
        elif isinstance(init, tuple):
            out["initial"] = {"fractions": list(init)}
        else:
            out["initial"] = {"state": init}
        mod = {"scenario": self.scenario, "points": self.points}
        if self.thetas is not None:
            mod["thetas"] = list(self.thetas)
        out["modulator"] = mod
        sweep = {"param": self.sweep_param}
        if self.sweep_values:
            sweep["values"] = list(self.sweep_values)
        if self.kappa_b:
            sweep["kappa_b"] = list(self.kappa_b)
        if self.chain_lengths:
            sweep["chain_lengths"] = list(self.chain_lengths)
        out["sweep"] = sweep
        return out


class _Locator:
    """Finds the line of ``key`` inside a ``[section]`` of the raw text."""

    def __init__(self, text, source):
        self.lines = text.splitlines()
        self.source = source

    def line(self, section, key):
        current = None
        for i, raw in enumerate(self.lines, 1):
            s = raw.strip()
            if s.startswith("[") and not s.startswith("[["):
                current = s.strip("[]").strip()
                continue
            if current == section and s.split("=", 1)[0].strip() == key:
                return i
        return None

    def header(self, section):
        for i, raw in enumerate(self.lines, 1):
            if raw.strip().strip("[]").strip() == section and raw.strip().startswith("["):
                return i
        return None

    def error(self, message, section, key):
        """ConfigError at ``key``, or at the section header when the key is absent."""
        name = f"{section}.{key}" if section else key
        line = self.line(section, key)
        if line is None and section:
            line = self.header(section)
        return ConfigError(message, field=name, line=line)


def _load(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}",
                          line=getattr(exc, "lineno", None)) from exc
    return text, data


def _as_list(value, loc, section, key, conv=float):
    if isinstance(value, dict):
        try:
            grid = np.linspace(float(value["start"]), float(value["stop"]), int(value["num"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise loc.error("range tables need numeric start, stop and num", section, key) from exc
        return tuple(float(x) for x in grid)
    values = value if isinstance(value, list) else [value]
    try:
        return tuple(conv(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise loc.error(f"{key}: {exc}", section, key) from exc


def _monotone(values, loc, section, key):
    if not values:
        raise loc.error(f"{key} grid is empty", section, key)
    d = np.diff(values)
    if d.size and not (np.all(d > 0) or np.all(d < 0)):
        raise loc.error(f"{key} grid must be strictly monotone", section, key)
    return values


def _chain(table, loc, section, unit):
    if "n_spins" not in table:
        raise loc.error("n_spins is required", section, "n_spins")
    n = table["n_spins"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise loc.error("n_spins must be an integer", section, "n_spins")
    kw = {}
    for key, default in (("field_magnitude", 1.0), ("coupling", 0.0),
                         ("dissipation_rate", 0.0)):
        raw = table.get(key, default)
        vals = _as_list(raw, loc, section, key)
        kw[key] = tuple(v * unit for v in vals) if isinstance(raw, list) else vals[0] * unit
    raw = table.get("field_angle", 0.0)
    vals = _as_list(raw, loc, section, "field_angle", parse_angle)
    kw["field_angle"] = vals if isinstance(raw, list) else vals[0]
    if "temperature" in table:
        raw = table["temperature"]
        vals = _as_list(raw, loc, section, "temperature")
        kw["temperature"] = tuple(v * unit for v in vals) if isinstance(raw, list) else vals[0] * unit
    else:
        kw["temperature"] = None
    unknown = set(table) - {"n_spins", "field_magnitude", "field_angle", "coupling",
                            "dissipation_rate", "temperature"}
    if unknown:
        key = sorted(unknown)[0]
        raise loc.error(f"unknown chain field {key!r}", section, key)
    try:
        return ChainSpec(n, kw["field_magnitude"], kw["field_angle"], kw["coupling"],
                         kw["dissipation_rate"], kw["temperature"])
    except SpinlindError as exc:
        key = _guess_field(str(exc))
        raise loc.error(str(exc), section, key) from exc


def _guess_field(message):
    for key in ("temperature", "dissipation_rate", "coupling", "field_angle",
                "field_magnitude", "n_spins"):
        if key.replace("_", " ") in message or key in message:
            return key
    if "angle" in message:
        return "field_angle"
    if "kappa" in message or "dissipation" in message:
        return "dissipation_rate"
    return "n_spins"


def _initial(table, loc, n):
    if not table:
        return "components", False
    keys = set(table) & {"state", "spins", "fractions"}
    if len(keys) != 1:
        raise loc.error("set exactly one of state, spins or fractions", "initial", "state")
    if "state" in table:
        if table["state"] not in INITIAL_STATES:
            raise loc.error(f"state must be one of {INITIAL_STATES}", "initial", "state")
        return table["state"], True
    if "spins" in table:
        spins = table["spins"]
        if not isinstance(spins, dict):
            raise loc.error("spins must be a table {mu = 'e'|'g'}", "initial", "spins")
        out = {}
        for k, v in spins.items():
            try:
                mu = int(k)
            except ValueError as exc:
                raise loc.error(f"spin key {k!r} is not an integer", "initial", "spins") from exc
            if not 1 <= mu <= n:
                raise loc.error(f"spin {mu} outside a chain of {n}", "initial", "spins")
            if v not in ("e", "g"):
                raise loc.error(f"spin {mu} state must be 'e' or 'g'", "initial", "spins")
            out[mu] = v
        return dict(sorted(out.items())), True
    fr = _as_list(table["fractions"], loc, "initial", "fractions")
    if min(fr) < 0 or abs(sum(fr) - 1.0) > 1e-10:
        raise loc.error("fractions must be nonnegative and sum to one", "initial", "fractions")
    return fr, True


def parse_config(path):
    """Read and validate a TOML run configuration.

    Raises
    ------
    ConfigError
        With the offending field and, when it can be located, the line.
    """
    text, data = _load(path)
    loc = _Locator(text, str(path))
    unit = data.get("energy_unit", 1.0)
    if isinstance(unit, bool) or not isinstance(unit, (int, float)) or not unit > 0:
        raise loc.error("energy_unit must be a positive number", None, "energy_unit")
    unit = float(unit)
    chain_path = None
    if "chain_file" in data:
        if "chain" in data:
            raise loc.error("give either [chain] or chain_file, not both", None, "chain_file")
        chain_path = str((Path(path).parent / data["chain_file"]).resolve())
        ctext, cdata = _load(chain_path)
        cloc = _Locator(ctext, chain_path)
        if "chain" in cdata:
            spec = _chain(cdata["chain"], cloc, "chain", unit)
        else:
            spec = _chain(cdata, cloc, None, unit)
    elif "chain" in data:
        spec = _chain(data["chain"], loc, "chain", unit)
    else:
        raise ConfigError("configuration needs a [chain] table or chain_file", field="chain")
    initial, given = _initial(data.get("initial", {}), loc, spec.n_spins)

    mod = data.get("modulator", {})
    scenario = mod.get("scenario", "s2")
    if scenario not in ("s2", "s12"):
        raise loc.error("scenario must be 's2' or 's12'", "modulator", "scenario")
    points = mod.get("points", 25)
    if isinstance(points, bool) or not isinstance(points, int) or points < 1:
        raise loc.error("points must be a positive integer", "modulator", "points")
    thetas = None
    if "thetas" in mod:
        thetas = _monotone(_as_list(mod["thetas"], loc, "modulator", "thetas", parse_angle),
                           loc, "modulator", "thetas")

    sw = data.get("sweep", {})
    param = sw.get("param", "Tb")
    if param not in SWEEP_PARAMS:
        raise loc.error(f"param must be one of {SWEEP_PARAMS}", "sweep", "param")
    conv = parse_angle if param == "theta" else float
    values = ()
    if "values" in sw:
        values = _monotone(_as_list(sw["values"], loc, "sweep", "values", conv),
                           loc, "sweep", "values")
    kappa_b = ()
    if "kappa_b" in sw:
        kappa_b = _monotone(tuple(k * unit for k in _as_list(sw["kappa_b"], loc, "sweep", "kappa_b")),
                            loc, "sweep", "kappa_b")
    if param == "Tb":
        values = tuple(v * unit for v in values)
    lengths = ()
    if "chain_lengths" in sw:
        lengths = _monotone(_as_list(sw["chain_lengths"], loc, "sweep", "chain_lengths", int),
                            loc, "sweep", "chain_lengths")

    outt = data.get("output", {})
    fmt = outt.get("format")
    if fmt is not None and fmt not in FORMATS:
        raise loc.error(f"format must be one of {FORMATS}", "output", "format")
    workers = outt.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise loc.error("workers must be a positive integer", "output", "workers")
    out = outt.get("path")
    if out is not None:
        out = str(Path(path).parent / out) if not os.path.isabs(out) else out
    return RunConfig(spec, chain_path, unit, initial, given, scenario, thetas, points,
                     param, values, kappa_b, lengths, out, fmt, workers, str(path))
