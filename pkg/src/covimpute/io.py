"""CSV datasets and JSON run configuration.

CSV layout: mandatory header, UTF-8, ``\\n`` line endings. Columns are
``z,x_obs,y`` with optional oracle columns ``x_full,r_x``. A missing
``x_obs`` is written as an empty field. Reals use 17 significant digits so
a parse/serialize cycle reproduces the file byte for byte.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CovImputeError, InvalidConfig, ParseError
from .scenario import Dataset, ScenarioParams

BASE_COLUMNS = ("z", "x_obs", "y")
ORACLE_COLUMNS = ("x_full", "r_x")
DEFAULT_P_GRID = (0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85)


def format_real(value: float) -> str:
    return format(float(value), ".17g")


def dataset_to_csv(dataset: Dataset, oracle: bool = False) -> str:
    if oracle and dataset.x_full is None:
        raise InvalidConfig("oracle columns requested but dataset has no x_full")
    header = BASE_COLUMNS + (ORACLE_COLUMNS if oracle else ())
    lines = [",".join(header)]
    for i in range(dataset.n):
        x = "" if dataset.r_x[i] else format_real(dataset.x_obs[i])
        row = [str(int(dataset.z[i])), x, format_real(dataset.y[i])]
        if oracle:
            row += [format_real(dataset.x_full[i]), str(int(dataset.r_x[i]))]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_dataset(dataset: Dataset, path, oracle: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(dataset, oracle))


def _parse_real(text: str, row: int, col: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {col!r}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, column {col!r}: value must be finite")
    return value


def parse_dataset(text: str, na_token: Optional[str] = None) -> Dataset:
    """Parse CSV text into a ``Dataset``.

    ``x_obs`` cells that are empty (or equal ``na_token``) are missing. Rows
    with missing ``z`` or ``y`` are rejected.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty input: header row is mandatory") from None
    missing_cols = [c for c in BASE_COLUMNS if c not in header]
    if missing_cols:
        raise ParseError(f"header lacks required columns: {', '.join(missing_cols)}")
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header")
    idx = {name: header.index(name) for name in header}
    has_full = "x_full" in idx
    has_r = "r_x" in idx
    na = {""} if na_token is None else {"", na_token}

    z, x_obs, y, x_full, r_x = [], [], [], [], []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"row {line_no}: expected {len(header)} fields, found {len(row)}")
        cell = {name: row[i].strip() for name, i in idx.items()}
        for col in ("z", "y"):
            if cell[col] in na:
                raise ParseError(f"row {line_no}, column {col!r}: missing value (only x_obs may be missing)")
        zv = _parse_real(cell["z"], line_no, "z")
        if zv not in (0.0, 1.0):
            raise ParseError(f"row {line_no}, column 'z': expected 0 or 1, got {cell['z']!r}")
        z.append(int(zv))
        y.append(_parse_real(cell["y"], line_no, "y"))
        missing = cell["x_obs"] in na
        x_obs.append(math.nan if missing else _parse_real(cell["x_obs"], line_no, "x_obs"))
        if has_r:
            if cell["r_x"] not in ("0", "1"):
                raise ParseError(f"row {line_no}, column 'r_x': expected 0 or 1")
            if int(cell["r_x"]) != int(missing):
                raise ParseError(f"row {line_no}: r_x disagrees with x_obs missingness")
        r_x.append(int(missing))
        if has_full:
            x_full.append(_parse_real(cell["x_full"], line_no, "x_full"))

    if not z:
        raise ParseError("no data rows")
    try:
        return Dataset(
            z=np.array(z, dtype=np.int8),
            y=np.array(y),
            x_obs=np.array(x_obs),
            r_x=np.array(r_x, dtype=np.int8),
            x_full=np.array(x_full) if has_full else None,
        )
    except CovImputeError as exc:
        raise ParseError(str(exc)) from None


def read_dataset(path, na_token: Optional[str] = None) -> Dataset:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_dataset(text, na_token)


@dataclass
class RunConfig:
    """Validated settings shared by all subcommands.

    Scenario fields may appear nested under ``"scenario"`` or at the top level
    of the JSON file; any other key is rejected.
    """

    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    n: int = 1000
    seed: int = 1
    method: str = "det"
    m: int = 1
    bootstrap: int = 0
    p_grid: tuple = DEFAULT_P_GRID
    replications: int = 1000
    threads: int = 1
    oracle: bool = False
    na_token: Optional[str] = None

    def __post_init__(self):
        for name in ("n", "seed", "m", "bootstrap", "replications", "threads"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidConfig(f"{name} must be an integer, got {value!r}")
        if self.n < 1 or self.m < 1 or self.threads < 1:
            raise InvalidConfig("n, m and threads must be positive")
        if self.bootstrap < 0 or self.replications < 0:
            raise InvalidConfig("bootstrap and replications must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        if self.method not in ("det", "det-y", "stoc", "stoc-y"):
            raise InvalidConfig(f"unknown method {self.method!r}")
        grid = tuple(float(p) for p in self.p_grid)
        if not grid or any(not 0.0 < p < 1.0 for p in grid):
            raise InvalidConfig("every grid probability must lie strictly between 0 and 1")
        self.p_grid = grid

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise InvalidConfig("config must be a JSON object")
        run_fields = {f.name for f in dataclasses.fields(cls)} - {"scenario"}
        scenario_fields = {f.name for f in dataclasses.fields(ScenarioParams)}
        scenario = dict(data.get("scenario", {}))
        run = {}
        for key, value in data.items():
            if key == "scenario":
                continue
            if key in scenario_fields:
                scenario[key] = value
            elif key in run_fields:
                run[key] = value
            else:
                raise InvalidConfig(f"unknown config field {key!r}")
        try:
            params = ScenarioParams.from_dict(scenario)
        except CovImputeError as exc:
            raise InvalidConfig(str(exc)) from None
        return cls(scenario=params, **run)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(data)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    return value


def dumps_report(report: dict) -> str:
    """Deterministic JSON (non-finite floats become ``null``)."""
    return json.dumps(_json_safe(report), indent=2) + "\n"
