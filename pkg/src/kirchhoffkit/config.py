"""Run configuration: strict JSON with defaults and range checks."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import ConfigError, KirchhoffError
from .liepoisson import KirchhoffModel, build_model, _decode_param

COMMANDS = ("simulate", "painleve", "perturb", "monodromy", "lax-check", "e4-check", "all")
PRECISIONS = ("double", "extended")
TOL_RANGE = (1e-14, 1e-3)
SEED_RANGE = (0, 2**63 - 1)

TOP_KEYS = ("command", "model", "numeric", "output", "options")
NUMERIC_KEYS = ("tol", "seed", "precision")
OUTPUT_KEYS = ("dir", "report", "csv")
OPTION_KEYS = {
    "simulate": ("x0", "path", "circle", "sample_ds"),
    "painleve": ("n_starts", "order", "expect"),
    "perturb": ("alpha", "beta", "m3", "which", "fit"),
    "monodromy": ("alpha", "beta", "radius", "which"),
    "lax-check": ("x0", "lambdas", "duration", "q1"),
    "e4-check": ("n_points", "n_starts", "duration", "B"),
    "all": (),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: dict = field(default_factory=dict)
    tol: float = 1e-10
    seed: int = 42
    precision: str = "double"
    out_dir: str = "."
    report: str | None = None
    csv: str | None = None
    options: dict = field(default_factory=dict)

    @property
    def report_name(self) -> str:
        return self.report or f"{self.command}.json"

    def build_model(self) -> KirchhoffModel:
        params = {k: _decode_param(v) if isinstance(v, list) else v for k, v in self.model.items() if k != "case"}
        return build_model(self.model["case"], **params)

    def to_dict(self) -> dict:
        d = asdict(self)
        out = {
            "command": d["command"],
            "numeric": {"tol": d["tol"], "seed": d["seed"], "precision": d["precision"]},
            "output": {"dir": d["out_dir"]},
            "options": d["options"],
        }
        if d["model"]:
            out["model"] = d["model"]
        if d["report"] is not None:
            out["output"]["report"] = d["report"]
        if d["csv"] is not None:
            out["output"]["csv"] = d["csv"]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _section(data: dict, name: str, keys) -> dict:
    sec = data.get(name, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name} must be an object", key=name)
    for k in sec:
        if k not in keys:
            raise ConfigError(f"unknown key {name}.{k}", key=f"{name}.{k}")
    return sec


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a JSON run configuration.

    ``command`` (from the command line) overrides the file's ``command``.
    """
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    for k in data:
        if k not in TOP_KEYS:
            raise ConfigError(f"unknown key {k}", key=k)
    cmd = command or data.get("command")
    if cmd is None:
        raise ConfigError("command required", key="command")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}", key="command")

    model = data.get("model") or {}
    if not isinstance(model, dict):
        raise ConfigError("model must be an object", key="model")
    if cmd != "all" and "case" not in model:
        raise ConfigError("model.case required", key="model.case")

    numeric = _section(data, "numeric", NUMERIC_KEYS)
    tol = numeric.get("tol", 1e-10)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ConfigError(f"numeric.tol = {tol!r} outside [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]", key="numeric.tol")
    seed = numeric.get("seed", 42)
    if isinstance(seed, bool) or not isinstance(seed, int) or not SEED_RANGE[0] <= seed <= SEED_RANGE[1]:
        raise ConfigError(f"numeric.seed = {seed!r} must be an integer in [0, 2^63)", key="numeric.seed")
    precision = numeric.get("precision", "double")
    if precision not in PRECISIONS:
        raise ConfigError(f"numeric.precision must be one of {PRECISIONS}", key="numeric.precision")

    output = _section(data, "output", OUTPUT_KEYS)
    for k, v in output.items():
        if not isinstance(v, str):
            raise ConfigError(f"output.{k} must be a string", key=f"output.{k}")
    options = _section(data, "options", OPTION_KEYS[cmd])

    cfg = RunConfig(cmd, dict(model), float(tol), int(seed), precision,
                    output.get("dir", "."), output.get("report"), output.get("csv"), dict(options))
    if model:
        try:
            cfg.build_model()
        except KirchhoffError as exc:
            raise ConfigError(f"model: {exc}", key="model") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: {exc}", key="model") from None
    return cfg


def load_config(path, command: str | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), command)
