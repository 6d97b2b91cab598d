"""Experiment-config ingestion.

Configs are strict JSON: unknown keys are rejected at every level so a
typo cannot silently change an experiment.  The resolved config (with the
seed actually used) is echoed into every output header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .analytic import QuadratureConfig
from .econ import CostModel, PowerTerm
from .errors import ConfigurationError
from .model import AttackModel, model_from_json, model_to_json

_TOP_KEYS = {"model", "engine", "plan", "quadrature", "t", "t_grid", "cost", "output"}
_PLAN_KEYS = {"n_reps", "functional_reps", "master_seed", "workers"}
_QUAD_KEYS = {"abs_tol", "rel_tol", "truncation_quantile", "grid_step", "max_subdivisions"}
_COST_KEYS = {"revenue", "reset_cost", "run_cost"}
_TERM_KEYS = {"coeff", "exp"}
_OUTPUT_KEYS = {"format", "path"}
_ENGINES = {"analytic", "mc", "both"}


@dataclass(frozen=True)
class PlanSpec:
    """Replication counts and seed as read from the config; the seed may be
    absent and resolved later from the CLI or environment."""

    n_reps: int | None = None
    functional_reps: int | None = None
    master_seed: int | None = None
    workers: int = 1


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    model: AttackModel
    engine: str = "mc"
    m_range: tuple[int, int] | None = None
    plan: PlanSpec = PlanSpec()
    quadrature: QuadratureConfig = QuadratureConfig()
    t: float | None = None
    t_grid: tuple[float, ...] | None = None
    cost: CostModel | None = None
    output: OutputSpec = OutputSpec()


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(extra)}")


def _as_int(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigurationError(f"{where} must be an integer, got {value!r}")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where} must be a number, got {value!r}")
    return float(value)


def _parse_plan(obj: dict) -> PlanSpec:
    _reject_unknown(obj, _PLAN_KEYS, "plan")
    n_reps = obj.get("n_reps")
    if n_reps is not None:
        n_reps = _as_int(n_reps, "plan.n_reps")
        if n_reps < 1:
            raise ConfigurationError("plan.n_reps must be >= 1")
    functional_reps = obj.get("functional_reps")
    if functional_reps is not None:
        functional_reps = _as_int(functional_reps, "plan.functional_reps")
        if functional_reps < 1:
            raise ConfigurationError("plan.functional_reps must be >= 1")
    seed = obj.get("master_seed")
    if seed is not None:
        seed = _as_int(seed, "plan.master_seed")
    workers = obj.get("workers", 1)
    workers = _as_int(workers, "plan.workers")
    if workers < 1:
        raise ConfigurationError("plan.workers must be >= 1")
    return PlanSpec(n_reps=n_reps, functional_reps=functional_reps, master_seed=seed, workers=workers)


def _parse_quadrature(obj: dict) -> QuadratureConfig:
    _reject_unknown(obj, _QUAD_KEYS, "quadrature")
    kwargs = {}
    for key in _QUAD_KEYS:
        if key in obj:
            if key == "max_subdivisions":
                kwargs[key] = _as_int(obj[key], f"quadrature.{key}")
            else:
                kwargs[key] = _as_number(obj[key], f"quadrature.{key}")
    try:
        return QuadratureConfig(**kwargs)
    except ValueError as exc:
        raise ConfigurationError(f"invalid quadrature settings: {exc}") from exc


def _parse_term(obj: dict, where: str) -> PowerTerm:
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{where} must be an object with coeff/exp")
    _reject_unknown(obj, _TERM_KEYS, where)
    for key in _TERM_KEYS:
        if key not in obj:
            raise ConfigurationError(f"{where} is missing {key!r}")
    return PowerTerm(coeff=_as_number(obj["coeff"], f"{where}.coeff"), exponent=_as_number(obj["exp"], f"{where}.exp"))


def _parse_cost(obj: dict) -> CostModel:
    _reject_unknown(obj, _COST_KEYS, "cost")
    for key in _COST_KEYS:
        if key not in obj:
            raise ConfigurationError(f"cost is missing {key!r}")
    return CostModel(
        revenue=_as_number(obj["revenue"], "cost.revenue"),
        reset_cost=_parse_term(obj["reset_cost"], "cost.reset_cost"),
        run_cost=_parse_term(obj["run_cost"], "cost.run_cost"),
    )


def _parse_output(obj: dict) -> OutputSpec:
    _reject_unknown(obj, _OUTPUT_KEYS, "output")
    fmt = obj.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigurationError(f"output.format must be csv or json, got {fmt!r}")
    path = obj.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigurationError("output.path must be a string")
    return OutputSpec(format=fmt, path=path)


def parse_config(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ConfigurationError("config root must be a JSON object")
    _reject_unknown(obj, _TOP_KEYS, "config")
    if "model" not in obj:
        raise ConfigurationError("config is missing 'model'")

    model_obj = dict(obj["model"]) if isinstance(obj["model"], dict) else obj["model"]
    m_range = None
    if isinstance(model_obj, dict) and "m_range" in model_obj:
        raw = model_obj.pop("m_range")
        if (
            not isinstance(raw, list)
            or len(raw) != 2
            or any(not isinstance(v, int) or isinstance(v, bool) for v in raw)
        ):
            raise ConfigurationError("model.m_range must be [low, high] integers")
        lo, hi = raw
        if lo < 1 or hi < lo:
            raise ConfigurationError(f"model.m_range must satisfy 1 <= low <= high, got {raw}")
        m_range = (lo, hi)
        # Sweeps re-anchor the threshold per row; seed the template with the
        # low end so the model is well-formed even without a node count.
        model_obj.setdefault("m_override", lo)
    model = model_from_json(model_obj)

    engine = obj.get("engine", "mc")
    if engine not in _ENGINES:
        raise ConfigurationError(f"engine must be one of {sorted(_ENGINES)}, got {engine!r}")

    t = obj.get("t")
    if t is not None:
        t = _as_number(t, "t")
        if t < 0:
            raise ConfigurationError("t must be >= 0")
    t_grid = obj.get("t_grid")
    if t_grid is not None:
        if not isinstance(t_grid, list) or not t_grid:
            raise ConfigurationError("t_grid must be a non-empty list of times")
        t_grid = tuple(_as_number(v, "t_grid entry") for v in t_grid)
        if any(v < 0 for v in t_grid):
            raise ConfigurationError("t_grid times must be >= 0")

    return ExperimentConfig(
        model=model,
        engine=engine,
        m_range=m_range,
        plan=_parse_plan(obj.get("plan", {})),
        quadrature=_parse_quadrature(obj.get("quadrature", {})),
        t=t,
        t_grid=t_grid,
        cost=_parse_cost(obj["cost"]) if "cost" in obj else None,
        output=_parse_output(obj.get("output", {})),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(obj)


def resolved_config_json(
    config: ExperimentConfig,
    *,
    engine: str,
    seed: int | None,
    n_reps: int | None,
    functional_reps: int | None,
    workers: int,
) -> str:
    """Canonical one-line JSON of the fully resolved run configuration."""
    model_obj = model_to_json(config.model)
    if config.m_range is not None:
        model_obj["m_range"] = list(config.m_range)
        model_obj.pop("m_override", None)
    payload: dict = {"model": model_obj, "engine": engine}
    plan: dict = {"workers": workers}
    if n_reps is not None:
        plan["n_reps"] = n_reps
    if functional_reps is not None:
        plan["functional_reps"] = functional_reps
    if seed is not None:
        plan["master_seed"] = seed
    payload["plan"] = plan
    q = config.quadrature
    payload["quadrature"] = {
        "abs_tol": q.abs_tol,
        "rel_tol": q.rel_tol,
        "truncation_quantile": q.truncation_quantile,
        "grid_step": q.grid_step,
        "max_subdivisions": q.max_subdivisions,
    }
    if config.t is not None:
        payload["t"] = config.t
    if config.t_grid is not None:
        payload["t_grid"] = list(config.t_grid)
    if config.cost is not None:
        payload["cost"] = {
            "revenue": config.cost.revenue,
            "reset_cost": {"coeff": config.cost.reset_cost.coeff, "exp": config.cost.reset_cost.exponent},
            "run_cost": {"coeff": config.cost.run_cost.coeff, "exp": config.cost.run_cost.exponent},
        }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))
