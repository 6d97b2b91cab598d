"""Command-line front end.

Three subcommands: ``estimate`` evaluates one quantity at one or more
thresholds, ``sweep`` produces the full per-m table (with the net-revenue
argmax footer when a cost model is present), and ``validate`` runs the
cross-engine consistency checks on a model and reports pass/fail margins.

Outputs carry the resolved config and seed in their header and contain no
timestamps, so identical runs produce byte-identical files.  Exit codes:
0 success, 1 validation failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import analytic, econ, mc
from .config import ExperimentConfig, load_config, resolved_config_json
from .errors import ChainsimError, ConfigurationError, NumericalError, RunawayError
from .model import AttackModel
from .streams import row_seed

_COLUMNS = ("m", "quantity", "t", "value", "std_error", "engine", "n_reps", "seed")
_QUANTITIES = ("mean-time", "p-functional", "cycle-prob")

SEED_ENV_VAR = "CHAIN_SEED"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _parse_int_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError as exc:
        raise ConfigurationError(f"range must look like A:B, got {text!r}") from exc
    if lo < 1 or hi < lo:
        raise ConfigurationError(f"range must satisfy 1 <= A <= B, got {text!r}")
    return lo, hi


def _parse_t_grid(text: str) -> tuple[float, ...]:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError as exc:
        raise ConfigurationError(f"t-grid must look like A:B:STEP, got {text!r}") from exc
    if step <= 0 or hi < lo or lo < 0:
        raise ConfigurationError(f"t-grid must satisfy 0 <= A <= B with STEP > 0, got {text!r}")
    out = []
    t = lo
    while t <= hi + 1e-12 * max(1.0, abs(hi)):
        out.append(round(t, 12))
        t += step
    return tuple(out)


def _resolve_seed(args, config: ExperimentConfig) -> int | None:
    if args.seed is not None:
        return args.seed
    if config.plan.master_seed is not None:
        return config.plan.master_seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigurationError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return None


def _require_seed(seed: int | None) -> int:
    if seed is None:
        raise ConfigurationError(
            f"Monte Carlo runs need a seed: pass --seed, set plan.master_seed, or export {SEED_ENV_VAR}"
        )
    return seed


def _resolve_ms(args, config: ExperimentConfig) -> list[int]:
    if getattr(args, "m", None) is not None and getattr(args, "m_range", None) is not None:
        raise ConfigurationError("--m and --m-range are mutually exclusive")
    if getattr(args, "m", None) is not None:
        if args.m < 1:
            raise ConfigurationError("--m must be >= 1")
        return [args.m]
    if getattr(args, "m_range", None) is not None:
        lo, hi = _parse_int_range(args.m_range)
        return list(range(lo, hi + 1))
    if config.m_range is not None:
        lo, hi = config.m_range
        return list(range(lo, hi + 1))
    return [config.model.m]


def _write_output(args, config: ExperimentConfig, command: str, header_meta: dict,
                  rows: list[dict], footer: dict | None = None) -> None:
    fmt = args.format or config.output.format
    path = args.out or config.output.path
    if fmt == "csv":
        lines = [f"# chainsim {command}"]
        for key, value in header_meta.items():
            lines.append(f"# {key}={value}")
        lines.append(",".join(_COLUMNS))
        for row in rows:
            lines.append(",".join(_fmt(row.get(col)) for col in _COLUMNS))
        if footer:
            for key, value in footer.items():
                lines.append(f"# {key}={_fmt(value)}")
        text = "\n".join(lines) + "\n"
    else:
        payload = {"command": command, **header_meta, "rows": rows}
        if footer:
            payload["summary"] = footer
        text = json.dumps(payload, sort_keys=True, indent=2, default=_fmt) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _engines(args, config: ExperimentConfig) -> list[str]:
    name = args.engine or config.engine
    if name == "both":
        return ["analytic", "mc"]
    return [name]


def _estimate_rows(model: AttackModel, m: int, quantity: str, engine: str, t: float | None,
                   config: ExperimentConfig, seed: int | None, n_reps: int | None,
                   workers: int) -> list[dict]:
    model_m = model.with_m(m)
    if engine == "analytic":
        if quantity == "mean-time":
            res = analytic.mean_functional_time(model_m, config.quadrature)
        elif quantity == "cycle-prob":
            res = analytic.hack_success_prob(model_m, config.quadrature)
        else:
            res = analytic.functional_prob(model_m, config.quadrature, t)
        return [{
            "m": m, "quantity": quantity, "t": t if quantity == "p-functional" else None,
            "value": res.value, "std_error": res.est_abs_error, "engine": engine,
            "n_reps": None, "seed": None,
        }]
    seed = _require_seed(seed)
    if n_reps is None:
        raise ConfigurationError("Monte Carlo estimates need --iters or plan.n_reps")
    plan = mc.ReplicationPlan(n_reps=n_reps, master_seed=seed, workers=workers)
    if quantity == "mean-time":
        est = mc.estimate_mean_functional_time(model_m, plan)
    elif quantity == "cycle-prob":
        est = mc.estimate_cycle_success_prob(model_m, plan)
    else:
        est = mc.estimate_functional_prob(model_m, t, plan)
    return [{
        "m": m, "quantity": quantity, "t": t if quantity == "p-functional" else None,
        "value": est.mean, "std_error": est.std_error, "engine": engine,
        "n_reps": est.n_reps, "seed": est.seed,
    }]


def cmd_estimate(args) -> int:
    config = load_config(args.config)
    quantity = args.quantity
    if quantity not in _QUANTITIES:
        raise ConfigurationError(f"--quantity must be one of {_QUANTITIES}, got {quantity!r}")
    t = args.t if args.t is not None else config.t
    if quantity == "p-functional" and t is None:
        raise ConfigurationError("p-functional needs --t (or 't' in the config)")
    seed = _resolve_seed(args, config)
    n_reps = args.iters if args.iters is not None else config.plan.n_reps
    workers = args.workers if args.workers is not None else config.plan.workers
    ms = _resolve_ms(args, config)
    engines = _engines(args, config)

    rows: list[dict] = []
    for m in ms:
        for engine in engines:
            m_seed = None
            if engine == "mc" and seed is not None:
                m_seed = seed if len(ms) == 1 else row_seed(seed, m)
            rows.append(
                _estimate_rows(config.model, m, quantity, engine, t, config, m_seed, n_reps, workers)[0]
            )
    meta = {
        "config": resolved_config_json(
            config, engine=args.engine or config.engine, seed=seed,
            n_reps=n_reps, functional_reps=None, workers=workers,
        ),
        "seed": seed if any(e == "mc" for e in engines) else "",
    }
    _write_output(args, config, "estimate", meta, rows)
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    engine = args.engine or config.engine
    if engine == "both":
        raise ConfigurationError("sweep runs one engine at a time; pick --engine analytic or mc")
    ms = _resolve_ms(args, config)
    seed = _resolve_seed(args, config)
    n_reps = args.iters if args.iters is not None else config.plan.n_reps
    workers = args.workers if args.workers is not None else config.plan.workers
    # An explicit --iters overrides both replication counts.
    functional_reps = args.iters if args.iters is not None else config.plan.functional_reps
    t_grid = _parse_t_grid(args.t_grid) if args.t_grid else config.t_grid
    t_eval = args.t if args.t is not None else config.t

    plan = None
    if engine == "mc":
        seed = _require_seed(seed)
        if n_reps is None:
            raise ConfigurationError("Monte Carlo sweeps need --iters or plan.n_reps")
        plan = mc.ReplicationPlan(n_reps=n_reps, master_seed=seed, workers=workers)

    rows: list[dict] = []
    footer: dict | None = None
    if t_grid is not None:
        # Long format: one functional-probability row per (m, t).
        for m in ms:
            model_m = config.model.with_m(m)
            if engine == "analytic":
                ts, values, drift = analytic.functional_prob_grid(
                    model_m, config.quadrature, max(t_grid)
                )
                interp = np.interp(np.asarray(t_grid), ts, values)
                for t, v in zip(t_grid, interp):
                    rows.append({"m": m, "quantity": "p-functional", "t": t, "value": float(v),
                                 "std_error": drift, "engine": engine, "n_reps": None, "seed": None})
            else:
                for j, t in enumerate(t_grid):
                    sub = row_seed(seed, m, j)
                    est = mc.estimate_functional_prob(
                        model_m, t, mc.ReplicationPlan(functional_reps or n_reps, sub, workers)
                    )
                    rows.append({"m": m, "quantity": "p-functional", "t": t, "value": est.mean,
                                 "std_error": est.std_error, "engine": engine,
                                 "n_reps": est.n_reps, "seed": sub})
    else:
        table = econ.sweep(
            config.model, ms, engine, cost=config.cost, plan=plan,
            quadrature=config.quadrature, t_eval=t_eval, functional_reps=functional_reps,
        )
        for r in table.rows:
            if r.failed:
                rows.append({"m": r.m, "quantity": "failed", "t": None, "value": None,
                             "std_error": None, "engine": r.engine, "n_reps": r.n_reps,
                             "seed": r.seed})
                continue
            rows.append({"m": r.m, "quantity": "cycle-prob", "t": None, "value": r.hack_prob,
                         "std_error": r.hack_prob_error, "engine": r.engine,
                         "n_reps": r.n_reps, "seed": r.seed})
            rows.append({"m": r.m, "quantity": "mean-time", "t": None, "value": r.mean_time,
                         "std_error": r.mean_time_error, "engine": r.engine,
                         "n_reps": r.n_reps, "seed": r.seed})
            if r.functional_prob is not None:
                rows.append({"m": r.m, "quantity": "p-functional", "t": t_eval,
                             "value": r.functional_prob, "std_error": r.functional_prob_error,
                             "engine": r.engine, "n_reps": r.functional_reps, "seed": r.seed})
            if r.net_revenue is not None:
                rows.append({"m": r.m, "quantity": "net-revenue", "t": None, "value": r.net_revenue,
                             "std_error": r.net_revenue_error, "engine": r.engine,
                             "n_reps": r.n_reps, "seed": r.seed})
        if config.cost is not None:
            footer = {
                "argmax_m": table.argmax_m,
                "max_net_revenue": table.max_value,
                "flat_set": ";".join(str(m) for m in table.flat_set),
                "no_interior_optimum": "true" if table.no_interior_optimum else "false",
            }

    meta = {
        "config": resolved_config_json(
            config, engine=engine, seed=seed, n_reps=n_reps,
            functional_reps=functional_reps, workers=workers,
        ),
        "seed": seed if engine == "mc" else "",
    }
    _write_output(args, config, "sweep", meta, rows, footer)
    return 0


def cmd_validate(args) -> int:
    config = load_config(args.config)
    seed = _resolve_seed(args, config)
    n_reps = args.iters if args.iters is not None else (config.plan.n_reps or 20000)
    workers = args.workers if args.workers is not None else config.plan.workers
    model = config.model if args.m is None else config.model.with_m(args.m)
    checks = _run_validation(model, config, seed, n_reps, workers)

    failed = any(status == "FAIL" for status, _, _ in checks)
    for status, name, detail in checks:
        print(f"{status} {name}: {detail}")
    print(f"{'FAIL' if failed else 'OK'} {sum(1 for s, _, _ in checks if s == 'PASS')} passed, "
          f"{sum(1 for s, _, _ in checks if s == 'FAIL')} failed, "
          f"{sum(1 for s, _, _ in checks if s == 'SKIP')} skipped")
    return 1 if failed else 0


def _run_validation(model: AttackModel, config: ExperimentConfig, seed: int | None,
                    n_reps: int, workers: int) -> list[tuple[str, str, str]]:
    from .distributions import Exponential

    checks: list[tuple[str, str, str]] = []
    cfg = config.quadrature

    p_quad = analytic.hack_success_prob(model, cfg, force_quadrature=True)
    if isinstance(model.hack_time, Exponential) and isinstance(model.detect_time, Exponential):
        closed = analytic.hack_success_prob(model, cfg)
        margin = abs(p_quad.value - closed.value)
        tol = p_quad.est_abs_error + closed.est_abs_error + 1e-12
        checks.append((
            "PASS" if margin <= tol else "FAIL",
            "closed-form-vs-quadrature",
            f"|{p_quad.value:.6e} - {closed.value:.6e}| = {margin:.2e} (tol {tol:.2e})",
        ))

    # Analytic monotonicity in m around the model's threshold.
    m0 = model.m
    ps = [analytic.hack_success_prob(model.with_m(m), cfg) for m in (m0, m0 + 1, m0 + 2)]
    strict = all(a.value > b.value + (a.est_abs_error + b.est_abs_error) for a, b in zip(ps, ps[1:]))
    checks.append((
        "PASS" if strict else "FAIL",
        "hack-prob-decreasing-in-m",
        f"p_{m0}={ps[0].value:.4e} > p_{m0+1}={ps[1].value:.4e} > p_{m0+2}={ps[2].value:.4e}",
    ))

    if seed is None:
        checks.append(("SKIP", "mc-cross-checks", "no seed available (set --seed or CHAIN_SEED)"))
        return checks
    if n_reps < 1000:
        checks.append(("SKIP", "mc-cross-checks", f"underpowered at {n_reps} replications (< 1000)"))
        return checks

    plan = mc.ReplicationPlan(n_reps=n_reps, master_seed=seed, workers=workers)
    p_hat = mc.estimate_cycle_success_prob(model, plan)
    margin = abs(p_hat.mean - p_quad.value)
    tol = 3.0 * p_hat.std_error + p_quad.est_abs_error
    checks.append((
        "PASS" if margin <= tol else "FAIL",
        "mc-vs-quadrature-hack-prob",
        f"|{p_hat.mean:.6e} - {p_quad.value:.6e}| = {margin:.2e} (tol {tol:.2e})",
    ))

    try:
        et = analytic.mean_functional_time(model, cfg)
        from .streams import SubstreamPool

        # A separate derived seed keeps this loop independent of the
        # cycle-probability estimate above.
        pool = SubstreamPool(row_seed(seed, 17))
        totals, resets, reset_sum, hacks = [], 0, 0.0, []
        for i in range(n_reps):
            draw = mc.simulate_time_to_hack(model, pool.reset(i))
            totals.append(draw.total)
            resets += draw.n_resets
            reset_sum += draw.reset_total
            hacks.append(draw.hack_duration)
        mean_t = sum(totals) / n_reps
        se_t = (sum((v - mean_t) ** 2 for v in totals) / (n_reps - 1)) ** 0.5 / math.sqrt(n_reps)
        margin = abs(mean_t - et.value)
        tol = 3.0 * se_t + et.est_abs_error
        checks.append((
            "PASS" if margin <= tol else "FAIL",
            "mc-vs-quadrature-mean-time",
            f"|{mean_t:.6g} - {et.value:.6g}| = {margin:.3g} (tol {tol:.3g})",
        ))

        # Stopping-time decomposition: mean resets x mean reset length + mean
        # hack length should reproduce the direct average.
        mean_hack = sum(hacks) / n_reps
        decomposed = (resets / n_reps) * (reset_sum / resets if resets else 0.0) + mean_hack
        margin = abs(decomposed - mean_t)
        tol = 3.0 * se_t * 2.0
        checks.append((
            "PASS" if margin <= tol else "FAIL",
            "stopping-time-decomposition",
            f"|{decomposed:.6g} - {mean_t:.6g}| = {margin:.3g} (tol {tol:.3g})",
        ))
    except RunawayError as exc:
        checks.append(("SKIP", "mc-vs-quadrature-mean-time", f"runaway: {exc}"))

    return checks


def _error_json(kind: str, exc: Exception) -> str:
    return json.dumps({"error": kind, "message": str(exc)}, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="chainsim",
        description="Simulate and analyze an n-node blockchain under continuous cyber attack.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--m", type=int, default=None, help="breach threshold to evaluate")
        p.add_argument("--m-range", default=None, help="threshold range A:B")
        p.add_argument("--t", type=float, default=None, help="evaluation time for p-functional")
        p.add_argument("--iters", type=int, default=None, help="replications (overrides plan.n_reps)")
        p.add_argument("--seed", type=int, default=None, help=f"master seed (fallback: ${SEED_ENV_VAR})")
        p.add_argument("--engine", choices=["analytic", "mc", "both"], default=None)
        p.add_argument("--workers", type=int, default=None, help="worker processes (never changes results)")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=None)

    p_est = sub.add_parser("estimate", help="evaluate one quantity")
    add_common(p_est)
    p_est.add_argument("--quantity", required=True, choices=list(_QUANTITIES))
    p_est.set_defaults(fn=cmd_estimate)

    p_sw = sub.add_parser("sweep", help="per-m table over a threshold range")
    add_common(p_sw)
    p_sw.add_argument("--t-grid", default=None, help="time grid A:B:STEP for long-format output")
    p_sw.set_defaults(fn=cmd_sweep)

    p_val = sub.add_parser("validate", help="cross-engine consistency report")
    add_common(p_val)
    p_val.set_defaults(fn=cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(_error_json("config", exc), file=sys.stderr)
        return 2
    except (NumericalError, RunawayError) as exc:
        print(_error_json("numerical", exc), file=sys.stderr)
        return 3
    except ChainsimError as exc:
        print(_error_json("error", exc), file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
