"""Cost-benefit analysis: expected net revenue per unit time and sweeps over
the breach threshold m.

Net revenue per unit time is R - C2(m) - C1(m) / E[T_m]: running cost
accrues continuously, while the reset cost C1 is paid once per cycle and a
cycle recurs on average every E[T_m] time units.  Both cost terms are
power laws c * m^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

from .analytic import QuadratureConfig, functional_prob, hack_success_prob, mean_functional_time
from .errors import ChainsimError, ConfigurationError
from .mc import Estimate, ReplicationPlan, estimate_cycle_success_prob, estimate_functional_prob, estimate_mean_functional_time
from .model import AttackModel
from .streams import row_seed

__all__ = ["PowerTerm", "CostModel", "SweepRow", "SweepTable", "expected_net_revenue", "sweep"]


@dataclass(frozen=True)
class PowerTerm:
    """c * m^k cost term."""

    coeff: float
    exponent: float

    def __post_init__(self):
        if self.coeff < 0.0:
            raise ConfigurationError(f"cost coefficient must be >= 0, got {self.coeff}")

    def __call__(self, m: int) -> float:
        return self.coeff * float(m) ** self.exponent


@dataclass(frozen=True)
class CostModel:
    """Revenue rate plus the per-reset and per-unit-time running cost terms."""

    revenue: float
    reset_cost: PowerTerm
    run_cost: PowerTerm

    def __post_init__(self):
        if self.revenue < 0.0:
            raise ConfigurationError(f"revenue rate must be >= 0, got {self.revenue}")


def expected_net_revenue(cost: CostModel, m: int, mean_T: float) -> float:
    """R - C2(m) - C1(m) / mean_T; may be negative."""
    if not mean_T > 0.0:
        raise ValueError(f"mean functional time must be positive, got {mean_T}")
    return cost.revenue - cost.run_cost(m) - cost.reset_cost(m) / mean_T


@dataclass(frozen=True)
class SweepRow:
    m: int
    engine: str
    hack_prob: float | None = None
    hack_prob_error: float | None = None
    mean_time: float | None = None
    mean_time_error: float | None = None
    functional_prob: float | None = None
    functional_prob_error: float | None = None
    net_revenue: float | None = None
    net_revenue_error: float | None = None
    n_reps: int | None = None
    functional_reps: int | None = None
    seed: int | None = None
    failed: bool = False
    error: str | None = None


@dataclass(frozen=True)
class SweepTable:
    """Per-m results plus the argmax bookkeeping for the net-revenue column.

    ``argmax_m`` is the smallest m attaining the maximum net revenue.  The
    flat set lists every m whose net revenue is within one combined
    standard error of the maximum (sweeps over shallow optima should not
    pretend to more resolution than the noise supports).
    ``no_interior_optimum`` is set when the final row sits inside the flat
    margin of the maximum, i.e. the curve is still rising at the edge of
    the sweep range.
    """

    rows: tuple[SweepRow, ...]
    engine: str
    t_eval: float | None = None
    argmax_m: int | None = None
    max_value: float | None = None
    flat_set: tuple[int, ...] = ()
    no_interior_optimum: bool | None = None

    def row(self, m: int) -> SweepRow:
        for r in self.rows:
            if r.m == m:
                return r
        raise KeyError(f"no row for m={m}")


def _mc_row(
    model: AttackModel,
    m: int,
    plan: ReplicationPlan,
    cost: CostModel | None,
    t_eval: float | None,
    functional_reps: int | None = None,
) -> SweepRow:
    # Every row and every quantity within it gets its own derived seed, so
    # rows are independent and adding a column never shifts another one.
    seed = row_seed(plan.master_seed, m)
    model_m = model.with_m(m)
    p_hat = estimate_cycle_success_prob(
        model_m, ReplicationPlan(plan.n_reps, row_seed(seed, 1), plan.workers)
    )
    mt = estimate_mean_functional_time(
        model_m, ReplicationPlan(plan.n_reps, row_seed(seed, 2), plan.workers)
    )
    pf: Estimate | None = None
    if t_eval is not None:
        pf = estimate_functional_prob(
            model_m,
            t_eval,
            ReplicationPlan(functional_reps or plan.n_reps, row_seed(seed, 3), plan.workers),
        )
    nr = nr_se = None
    if cost is not None:
        nr = expected_net_revenue(cost, m, mt.mean)
        # Delta method: only the E[T] estimate is noisy in the revenue formula.
        nr_se = cost.reset_cost(m) * mt.std_error / (mt.mean**2)
    return SweepRow(
        m=m,
        engine="mc",
        hack_prob=p_hat.mean,
        hack_prob_error=p_hat.std_error,
        mean_time=mt.mean,
        mean_time_error=mt.std_error,
        functional_prob=None if pf is None else pf.mean,
        functional_prob_error=None if pf is None else pf.std_error,
        net_revenue=nr,
        net_revenue_error=nr_se,
        n_reps=plan.n_reps,
        seed=seed,
        functional_reps=None if pf is None else pf.n_reps,
    )


def _analytic_row(model: AttackModel, m: int, cfg: QuadratureConfig, cost: CostModel | None, t_eval: float | None) -> SweepRow:
    model_m = model.with_m(m)
    p = hack_success_prob(model_m, cfg)
    mt = mean_functional_time(model_m, cfg)
    pf = None
    if t_eval is not None:
        pf = functional_prob(model_m, cfg, t_eval)
    nr = nr_err = None
    if cost is not None:
        nr = expected_net_revenue(cost, m, mt.value)
        nr_err = cost.reset_cost(m) * mt.est_abs_error / (mt.value**2)
    return SweepRow(
        m=m,
        engine="analytic",
        hack_prob=p.value,
        hack_prob_error=p.est_abs_error,
        mean_time=mt.value,
        mean_time_error=mt.est_abs_error,
        functional_prob=None if pf is None else pf.value,
        functional_prob_error=None if pf is None else pf.est_abs_error,
        net_revenue=nr,
        net_revenue_error=nr_err,
    )


def sweep(
    model: AttackModel,
    m_range: Iterable[int],
    engine: Literal["analytic", "mc"],
    cost: CostModel | None = None,
    plan: ReplicationPlan | None = None,
    quadrature: QuadratureConfig | None = None,
    t_eval: float | None = None,
    functional_reps: int | None = None,
) -> SweepTable:
    """Evaluate the model across an ascending range of breach thresholds.

    Rows that fail (runaway replications, non-convergent quadrature) are
    kept, marked failed, and excluded from the argmax; the sweep continues.
    ``functional_reps`` lets the functional-probability column run a
    different replication count than the time/cycle columns.
    """
    ms = [int(m) for m in m_range]
    if not ms or any(b <= a for a, b in zip(ms, ms[1:])):
        raise ConfigurationError("m_range must be non-empty and ascending")
    if engine == "mc" and plan is None:
        raise ConfigurationError("mc sweeps need a replication plan")
    cfg = quadrature or QuadratureConfig()

    rows: list[SweepRow] = []
    for m in ms:
        try:
            if engine == "mc":
                rows.append(_mc_row(model, m, plan, cost, t_eval, functional_reps))
            else:
                rows.append(_analytic_row(model, m, cfg, cost, t_eval))
        except ChainsimError as exc:
            rows.append(SweepRow(m=m, engine=engine, failed=True, error=str(exc)))

    argmax_m = max_value = None
    flat: tuple[int, ...] = ()
    no_interior = None
    scored = [r for r in rows if not r.failed and r.net_revenue is not None]
    if scored:
        best = max(scored, key=lambda r: (r.net_revenue, -r.m))
        argmax_m, max_value = best.m, best.net_revenue

        def combined_se(row: SweepRow) -> float:
            a = best.net_revenue_error or 0.0
            b = row.net_revenue_error or 0.0
            return math.hypot(a, b)

        flat = tuple(r.m for r in scored if r.net_revenue >= max_value - combined_se(r))
        last = scored[-1]
        no_interior = last.net_revenue >= max_value - combined_se(last)
    return SweepTable(
        rows=tuple(rows),
        engine=engine,
        t_eval=t_eval,
        argmax_m=argmax_m,
        max_value=max_value,
        flat_set=flat,
        no_interior_optimum=no_interior,
    )
