"""One-dimensional search over the leakage level t."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conic import DEFAULT_TOL, INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL
from .inner import ENERGY_MARGIN_TOL, InnerSolution, energy_feasibility, solve_inner
from .model import ChannelSet, SystemParams


@dataclass(frozen=True)
class GridConfig:
    """``n_coarse`` log-spaced points over [t_min, 1]; the bracket around
    the best coarse point is then cut into ``n_refine`` equal intervals."""

    n_coarse: int = 32
    n_refine: int = 16

    def __post_init__(self):
        if self.n_coarse < 8:
            raise ValueError("n_coarse must be at least 8")
        if self.n_refine < 1:
            raise ValueError("n_refine must be positive")


@dataclass(frozen=True)
class TracePoint:
    t: float
    status: str
    f_tilde: float
    rate: float


@dataclass
class OuterResult:
    t_star: float | None
    r_upper: float
    inner: InnerSolution | None
    trace: list[TracePoint] = field(default_factory=list)
    t_min: float = float("nan")

    status: str = OPTIMAL

    @property
    def feasible(self) -> bool:
        return self.inner is not None

    def write_trace(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "status", "f_tilde", "R"])
            for p in sorted(self.trace, key=lambda p: p.t):
                w.writerow([repr(p.t), p.status, repr(p.f_tilde), repr(p.rate)])


def t_lower_bound(params: SystemParams, channels: ChannelSet) -> float:
    """Smallest t any user could require: min_k (1 + P ||h_k||^2 / s2_sa,k)^-1."""
    gains = np.sum(np.abs(channels.h_users) ** 2, axis=1)
    return float(np.min(1.0 / (1.0 + params.p_total * gains / params.sigma2_sa)))


def outer_rate(f_tilde: float, t: float) -> float:
    """log2(1 + f~(t)) + log2(t)."""
    return float(np.log2(1.0 + f_tilde) + np.log2(t))


def maximize_over_t(params: SystemParams, channels: ChannelSet, grid: GridConfig | None = None, *,
                    backend=None, tol: float = DEFAULT_TOL) -> OuterResult:
    """Grid search over t with one refinement pass.

    Points whose inner problem is infeasible or fails numerically are kept in
    the trace and skipped. If no point is feasible the result has
    ``inner=None``, ``r_upper=0`` and ``status`` infeasible or
    numerical_failure.
    """
    grid = grid or GridConfig()
    t_min = t_lower_bound(params, channels)
    e_status, margin = energy_feasibility(params, channels, backend=backend, tol=tol)
    if e_status != OPTIMAL or margin < -ENERGY_MARGIN_TOL:
        status = INFEASIBLE if e_status in (OPTIMAL, INFEASIBLE) else NUMERICAL_FAILURE
        return OuterResult(None, 0.0, None, [], t_min, status)
    cache: dict[float, InnerSolution] = {}
    trace: list[TracePoint] = []

    def evaluate(t: float) -> float:
        t = float(t)
        if t in cache:
            return cache[t].f_tilde
        sol = solve_inner(params, channels, t, backend=backend, tol=tol, check_energy=False)
        cache[t] = sol
        rate = outer_rate(sol.theta, t) if sol.optimal else -np.inf
        trace.append(TracePoint(t, sol.status, sol.f_tilde, rate))
        return sol.f_tilde

    coarse = np.geomspace(t_min, 1.0, grid.n_coarse)
    coarse[-1] = 1.0
    for t in coarse:
        evaluate(t)

    def best() -> TracePoint | None:
        feasible = [p for p in trace if p.status == OPTIMAL]
        # ties resolved towards the smaller t for determinism
        return max(feasible, key=lambda p: (p.rate, -p.t)) if feasible else None

    b = best()
    if b is None:
        # energy constraints are satisfiable, so this is a solver breakdown
        status = INFEASIBLE if all(p.status == INFEASIBLE for p in trace) else NUMERICAL_FAILURE
        return OuterResult(None, 0.0, None, trace, t_min, status)

    i = int(np.argmin(np.abs(coarse - b.t)))
    lo, hi = coarse[max(i - 1, 0)], coarse[min(i + 1, len(coarse) - 1)]
    for j in range(1, grid.n_refine):
        # reduce j/n so nested grids (n, 2n, ...) hit bit-identical t values
        g = math.gcd(j, grid.n_refine)
        evaluate(lo + (hi - lo) * (j // g) / (grid.n_refine // g))

    b = best()
    return OuterResult(b.t, b.rate, cache[b.t], trace, t_min)
