"""Single-instance pipeline and Monte Carlo sweeps."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .conic import DEFAULT_TOL, INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL
from .hermitian import numerical_rank
from .inner import InnerSolution, min_trace_solution, problem_residuals, recover_design, reduce_rank, solve_inner
from .metrics import DesignReport, TransmitDesign, achievable_secrecy_rate
from .model import ChannelSet, SystemParams, dbm_to_watts, generate_channels, params_from_dict, params_to_dict
from .outer import GridConfig, OuterResult, TracePoint, maximize_over_t, outer_rate
from .recovery import DEFAULT_N_RAND, RecoveryReport, direct_extraction, gaussian_randomization, principal_design

log = logging.getLogger(__name__)

SWEEP_FIELDS = ("sweep_value", "mean_rate_upper", "mean_rate_sdr", "mean_rate_sdr_gr", "n_feasible", "n_total")
# a design whose rate beats the grid optimum triggers one more inner solve
# at the design's own leakage level (see _certify_upper)
CERTIFY_SLACK = 1e-9
# residual gate for treating an emitted design as a feasible relaxation point
WITNESS_RTOL = 1e-8


@dataclass
class InstanceResult:
    """Everything :func:`solve_instance` produces for one channel draw.

    ``design`` is the emitted 'SDR+GR' design; ``sdr_design`` is the
    principal-eigenvector rank-one design ('SDR', ``None`` when it violates
    a constraint, rate 0) and ``relaxed`` the covariance-level solution of
    the relaxation at ``t*``. Iterating yields
    ``(outer, design, report, recovery)``.
    """

    status: str
    outer: OuterResult
    design: TransmitDesign | None = None
    report: DesignReport | None = None
    recovery: RecoveryReport | None = None
    sdr_design: TransmitDesign | None = None
    sdr_report: DesignReport | None = None
    inner: InnerSolution | None = None
    relaxed: TransmitDesign | None = None

    def __iter__(self):
        return iter((self.outer, self.design, self.report, self.recovery))

    @property
    def solved(self) -> bool:
        return self.status == OPTIMAL

    @property
    def rate_upper(self) -> float:
        return max(0.0, self.outer.r_upper) if self.solved else 0.0

    @property
    def rate_sdr(self) -> float:
        return self.sdr_report.secrecy_rate if self.solved and self.sdr_report is not None else 0.0

    @property
    def rate_sdr_gr(self) -> float:
        return self.report.secrecy_rate if self.solved else 0.0

    @property
    def t_star(self) -> float | None:
        return self.outer.t_star

    def check_t(self, design: TransmitDesign, report: DesignReport) -> float:
        """Leakage level at which ``design`` is checked.

        The relaxed design is feasible at ``t*``. A rank-one design satisfies
        the eavesdropper LMI at ``t`` exactly when its leakage is at most
        ``-log2 t``, so it is checked at ``min(t*, 2^-leakage)``.
        """
        if design.beamformer is None:
            return self.t_star
        return min(self.t_star, _leakage_level(report))

    @property
    def design_t(self) -> float | None:
        """:meth:`check_t` of the emitted design."""
        return self.check_t(self.design, self.report) if self.solved else None

    def residuals(self, params: SystemParams, channels: ChannelSet) -> dict[str, dict[str, float]]:
        """Constraint residuals of every design of a solved instance: the
        relaxed one at ``t*``, the rank-one ones at :meth:`check_t`."""
        if not self.solved:
            return {}
        out = {"relaxed": problem_residuals(self.relaxed, params, channels, self.t_star),
               "sdr_gr": problem_residuals(self.design, params, channels, self.design_t)}
        if self.sdr_design is not None:
            out["sdr"] = problem_residuals(self.sdr_design, params, channels,
                                           self.check_t(self.sdr_design, self.sdr_report))
        return out

    def summary(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "t_star": self.t_star, "rate_upper": self.rate_upper,
                               "rate_sdr": self.rate_sdr, "rate_sdr_gr": self.rate_sdr_gr}
        if self.solved:
            out["design_report"] = self.report.as_dict()
            out["recovery_report"] = self.recovery.as_dict()
        return out


def _certify_upper(outer: OuterResult, t: float, params, channels, backend, tol) -> bool:
    """Evaluate the inner problem at one extra ``t`` and adopt it if better.

    The grid optimum is only an upper bound up to grid resolution: a design
    leaking less than ``-log2 t*`` may beat it. Its own leakage level is
    then a point where the relaxation certifies a bound above the design.
    """
    t = float(min(1.0, max(t, outer.t_min)))
    if any(p.t == t for p in outer.trace):
        return False
    sol = solve_inner(params, channels, t, backend=backend, tol=tol, check_energy=False)
    rate = outer_rate(sol.theta, t) if sol.optimal else -np.inf
    outer.trace.append(TracePoint(t, sol.status, sol.f_tilde, rate))
    if sol.optimal and rate > outer.r_upper:
        outer.t_star, outer.r_upper, outer.inner = t, rate, sol
        return True
    return False


def _witness_rate(design: TransmitDesign, report: DesignReport, params, channels) -> float:
    """Relaxation objective of a feasible rank-one design at its leakage level.

    With a common normalization the relaxation scores a point by
    ``min_k g_k / max_k D_k``, not by the users' own SINRs. Any point that
    meets every constraint at ``t`` bounds the relaxation's optimum at ``t``
    from below, so this value is a valid estimate of ``r_upper`` whenever the
    solver under-reports it. Returns ``-inf`` for designs outside the gate.
    """
    if design.beamformer is None:
        return -np.inf
    t = _leakage_level(report)
    res = problem_residuals(design, params, channels, t)
    if max(res.values()) > WITNESS_RTOL:
        return -np.inf
    g = np.array([np.real(np.vdot(h, design.q_cov @ h)) for h in channels.h_users])
    d = np.array([np.real(np.vdot(h, design.an_cov @ h)) for h in channels.h_users])
    d = d + params.sigma2_sa + params.sigma2_sp / design.rho
    return outer_rate(float(g.min() / d.max()), t)


def _leakage_level(report: DesignReport) -> float:
    return float(2.0 ** (-np.max(report.eve_rates_upper))) if report.eve_rates_upper.size else 1.0


def solve_instance(params: SystemParams, channels: ChannelSet, grid: GridConfig | None = None,
                   n_rand: int = DEFAULT_N_RAND, seed: int = 0, *, eq22_noise: bool = True,
                   backend=None, tol: float = DEFAULT_TOL, tie_break: bool = True,
                   max_certify: int = 3) -> InstanceResult:
    """Outer search, design recovery, rank check, rank-one design, metrics.

    At ``t*`` the least-trace optimal point is used and then restricted to
    its leading eigenspaces (``tie_break``, see :func:`min_trace_solution`
    and :func:`reduce_rank`). A rank-one ``Q`` is used directly, anything
    else goes through Gaussian randomization, whose candidate 0 is the
    'SDR' principal-eigenvector design. ``status`` is optimal,
    infeasible (the energy constraints cannot be met, all rates zero) or
    numerical_failure.
    """
    outer = maximize_over_t(params, channels, grid, backend=backend, tol=tol)
    if not outer.feasible:
        return InstanceResult(outer.status, outer)

    result: InstanceResult | None = None
    for _ in range(max_certify + 1):
        inner = outer.inner
        if tie_break:
            inner = min_trace_solution(params, channels, inner, backend=backend, tol=tol)
            inner = reduce_rank(params, channels, inner, backend=backend, tol=tol)
            # both points are feasible for the relaxation at t*, so a larger
            # theta is a better estimate of its optimum
            outer.r_upper = max(outer.r_upper, outer_rate(inner.theta, inner.t))
        relaxed = recover_design(inner, params)
        if numerical_rank(relaxed.q_cov) == 1:
            design, recovery = direct_extraction(relaxed.q_cov, relaxed.an_cov, relaxed.rho, params, channels,
                                                 eq22_noise=eq22_noise)
            sdr = design
        else:
            design, recovery = gaussian_randomization(relaxed.q_cov, relaxed.an_cov, relaxed.rho, params,
                                                      channels, n_rand, seed, eq22_noise=eq22_noise)
            sdr = principal_design(relaxed.q_cov, relaxed.an_cov, params, channels, eq22_noise=eq22_noise)
        report = achievable_secrecy_rate(design, channels, params, eq22_noise=eq22_noise)
        sdr_report = None if sdr is None else achievable_secrecy_rate(sdr, channels, params, eq22_noise=eq22_noise)
        result = InstanceResult(OPTIMAL, outer, design, report, recovery, sdr, sdr_report, inner, relaxed)
        if report.secrecy_rate <= outer.r_upper + CERTIFY_SLACK:
            break
        outer.r_upper = max(outer.r_upper, _witness_rate(design, report, params, channels))
        if report.secrecy_rate <= outer.r_upper + CERTIFY_SLACK:
            break
        if not _certify_upper(outer, _leakage_level(report), params, channels, backend, tol):
            break
    return result


# -- sweeps ---------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    mean_rate_upper: float
    mean_rate_sdr: float
    mean_rate_sdr_gr: float
    n_feasible: int
    n_total: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep definition. Sweep values are in dBm; channel draw ``i`` uses
    seed ``seed + i`` for every sweep value (common random numbers)."""

    params: SystemParams = field(default_factory=SystemParams)
    sweep_variable: str = "power"
    sweep_values: tuple[float, ...] = (20.0, 25.0, 30.0, 35.0, 40.0)
    n_channel_draws: int = 100
    seed: int = 0
    n_rand: int = DEFAULT_N_RAND
    grid: GridConfig = field(default_factory=GridConfig)
    output_path: str | None = None
    eq22_noise: bool = True

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        if self.sweep_variable not in ("power", "energy"):
            raise ValueError(f"sweep variable must be 'power' or 'energy', got {self.sweep_variable!r}")
        if not self.sweep_values:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.n_channel_draws < 1:
            raise ValueError("n_channel_draws must be at least 1")
        if self.n_rand < 1:
            raise ValueError("n_rand must be at least 1")

    def params_at(self, value_dbm: float) -> SystemParams:
        w = dbm_to_watts(value_dbm)
        if self.sweep_variable == "power":
            return self.params.replace(p_total=w)
        return self.params.replace(e_bar_s=w, e_bar_e=w)

    def as_dict(self) -> dict:
        return {
            "params": params_to_dict(self.params),
            "sweep": {"variable": self.sweep_variable, "values": list(self.sweep_values)},
            "n_channel_draws": self.n_channel_draws,
            "seed": self.seed,
            "n_rand": self.n_rand,
            "grid": {"n_coarse": self.grid.n_coarse, "n_refine": self.grid.n_refine},
            "output_path": self.output_path,
            "eq22_noise": self.eq22_noise,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"params", "sweep", "n_channel_draws", "seed", "n_rand", "grid", "output_path", "eq22_noise"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        kw: dict[str, Any] = {}
        if "params" in d:
            kw["params"] = params_from_dict(d["params"])
        if "sweep" in d:
            sw = d["sweep"]
            extra = set(sw) - {"variable", "values"}
            if extra:
                raise ValueError(f"unknown sweep key(s): {sorted(extra)}")
            if "variable" in sw:
                kw["sweep_variable"] = sw["variable"]
            if "values" in sw:
                kw["sweep_values"] = tuple(sw["values"])
        if "grid" in d:
            kw["grid"] = GridConfig(**d["grid"])
        for key in ("n_channel_draws", "seed", "n_rand", "output_path", "eq22_noise"):
            if key in d:
                kw[key] = d[key]
        return cls(**kw)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


@dataclass
class SweepResult:
    rows: list[SweepRow]
    # per sweep value, per draw (only with keep_instances)
    instances: list[list[InstanceResult]]
    channels: list[ChannelSet]
    # per sweep value: draws ending in a numerical failure
    n_failed: list[int] = field(default_factory=list)


def _solve_task(args) -> InstanceResult:
    params, channels, config, seed, backend, tol = args
    return solve_instance(params, channels, config.grid, config.n_rand, seed, eq22_noise=config.eq22_noise,
                          backend=backend, tol=tol)


def _map(tasks: list, workers: int) -> list[InstanceResult]:
    if workers <= 1:
        return [_solve_task(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    # results come back in task order, so aggregation does not depend on
    # scheduling; chunksize 1 lets idle workers pick up the next instance
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_task, tasks, chunksize=1))


def run_sweep(config: ExperimentConfig, *, backend=None, tol: float = DEFAULT_TOL,
              keep_instances: bool = False, workers: int = 1) -> SweepResult:
    """Solve every (sweep value, channel draw) pair and average per value.

    ``n_feasible`` counts the draws solved to optimality. Infeasible draws
    enter the means with zero rate; numerical failures are left out of the
    means and reported in :attr:`SweepResult.n_failed`. ``workers > 1``
    solves the instances in a process pool; the output is identical.
    """
    chans = [generate_channels(config.params, config.seed + i) for i in range(config.n_channel_draws)]
    tasks = [(config.params_at(value), ch, config, config.seed + i, backend, tol)
             for value in config.sweep_values for i, ch in enumerate(chans)]
    flat = _map(tasks, workers)
    n = len(chans)
    rows, kept, failed = [], [], []
    for j, value in enumerate(config.sweep_values):
        results = flat[j * n:(j + 1) * n]
        ok = [r for r in results if r.status != NUMERICAL_FAILURE]
        if len(ok) < len(results):
            log.warning("%d numerical failure(s) at %s = %g dBm", len(results) - len(ok),
                        config.sweep_variable, value)

        def mean(attr):
            return float(np.mean([getattr(r, attr) for r in ok])) if ok else float("nan")

        n_solved = sum(r.solved for r in results)
        rows.append(SweepRow(value, mean("rate_upper"), mean("rate_sdr"), mean("rate_sdr_gr"), n_solved, n))
        failed.append(len(results) - len(ok))
        if keep_instances:
            kept.append(results)
    if config.output_path:
        write_sweep_csv(rows, config.output_path, config)
    return SweepResult(rows, kept, chans, failed)


def sweep_power(config: ExperimentConfig, **kw) -> list[SweepRow]:
    if config.sweep_variable != "power":
        raise ValueError("sweep_power needs sweep variable 'power'")
    return run_sweep(config, **kw).rows


def sweep_energy(config: ExperimentConfig, **kw) -> list[SweepRow]:
    if config.sweep_variable != "energy":
        raise ValueError("sweep_energy needs sweep variable 'energy'")
    return run_sweep(config, **kw).rows


def metadata_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".meta.json")


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path, config: ExperimentConfig | None = None) -> None:
    """CSV with one row per sweep value plus a ``<path>.meta.json`` sidecar."""
    from . import __version__

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_FIELDS)
        for r in rows:
            w.writerow([repr(float(r.sweep_value)), repr(float(r.mean_rate_upper)), repr(float(r.mean_rate_sdr)),
                        repr(float(r.mean_rate_sdr_gr)), r.n_feasible, r.n_total])
    meta = {"library": "swiptsec", "version": __version__, "columns": list(SWEEP_FIELDS)}
    if config is not None:
        meta["config"] = config.as_dict()
    with open(metadata_path(path), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != SWEEP_FIELDS:
            raise ValueError(f"unexpected columns {rd.fieldnames}")
        return [SweepRow(float(r["sweep_value"]), float(r["mean_rate_upper"]), float(r["mean_rate_sdr"]),
                         float(r["mean_rate_sdr_gr"]), int(r["n_feasible"]), int(r["n_total"])) for r in rd]
