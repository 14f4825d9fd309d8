"""Relaxed inner problem for a fixed leakage level ``t``.

After the Charnes-Cooper change of variables ``Q~ = xi Q``, ``V~ = xi V``,
``rho~ = xi rho``, maximizing the minimum user SINR becomes the conic
program

    max theta
    s.t. h_k^H Q~ h_k >= theta
         h_k^H V~ h_k + xi s2_sa + s_k = 1,      s_k rho~_k >= s2_sp xi^2
         (1 - t)(H_l^H V~ H_l + xi s2_e I) - t H_l^H Q~ H_l >= 0
         a_k (xi - rho~_k) >= (E_s / eta_s) xi^2,  a_k = h_k^H (Q~ + V~) h_k + xi s2_sa
         tr(H_l^H (Q~ + V~) H_l) >= xi (E_e / eta_e - N_E s2_ea)
         tr(Q~) + tr(V~) <= xi P
         eps <= rho~_k <= xi,  xi >= eps,  theta >= 0,  Q~, V~ >= 0

The slack ``s_k`` replaces ``xi^2 s2_sp / rho~_k`` (the processing-noise
term ``xi s2_sp / rho_k`` after substitution) inside the normalization
equality; :func:`recover_design` tightens ``rho~`` afterwards so that the
equality holds exactly. The eavesdropper LMI is multiplied through by
``t`` so that ``t = 1`` is well defined.

The program is assembled in normalized units: powers are divided by the
mean user antenna noise and channels by the square root of the channel
variance. :class:`InnerSolution` reports values in physical units.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conic import DEFAULT_TOL, INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL, ConicProgram, HermAffine, SolverOutcome
from .hermitian import DEFAULT_RANK_TOL, hermitize, numerical_rank
from .metrics import TransmitDesign, eve_energy, user_energy
from .model import ChannelSet, SystemParams

log = logging.getLogger(__name__)

RHO_EPS = 1e-9
TRACE_ENV = "SWIPTSEC_INNER_TRACE"
ENERGY_MARGIN_TOL = 1e-7
# relative back-off on the energy thresholds inside the inner program, so
# solver-accuracy violations of order 1e-6 land on the feasible side
ENERGY_BACKOFF = 1e-5
TIE_BREAK_GAP = 1e-7
# accepted relative loss in theta when restricting to a low-rank subspace;
# about the accuracy of theta* itself at the default tolerance
REDUCE_GAP = 1e-5
# restricted points must also keep the physical constraint residuals this small
REDUCE_RESIDUAL = 1e-7


@dataclass(frozen=True)
class Units:
    power: float
    gain: float

    @classmethod
    def for_problem(cls, params: SystemParams) -> "Units":
        return cls(float(np.mean(params.sigma2_sa)), params.channel_variance)


@dataclass
class InnerSolution:
    t: float
    q_cov_t: np.ndarray | None
    an_cov_t: np.ndarray | None
    rho_t: np.ndarray | None
    slack: np.ndarray | None
    xi: float | None
    theta: float | None
    status: str
    outcome: SolverOutcome | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def f_tilde(self) -> float:
        return self.theta if self.optimal else -np.inf


def energy_feasibility(params: SystemParams, channels: ChannelSet, *, backend=None,
                       tol: float = DEFAULT_TOL) -> tuple[str, float]:
    """Check whether the energy-harvesting and power constraints can be met.

    They depend only on ``W = Q + V``, so the check maximizes the smallest
    relative energy margin over ``W >= 0, tr W <= P``. Returns the solver
    status and the margin; the instance is feasible iff the status is
    optimal and the margin is non-negative. The change of variables in
    :func:`build_inner` cannot make this distinction itself: an infeasible
    instance only degenerates towards ``xi -> 0``.
    """
    u = Units.for_problem(params)
    hu = channels.h_users / np.sqrt(u.gain)
    he = channels.h_eves / np.sqrt(u.gain)
    p_tot = params.p_total * u.gain / u.power
    prog = ConicProgram("energy_feasibility")
    W = prog.hermitian("W", params.n_tx)
    m = prog.scalar("margin")
    prog.maximize(m)
    prog.add_psd_block(W, "w_psd")
    prog.add_le(W.trace(), p_tot, "power")
    for k in range(params.n_users):
        need = params.e_bar_s / params.eta_s[k] / u.power
        floor = params.sigma2_sa[k] / u.power
        prog.add_ge((W.quad(hu[k]) + floor - need) / max(need, floor), m, f"user_eh[{k}]")
    for l in range(params.n_eves):
        need = params.e_bar_e / params.eta_e[l] / u.power
        floor = params.n_eve_rx * params.sigma2_ea[l] / u.power
        prog.add_ge((W.congruence(he[l]).trace() + floor - need) / max(need, floor), m, f"eve_eh[{l}]")
    out = prog.solve(backend, tol)
    if out.status != OPTIMAL:
        return out.status, -np.inf
    return OPTIMAL, float(out.variable_values["margin"])


def eve_null_basis(channels: ChannelSet, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (``N_T x r``, possibly ``r = 0``) of the directions
    no eavesdropper antenna receives."""
    g = np.concatenate(list(channels.h_eves), axis=1) if channels.n_eves else np.zeros((channels.n_tx, 0))
    if g.shape[1] == 0:
        return np.eye(channels.n_tx, dtype=complex)
    _, sv, vh = np.linalg.svd(g.conj().T)
    rank = int(np.count_nonzero(sv > rel_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    return vh[rank:].conj().T


def build_inner(params: SystemParams, channels: ChannelSet, t: float,
                rho_eps: float = RHO_EPS, *, q_basis=None, v_basis=None) -> ConicProgram:
    """Assemble the relaxed inner program (normalized units, see module doc).

    ``q_basis`` / ``v_basis`` (``N_T x r`` with orthonormal columns) restrict
    ``Q~ = B X B^H`` and ``V~ = B Y B^H`` to a subspace, with ``X, Y >= 0``.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    channels.check(params)
    u = Units.for_problem(params)
    K, L, nt, ne = params.n_users, params.n_eves, params.n_tx, params.n_eve_rx
    hu = channels.h_users / np.sqrt(u.gain)
    he = channels.h_eves / np.sqrt(u.gain)
    s2_sa = params.sigma2_sa / u.power
    s2_sp = params.sigma2_sp / u.power
    s2_ea = params.sigma2_ea / u.power
    s2_e = params.sigma2_e / u.power
    p_tot = params.p_total * u.gain / u.power
    e_s = (1.0 + ENERGY_BACKOFF) * params.e_bar_s / params.eta_s / u.power
    e_e = (1.0 + ENERGY_BACKOFF) * params.e_bar_e / params.eta_e / u.power

    if t == 1.0:
        # zero leakage: Q~ lives in the common null space of the eavesdropper
        # channels (a zero column when that space is trivial) and the LMI
        # is dropped; it has no interior at t = 1
        null = eve_null_basis(channels)
        if q_basis is not None:
            null = np.linalg.qr(null @ (null.conj().T @ np.asarray(q_basis)))[0] if null.shape[1] else null
        q_basis = null if null.shape[1] else np.zeros((nt, 1))

    prog = ConicProgram(f"inner(t={t:.6g})")
    xq = prog.hermitian("Q", nt if q_basis is None else q_basis.shape[1])
    xv = prog.hermitian("V", nt if v_basis is None else v_basis.shape[1])
    Q = xq if q_basis is None else xq.congruence(np.asarray(q_basis).conj().T)
    if q_basis is not None and not np.any(q_basis):
        prog.add_eq(xq.trace(), 0.0, "q_zero")
    V = xv if v_basis is None else xv.congruence(np.asarray(v_basis).conj().T)
    rho = prog.vector("rho", K)
    s = prog.vector("s", K)
    xi = prog.scalar("xi")
    theta = prog.scalar("theta")
    prog.maximize(theta)

    prog.add_psd_block(xq, "q_psd")
    prog.add_psd_block(xv, "v_psd")
    for k in range(K):
        prog.add_ge(Q.quad(hu[k]), theta, f"user_sinr[{k}]")
    for k in range(K):
        prog.add_eq(V.quad(hu[k]) + xi * s2_sa[k] + s[k], 1.0, f"normalization[{k}]")
    for l in range(L if t < 1.0 else 0):
        noise = HermAffine.scaled(xi * s2_e[l], np.eye(ne))
        lmi = (1.0 - t) * (V.congruence(he[l]) + noise) - t * Q.congruence(he[l])
        prog.add_psd_block(lmi, f"eve_lmi[{l}]")
    for k in range(K):
        prog.add_rotated_soc(s[k], rho[k], np.sqrt(s2_sp[k]) * xi, f"slack_soc[{k}]")
    for k in range(K):
        a_k = Q.quad(hu[k]) + V.quad(hu[k]) + xi * s2_sa[k]
        # a_k is of order xi * P * ||h_k||^2 while xi - rho_k is of order xi
        balance = np.sqrt(1.0 + p_tot * np.sum(np.abs(hu[k]) ** 2))
        prog.add_rotated_soc(a_k, xi - rho[k], np.sqrt(e_s[k]) * xi, f"user_eh[{k}]", balance=balance)
    for l in range(L):
        harvested = Q.congruence(he[l]).trace() + V.congruence(he[l]).trace()
        prog.add_ge(harvested, xi * (e_e[l] - ne * s2_ea[l]), f"eve_eh[{l}]")
    prog.add_le(Q.trace() + V.trace(), xi * p_tot, "power")
    for k in range(K):
        prog.add_ge(rho[k], rho_eps, f"rho_lower[{k}]")
        prog.add_le(rho[k], xi, f"rho_upper[{k}]")
    prog.add_ge(xi, rho_eps, "xi_lower")
    prog.add_ge(theta, 0.0, "theta_lower")
    prog.handles = {"Q": Q, "V": V, "rho": rho, "s": s, "xi": xi, "theta": theta}
    prog.bases = (q_basis, v_basis)
    return prog


def solve_inner(params: SystemParams, channels: ChannelSet, t: float, *, backend=None,
                tol: float = DEFAULT_TOL, check_energy: bool = True) -> InnerSolution:
    """Solve the relaxed inner problem; ``status`` is optimal, infeasible or
    numerical_failure (unbounded cannot occur for a valid instance).

    ``check_energy=False`` skips :func:`energy_feasibility`; callers that
    evaluate many ``t`` for one instance run it once themselves.
    """
    if check_energy:
        status, margin = energy_feasibility(params, channels, backend=backend, tol=tol)
        if status != OPTIMAL or margin < -ENERGY_MARGIN_TOL:
            st = INFEASIBLE if status in (OPTIMAL, INFEASIBLE) else NUMERICAL_FAILURE
            return InnerSolution(t, None, None, None, None, None, None, st)
    prog = build_inner(params, channels, t)
    out = prog.solve(backend, tol)
    if out.status != OPTIMAL:
        status = INFEASIBLE if out.status == INFEASIBLE else NUMERICAL_FAILURE
        sol = InnerSolution(t, None, None, None, None, None, None, status, out)
    else:
        sol = _solution_from(out, params, t, prog.bases)
    _maybe_trace(sol)
    return sol


def _lift(x: np.ndarray, basis) -> np.ndarray:
    x = hermitize(x)
    return x if basis is None else basis @ x @ basis.conj().T


def _solution_from(out, params: SystemParams, t: float, bases=(None, None)) -> InnerSolution:
    u = Units.for_problem(params)
    v = out.variable_values
    return InnerSolution(
        t=t,
        q_cov_t=hermitize(_lift(v["Q"], bases[0]) / u.gain),
        an_cov_t=hermitize(_lift(v["V"], bases[1]) / u.gain),
        rho_t=np.asarray(v["rho"]) / u.power,
        slack=np.asarray(v["s"]),
        xi=float(v["xi"]) / u.power,
        theta=float(v["theta"]),
        status=OPTIMAL,
        outcome=out,
    )


def min_trace_solution(params: SystemParams, channels: ChannelSet, sol: InnerSolution, *, backend=None,
                       tol: float = DEFAULT_TOL, rel_gap: float = TIE_BREAK_GAP) -> InnerSolution:
    """Among (near-)optimal points at ``sol.t``, the one with least ``tr Q~``.

    Interior-point solvers return a point in the relative interior of the
    optimal face, i.e. one of maximal rank. Re-solving with
    ``theta >= (1 - rel_gap) theta*`` and minimizing the information power
    picks a low-rank point of that face instead. Falls back to ``sol`` when
    the second solve does not succeed.
    """
    if not sol.optimal:
        return sol
    prog = build_inner(params, channels, sol.t)
    h = prog.handles
    prog.add_ge(h["theta"], sol.theta * (1.0 - rel_gap), "theta_floor")
    prog.minimize(h["Q"].trace())
    out = prog.solve(backend, tol)
    if out.status != OPTIMAL:
        log.debug("tie-break solve at t=%g returned %s; keeping the first solution", sol.t, out.status)
        return sol
    return _solution_from(out, params, sol.t, prog.bases)


def _max_residual(sol: InnerSolution, params: SystemParams, channels: ChannelSet) -> float:
    return max(problem_residuals(recover_design(sol, params), params, channels, sol.t).values())


def _restricted_solve(params, channels, sol, bases, backend, tol, rel_gap, max_resid):
    prog = build_inner(params, channels, sol.t, q_basis=bases[0], v_basis=bases[1])
    out = prog.solve(backend, tol)
    if out.status != OPTIMAL or out.variable_values["theta"] < sol.theta * (1.0 - rel_gap):
        return None
    new = _solution_from(out, params, sol.t, prog.bases)
    return new if _max_residual(new, params, channels) <= max_resid else None


def reduce_rank(params: SystemParams, channels: ChannelSet, sol: InnerSolution, *, backend=None,
                tol: float = DEFAULT_TOL, rel_gap: float = REDUCE_GAP,
                rank_tol: float = DEFAULT_RANK_TOL) -> InnerSolution:
    """Re-solve on the leading eigenspaces of ``Q~`` and then ``V~``.

    For ``r = 1, 2, ...`` below the numerical rank, the program is restricted
    to ``Q~ = U_r X U_r^H`` with the ``r`` leading eigenvectors; the first
    ``r`` whose optimum stays within ``rel_gap`` of ``theta*`` is kept, and
    the same is then done for ``V~``. Every accepted point is exactly
    feasible for the unrestricted program, so this only removes the small
    trailing eigenvalues that an inexact interior-point solution carries.
    A restricted point is also rejected when its recovered design violates
    the physical constraints by more than ``REDUCE_RESIDUAL`` (or the
    original point's violation, if larger).
    """
    if not sol.optimal:
        return sol
    max_resid = max(REDUCE_RESIDUAL, _max_residual(sol, params, channels))
    bases = [None, None]
    for i, attr in enumerate(("q_cov_t", "an_cov_t")):
        cov = getattr(sol, attr)
        r_full = numerical_rank(cov, rank_tol)
        _, vecs = np.linalg.eigh(hermitize(cov))
        for r in range(1, r_full):
            trial = list(bases)
            trial[i] = vecs[:, -r:]
            new = _restricted_solve(params, channels, sol, trial, backend, tol, rel_gap, max_resid)
            if new is not None:
                sol, bases = new, trial
                break
    return sol


def _maybe_trace(sol: InnerSolution) -> None:
    path = os.environ.get(TRACE_ENV)
    if not path:
        return
    new = not Path(path).exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(["t", "status", "theta", "xi", "eig_q", "eig_v"])
        if sol.optimal:
            eq = " ".join(f"{x:.6e}" for x in np.linalg.eigvalsh(sol.q_cov_t))
            ev = " ".join(f"{x:.6e}" for x in np.linalg.eigvalsh(sol.an_cov_t))
            w.writerow([repr(sol.t), sol.status, repr(sol.theta), repr(sol.xi), eq, ev])
        else:
            w.writerow([repr(sol.t), sol.status, "", "", "", ""])


def _project_psd(m: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(hermitize(m))
    return hermitize((u * np.clip(w, 0.0, None)) @ u.conj().T)


def recover_design(sol: InnerSolution, params: SystemParams) -> TransmitDesign:
    """Undo the change of variables.

    ``rho~_k`` is first tightened to ``min(rho~_k, s2_sp xi^2 / s_k)`` so that the
    normalization equality holds exactly; this only relaxes the user energy
    constraint and leaves the objective unchanged.
    """
    if not sol.optimal:
        raise ValueError(f"cannot recover a design from a {sol.status} inner solution")
    xi = sol.xi
    slack = np.maximum(sol.slack, np.finfo(float).tiny)
    rho_t = np.minimum(sol.rho_t, params.sigma2_sp * xi**2 / slack)
    rho = np.clip(rho_t / xi, RHO_EPS, 1.0)
    return TransmitDesign(_project_psd(sol.q_cov_t / xi), _project_psd(sol.an_cov_t / xi), rho)


def problem_residuals(design: TransmitDesign, params: SystemParams, channels: ChannelSet,
                      t: float | None = None) -> dict[str, float]:
    """Relative violation of each constraint of the original (rank-relaxed)
    design problem. Zero means satisfied; ``t`` adds the eavesdropper LMI.

    Energies are measured against ``max(threshold, receiver noise floor)``,
    power against the budget, and the LMI against the largest power the
    eavesdropper could receive from the design plus its noise.
    """
    out = {}
    for k in range(params.n_users):
        e = user_energy(channels.h_users[k], design, k, params)
        out[f"user_eh[{k}]"] = max(0.0, params.e_bar_s - e) / max(params.e_bar_s, params.sigma2_sa[k])
    for l in range(params.n_eves):
        e = eve_energy(channels.h_eves[l], design.q_cov, design.an_cov, params, l)
        out[f"eve_eh[{l}]"] = max(0.0, params.e_bar_e - e) / max(params.e_bar_e, params.n_eve_rx * params.sigma2_ea[l])
    out["power"] = max(0.0, design.total_power - params.p_total) / params.p_total
    out["rho"] = float(max(0.0, -np.min(design.rho), np.max(design.rho) - 1.0))
    out["q_psd"] = max(0.0, -np.linalg.eigvalsh(design.q_cov)[0]) / max(np.real(np.trace(design.q_cov)), 1e-300)
    out["v_psd"] = max(0.0, -np.linalg.eigvalsh(design.an_cov)[0]) / max(params.p_total, 1e-300)
    if t is not None:
        ne = params.n_eve_rx
        for l in range(params.n_eves):
            he = channels.h_eves[l]
            a = (1.0 - t) * (he.conj().T @ design.an_cov @ he + params.sigma2_e[l] * np.eye(ne))
            b = t * (he.conj().T @ design.q_cov @ he)
            lam = np.linalg.eigvalsh(hermitize(a - b))[0]
            # received-power scale; the two sides can both vanish at t = 1
            scale = np.linalg.norm(he, 2) ** 2 * max(design.total_power, 0.0) + params.sigma2_e[l]
            out[f"eve_lmi[{l}]"] = max(0.0, -lam) / scale
    return out
