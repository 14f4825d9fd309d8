"""Quick invariant checks run by ``swiptsec selftest``.

Each check is a small, fixed-seed computation with a known answer or a
structural property; the full suites live in the test directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conic import INFEASIBLE, OPTIMAL, Affine, ConicProgram
from .harness import solve_instance
from .hermitian import embed_real, hermitize, quadratic_form
from .metrics import TransmitDesign, achievable_secrecy_rate, eve_rate_exact, eve_rate_upper
from .model import SystemParams, dbm_to_watts, generate_channels
from .oracle import brute_force_oracle
from .recovery import check_proposition1, extract_rank_one

RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitize(a)


def check_embedding() -> CheckResult:
    rng = np.random.default_rng(1)
    h = _random_hermitian(rng, 4)
    ev = np.sort(np.linalg.eigvalsh(h))
    ev2 = np.sort(np.linalg.eigvalsh(embed_real(h)))
    err = float(np.max(np.abs(ev2 - np.repeat(ev, 2))))
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    qerr = abs(quadratic_form(v, h) - np.real(np.vdot(v, h @ v)))
    return CheckResult("hermitian embedding spectrum", bool(err < 1e-10 and qerr < 1e-10),
                       f"max error {max(err, qerr):.1e}")


def check_tiny_programs() -> CheckResult:
    errs = []
    p = ConicProgram("soc")
    u, v = p.scalar("u"), p.scalar("v")
    p.add_rotated_soc(u, v, 2.0)
    p.minimize(u + v)
    errs.append(abs(p.solve().objective_value - 4.0))

    p = ConicProgram("sdp")
    x = p.symmetric("X", 2)
    p.add_psd_block(x)
    p.add_ge(x[0, 0], 1.0)
    p.minimize(x[0, 0] + x[1, 1])
    errs.append(abs(p.solve().objective_value - 1.0))

    p = ConicProgram("det")
    s = p.scalar("x")
    p.add_psd_block(_two_by_two(s))
    p.minimize(s)
    errs.append(abs(p.solve().objective_value - 1.0))

    p = ConicProgram("infeasible")
    s = p.scalar("x")
    p.add_ge(s, 1.0)
    p.add_le(s, 0.0)
    p.minimize(s)
    infeasible = p.solve().status == INFEASIBLE
    worst = max(errs)
    return CheckResult("tiny conic programs", worst < 1e-6 and infeasible,
                       f"max optimum error {worst:.1e}, infeasible detected: {infeasible}")


def _two_by_two(s: Affine) -> Affine:
    """``[[x, 1], [1, x]]`` as an affine matrix expression."""
    coef = np.zeros((2, 2, s.ncols))
    coef[0, 0] = coef[1, 1] = s.coef
    return Affine(coef, np.array([[0.0, 1.0], [1.0, 0.0]]))


def check_metrics() -> CheckResult:
    rng = np.random.default_rng(2)
    params = SystemParams()
    ch = generate_channels(params, 2)
    q = rng.standard_normal(params.n_tx) + 1j * rng.standard_normal(params.n_tx)
    q *= np.sqrt(0.3 * params.p_total) / np.linalg.norm(q)
    w = rng.standard_normal((params.n_tx, 2)) + 1j * rng.standard_normal((params.n_tx, 2))
    v = w @ w.conj().T
    v *= 0.5 * params.p_total / np.real(np.trace(v))
    worst = -np.inf
    for l in range(params.n_eves):
        for rho_e in (0.1, 0.5, 0.9):
            worst = max(worst, eve_rate_exact(ch.h_eves[l], np.outer(q, q.conj()), v, rho_e, params, l)
                        - eve_rate_upper(ch.h_eves[l], np.outer(q, q.conj()), v, params, l))
    design = TransmitDesign.from_beamformer(q, v, np.full(params.n_users, 0.5))
    rep = achievable_secrecy_rate(design, ch, params)
    ok = worst <= 1e-10 and rep.secrecy_rate >= 0.0
    return CheckResult("eavesdropper rate bound", ok, f"max(exact - upper) = {worst:.1e}")


def check_rank_one() -> CheckResult:
    rng = np.random.default_rng(3)
    q = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    qq = np.outer(q, q.conj())
    q2 = extract_rank_one(qq)
    err = float(np.linalg.norm(np.outer(q2, q2.conj()) - qq) / np.linalg.norm(q) ** 2)
    _, _, holds = check_proposition1(qq, qq, 3, 3)
    return CheckResult("rank-one extraction", err < 1e-6 and holds, f"reconstruction error {err:.1e}")


def check_pipeline() -> CheckResult:
    params = SystemParams(p_total=dbm_to_watts(30.0), e_bar_s=dbm_to_watts(0.0), e_bar_e=dbm_to_watts(0.0))
    ch = generate_channels(params, 0)
    res = solve_instance(params, ch)
    if res.status != OPTIMAL:
        return CheckResult("pipeline invariants", False, f"status {res.status}")
    worst = max(max(r.values()) for r in res.residuals(params, ch).values())
    ordered = res.rate_sdr <= res.rate_sdr_gr <= res.rate_upper + 1e-6
    return CheckResult("pipeline invariants", ordered and worst <= RESIDUAL_TOL,
                       f"rates {res.rate_sdr:.4f} <= {res.rate_sdr_gr:.4f} <= {res.rate_upper:.4f}, "
                       f"max residual {worst:.1e}")


def check_oracle() -> CheckResult:
    params = SystemParams(n_tx=2, n_users=1, n_eves=1, n_eve_rx=1, p_total=dbm_to_watts(10.0),
                          e_bar_s=dbm_to_watts(-30.0), e_bar_e=dbm_to_watts(-30.0))
    ch = generate_channels(params, 0)
    oracle = brute_force_oracle(params, ch).rate
    res = solve_instance(params, ch)
    gap = abs(res.rate_upper - oracle)
    return CheckResult("tiny instance vs oracle", gap <= 0.05 and res.rate_sdr_gr <= oracle + 0.05,
                       f"oracle {oracle:.4f}, upper {res.rate_upper:.4f}")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_embedding, check_tiny_programs, check_metrics, check_rank_one, check_pipeline, check_oracle)


def run_selftest() -> list[CheckResult]:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except Exception as exc:  # a crashing check is a failed check
            out.append(CheckResult(check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return out
