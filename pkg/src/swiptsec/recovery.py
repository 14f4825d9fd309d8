"""Rank checks, rank-one extraction and Gaussian randomization."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .hermitian import DEFAULT_RANK_TOL, hermitize, numerical_rank, psd_eigh
from .inner import ENERGY_BACKOFF, RHO_EPS
from .kernels import score_candidates
from .metrics import TransmitDesign, achievable_secrecy_rate
from .model import ChannelSet, SystemParams

log = logging.getLogger(__name__)

DIRECT = "direct-eigenvector"
RANDOMIZATION = "gaussian-randomization"
DEFAULT_N_RAND = 100
# relative slack on the eavesdropper-energy and power checks, so that the
# candidate reproducing a boundary solution is not lost to roundoff
FEAS_RTOL = 1e-9


@dataclass(frozen=True)
class RecoveryReport:
    rank_q: int
    rank_v: int
    prop1_holds: bool
    method: str
    n_candidates_tried: int
    n_feasible: int
    best_rate: float
    fallback: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def check_proposition1(q_cov, an_cov, n_users: int, n_eves: int,
                       rel_tol: float = DEFAULT_RANK_TOL) -> tuple[int, int, bool]:
    """Ranks of ``Q`` and ``V`` and whether rank(Q) <= K and
    rank(Q)^2 + rank(V)^2 <= 2K + L."""
    rq = numerical_rank(q_cov, rel_tol)
    rv = numerical_rank(an_cov, rel_tol)
    return rq, rv, bool(rq <= n_users and rq * rq + rv * rv <= 2 * n_users + n_eves)


def principal_component(q_cov) -> np.ndarray:
    """sqrt(lambda_1) u_1 for the largest eigenpair of a PSD matrix."""
    w, u = psd_eigh(q_cov)
    return np.sqrt(w[-1]) * u[:, -1]


def extract_rank_one(q_cov, rel_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Beamformer ``q`` with ``q q^H = Q`` for a numerically rank-one ``Q``.

    Raises ``ValueError`` when the rank exceeds one.
    """
    q_cov = hermitize(np.asarray(q_cov, dtype=complex))
    r = numerical_rank(q_cov, rel_tol)
    if r != 1:
        raise ValueError(f"covariance has numerical rank {r}, expected 1")
    return principal_component(q_cov)


def direct_extraction(q_cov, an_cov, rho, params: SystemParams, channels: ChannelSet, *,
                      eq22_noise: bool = True, rank_tol: float = DEFAULT_RANK_TOL
                      ) -> tuple[TransmitDesign, RecoveryReport]:
    """Rank-one design ``q q^H`` from a rank-one ``Q``, keeping ``V`` and ``rho``."""
    q = extract_rank_one(q_cov, rank_tol)
    rq, rv, holds = check_proposition1(q_cov, an_cov, params.n_users, params.n_eves, rank_tol)
    design = TransmitDesign.from_beamformer(q, an_cov, rho)
    rate = achievable_secrecy_rate(design, channels, params, eq22_noise=eq22_noise).secrecy_rate
    return design, RecoveryReport(rq, rv, holds, DIRECT, 1, 1, rate)


def _eve_inverse(he, an_cov, params: SystemParams, noise: bool) -> np.ndarray:
    ne = params.n_eve_rx
    out = np.empty((params.n_eves, ne, ne), dtype=complex)
    for l in range(params.n_eves):
        a = he[l].conj().T @ an_cov @ he[l]
        if noise:
            a = a + params.sigma2_e[l] * np.eye(ne)
        else:
            # without receiver noise a singular interference covariance means
            # unbounded leakage; a tiny ridge keeps the ranking finite
            a = a + 1e-12 * max(np.real(np.trace(a)), params.sigma2_e[l]) * np.eye(ne)
        out[l] = np.linalg.inv(hermitize(a))
    return out


def _score(cands: np.ndarray, an_cov, params: SystemParams, channels: ChannelSet, eq22_noise: bool):
    """Rates (``-inf`` when infeasible) and re-selected ``rho`` per candidate."""
    hu, he = channels.h_users, channels.h_eves
    v_quad = np.real(np.einsum("kn,nm,km->k", hu.conj(), an_cov, hu))
    tv = np.real(np.einsum("lnm,np,lpm->l", he.conj(), an_cov, he))
    p_budget = params.p_total * (1.0 + FEAS_RTOL) - float(np.real(np.trace(an_cov)))
    # rho is re-selected against the same backed-off threshold the relaxation used
    e_s = (1.0 + ENERGY_BACKOFF) * params.e_bar_s / params.eta_s
    return score_candidates(
        np.ascontiguousarray(cands), np.ascontiguousarray(hu), v_quad, params.sigma2_sa, params.sigma2_sp,
        e_s, np.ascontiguousarray(he), _eve_inverse(he, an_cov, params, eq22_noise),
        tv + params.n_eve_rx * params.sigma2_ea, params.e_bar_e / params.eta_e * (1.0 - FEAS_RTOL), p_budget, RHO_EPS)


def _principal_candidate(w: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u[:, -1] * np.sqrt(np.sum(w))


def principal_design(q_cov, an_cov, params: SystemParams, channels: ChannelSet, *,
                     eq22_noise: bool = True) -> TransmitDesign | None:
    """Rank-one design along the principal eigenvector of ``Q``.

    ``q0 = sqrt(tr Q) u_1`` with ``V`` fixed and each user's ``rho`` set to
    the largest value meeting its energy constraint, exactly as candidate 0
    of :func:`gaussian_randomization`. Returns ``None`` when this design
    violates a constraint.
    """
    q_cov = hermitize(np.asarray(q_cov, dtype=complex))
    an_cov = hermitize(np.asarray(an_cov, dtype=complex))
    q0 = _principal_candidate(*psd_eigh(q_cov))
    rates, rhos = _score(q0[None, :], an_cov, params, channels, eq22_noise)
    if not np.isfinite(rates[0]):
        return None
    return TransmitDesign.from_beamformer(q0, an_cov, rhos[0])


def gaussian_randomization(q_cov, an_cov, rho_init, params: SystemParams, channels: ChannelSet,
                           n_rand: int = DEFAULT_N_RAND, seed: int = 0, *, eq22_noise: bool = True,
                           rank_tol: float = DEFAULT_RANK_TOL) -> tuple[TransmitDesign, RecoveryReport]:
    """Rank-one design from relaxed covariances by Gaussian randomization.

    Candidates are ``Q^{1/2} z`` with ``z ~ CN(0, I)`` plus the principal
    eigenvector (always candidate 0, see :func:`principal_design`), each
    scaled to ``||q||^2 = tr Q`` while ``V`` stays fixed. Each user's
    splitting ratio is re-selected as the largest value meeting its energy
    constraint; candidates violating any energy, power or ratio constraint
    are dropped. The best remaining candidate (lowest index on ties) is
    returned. If none survives, the relaxed design itself is returned with
    ``fallback=True``.
    """
    if n_rand < 1:
        raise ValueError("n_rand must be at least 1")
    q_cov = hermitize(np.asarray(q_cov, dtype=complex))
    an_cov = hermitize(np.asarray(an_cov, dtype=complex))
    rho_init = np.asarray(rho_init, dtype=float)
    rq, rv, holds = check_proposition1(q_cov, an_cov, params.n_users, params.n_eves, rank_tol)

    w, u = psd_eigh(q_cov)
    power_q = float(np.sum(w))
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n_rand, params.n_tx)) + 1j * rng.standard_normal((n_rand, params.n_tx))) / np.sqrt(2)
    rand = z @ (u * np.sqrt(w)).T  # rows q_i = Q^{1/2} z_i
    norms = np.linalg.norm(rand, axis=1)
    norms[norms == 0.0] = 1.0
    cands = np.vstack([_principal_candidate(w, u), rand * (np.sqrt(power_q) / norms)[:, None]])

    rates, rhos = _score(cands, an_cov, params, channels, eq22_noise)
    feasible = np.isfinite(rates)
    n_feasible = int(np.count_nonzero(feasible))
    method = DIRECT if rq == 1 else RANDOMIZATION

    if n_feasible == 0:
        log.warning("no feasible randomization candidate; keeping the relaxed design")
        design = TransmitDesign(q_cov, an_cov, np.clip(rho_init, RHO_EPS, 1.0))
        rate = achievable_secrecy_rate(design, channels, params, eq22_noise=eq22_noise).secrecy_rate
        return design, RecoveryReport(rq, rv, holds, method, len(cands), 0, rate, fallback=True)

    best = int(np.argmax(np.where(feasible, rates, -np.inf)))  # first maximum
    design = TransmitDesign.from_beamformer(cands[best], an_cov, rhos[best])
    rate = achievable_secrecy_rate(design, channels, params, eq22_noise=eq22_noise).secrecy_rate
    if best != 0 and feasible[0]:
        # scores and the reported rate come from different code paths;
        # never return less than the principal candidate
        d0 = TransmitDesign.from_beamformer(cands[0], an_cov, rhos[0])
        r0 = achievable_secrecy_rate(d0, channels, params, eq22_noise=eq22_noise).secrecy_rate
        if r0 >= rate:
            design, rate = d0, r0
    return design, RecoveryReport(rq, rv, holds, method, len(cands), n_feasible, rate)
