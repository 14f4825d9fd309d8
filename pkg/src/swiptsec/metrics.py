"""Closed-form rates, harvested energies and the achievable secrecy rate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hermitian import hermitize
from .model import ChannelSet, SystemParams


@dataclass(frozen=True)
class TransmitDesign:
    """Information covariance ``q_cov``, AN covariance ``an_cov``, user power
    splitting ratios ``rho`` and, when the design is rank one, the beamformer."""

    q_cov: np.ndarray
    an_cov: np.ndarray
    rho: np.ndarray
    beamformer: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "q_cov", hermitize(np.asarray(self.q_cov, dtype=complex)))
        object.__setattr__(self, "an_cov", hermitize(np.asarray(self.an_cov, dtype=complex)))
        object.__setattr__(self, "rho", np.atleast_1d(np.asarray(self.rho, dtype=float)))
        if self.beamformer is not None:
            object.__setattr__(self, "beamformer", np.asarray(self.beamformer, dtype=complex))

    @classmethod
    def from_beamformer(cls, q, an_cov, rho) -> "TransmitDesign":
        q = np.asarray(q, dtype=complex)
        return cls(np.outer(q, q.conj()), an_cov, rho, q)

    @property
    def total_power(self) -> float:
        return float(np.real(np.trace(self.q_cov) + np.trace(self.an_cov)))


@dataclass(frozen=True)
class DesignReport:
    user_rates: np.ndarray
    eve_rates_upper: np.ndarray
    secrecy_rate: float
    user_energies: np.ndarray
    eve_energies: np.ndarray
    eq22_noise: bool = field(default=True)

    def as_dict(self) -> dict:
        return {
            "secrecy_rate": self.secrecy_rate,
            "user_rates": self.user_rates.tolist(),
            "eve_rates_upper": self.eve_rates_upper.tolist(),
            "user_energies": self.user_energies.tolist(),
            "eve_energies": self.eve_energies.tolist(),
        }


def _qf(h, m) -> float:
    return float(np.real(np.vdot(h, m @ h)))


def _logdet_ratio(a: np.ndarray, b: np.ndarray) -> float:
    """log2 det(I + A^{-1} B) evaluated as log2 det(A + B) - log2 det(A)."""
    sa, la = np.linalg.slogdet(hermitize(a))
    sb, lb = np.linalg.slogdet(hermitize(a + b))
    if sa <= 0:
        return np.inf
    return max(0.0, float((lb - la) / np.log(2.0)))


def user_sinr(h, design: TransmitDesign, k: int, params: SystemParams) -> float:
    rho = float(design.rho[k])
    if not rho > 0:
        raise ValueError(f"power splitting ratio must be positive, got {rho}")
    denom = _qf(h, design.an_cov) + params.sigma2_sa[k] + params.sigma2_sp[k] / rho
    return max(0.0, _qf(h, design.q_cov)) / denom


def user_rate(h, design: TransmitDesign, k: int, params: SystemParams) -> float:
    """Achievable rate (bits/channel use) of user ``k`` under power splitting."""
    return float(np.log2(1.0 + user_sinr(h, design, k, params)))


def eve_rate_upper(h_e, q_cov, an_cov, params: SystemParams, l: int = 0, *, noise: bool = True) -> float:
    """Worst-case (rho_e = 1) eavesdropper rate.

    ``noise=False`` drops the combined noise term from the interference
    covariance; the rate is then infinite whenever ``H^H V H`` is singular.
    """
    h_e = np.asarray(h_e)
    ne = h_e.shape[1]
    interf = h_e.conj().T @ an_cov @ h_e
    if noise:
        interf = interf + params.sigma2_e[l] * np.eye(ne)
    return _logdet_ratio(interf, h_e.conj().T @ q_cov @ h_e)


def eve_rate_exact(h_e, q_cov, an_cov, rho_e: float, params: SystemParams, l: int = 0) -> float:
    """Eavesdropper rate when it routes a fraction ``rho_e`` to decoding."""
    if not 0.0 < rho_e <= 1.0:
        raise ValueError(f"rho_e must lie in (0, 1], got {rho_e}")
    h_e = np.asarray(h_e)
    ne = h_e.shape[1]
    interf = rho_e * (params.sigma2_ea[l] * np.eye(ne) + h_e.conj().T @ an_cov @ h_e) + params.sigma2_ep[l] * np.eye(ne)
    return _logdet_ratio(interf, rho_e * (h_e.conj().T @ q_cov @ h_e))


def user_energy(h, design: TransmitDesign, k: int, params: SystemParams) -> float:
    rho = float(design.rho[k])
    received = _qf(h, design.q_cov) + _qf(h, design.an_cov) + params.sigma2_sa[k]
    return float(params.eta_s[k] * (1.0 - rho) * received)


def eve_energy(h_e, q_cov, an_cov, params: SystemParams, l: int = 0) -> float:
    """Energy harvested by eavesdropper ``l`` in harvest-only mode."""
    h_e = np.asarray(h_e)
    ne = h_e.shape[1]
    tq = np.real(np.trace(h_e.conj().T @ q_cov @ h_e))
    tv = np.real(np.trace(h_e.conj().T @ an_cov @ h_e))
    return float(params.eta_e[l] * (tq + tv + ne * params.sigma2_ea[l]))


def achievable_secrecy_rate(design: TransmitDesign, channels: ChannelSet, params: SystemParams,
                            *, eq22_noise: bool = True) -> DesignReport:
    """Evaluate every user and eavesdropper at ``design``.

    The secrecy rate is min over users minus max over eavesdroppers, clamped
    at zero. ``eq22_noise=False`` evaluates the eavesdropper term without the
    receiver noise (see :func:`eve_rate_upper`).
    """
    K, L = channels.n_users, channels.n_eves
    ur = np.array([user_rate(channels.h_users[k], design, k, params) for k in range(K)])
    er = np.array([eve_rate_upper(channels.h_eves[l], design.q_cov, design.an_cov, params, l, noise=eq22_noise)
                   for l in range(L)])
    ue = np.array([user_energy(channels.h_users[k], design, k, params) for k in range(K)])
    ee = np.array([eve_energy(channels.h_eves[l], design.q_cov, design.an_cov, params, l) for l in range(L)])
    sr = float(np.min(ur) - np.max(er)) if L else float(np.min(ur))
    return DesignReport(ur, er, max(0.0, sr), ue, ee, eq22_noise)
