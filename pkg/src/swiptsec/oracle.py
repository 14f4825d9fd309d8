"""Brute-force secrecy-rate oracle for the smallest instance.

With two transmit antennas, one user and one single-antenna eavesdropper,
every design is described by six real numbers:

* ``f``: fraction of the power budget spent on the information beam,
* ``a, b``: beam direction ``(cos a, sin a e^{ib})`` (global phase is free),
* ``r, th, ps``: the AN covariance ``(1 - f) P / 2 (I + r n . sigma)`` with
  ``n`` the unit vector at polar angle ``th`` and azimuth ``ps`` (the Bloch
  ball covers every 2 x 2 PSD matrix of that trace).

Spending the full budget loses nothing: extra AN orthogonal to the user
channel leaves the user untouched, cannot raise the eavesdropper's rate and
only adds harvested energy. For a fixed beam and AN the user's rate
increases with its splitting ratio, so ``rho`` is the largest value meeting
its energy constraint. The oracle grids the six parameters, refines the
best grid points by a compass search and re-evaluates the winner through
:mod:`swiptsec.metrics`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import oracle_grid, oracle_values
from .metrics import TransmitDesign, achievable_secrecy_rate
from .model import ChannelSet, SystemParams
from .recovery import RHO_EPS

DEFAULT_RESOLUTION = 12
LOWER = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
UPPER = np.array([1.0, np.pi / 2, 2 * np.pi, 1.0, np.pi, 2 * np.pi])
PERIODIC = np.array([False, False, True, False, False, True])
N_STARTS = 16
N_SAMPLES = 20000
N_FRAMES = 8
MIN_STEP = 1e-7


@dataclass(frozen=True)
class OracleResult:
    rate: float  # clamped at 0; 0 when nothing is feasible
    feasible: bool
    x: np.ndarray | None  # (f, a, b, r, th, ps) of the best point
    design: TransmitDesign | None


def _check_tiny(params: SystemParams) -> None:
    dims = (params.n_tx, params.n_users, params.n_eves, params.n_eve_rx)
    if dims != (2, 1, 1, 1):
        raise ValueError(f"oracle needs (N_T, K, L, N_E) = (2, 1, 1, 1), got {dims}")


def pack_instance(params: SystemParams, channels: ChannelSet) -> np.ndarray:
    """Flat float vector consumed by the oracle kernels."""
    _check_tiny(params)
    channels.check(params)
    h = channels.h_users[0]
    g = channels.h_eves[0][:, 0]
    return np.array([
        h[0].real, h[0].imag, h[1].real, h[1].imag, g[0].real, g[0].imag, g[1].real, g[1].imag,
        params.p_total, params.sigma2_sa[0], params.sigma2_sp[0], params.sigma2_e[0], params.sigma2_ea[0],
        params.e_bar_s / params.eta_s[0], params.e_bar_e / params.eta_e[0], RHO_EPS,
    ])


def design_from_point(x, params: SystemParams, channels: ChannelSet) -> TransmitDesign:
    """Beamformer, AN covariance and splitting ratio of a parameter point."""
    f, a, b, r, th, ps = np.asarray(x, dtype=float)
    P = params.p_total
    q = np.sqrt(f * P) * np.array([np.cos(a), np.sin(a) * np.exp(1j * b)])
    n = r * np.array([np.sin(th) * np.cos(ps), np.sin(th) * np.sin(ps), np.cos(th)])
    pauli = n[0] * np.array([[0, 1], [1, 0]]) + n[1] * np.array([[0, -1j], [1j, 0]]) + n[2] * np.diag([1, -1])
    v = 0.5 * (1.0 - f) * P * (np.eye(2) + pauli)
    h = channels.h_users[0]
    received = abs(np.vdot(h, q)) ** 2 + np.real(np.vdot(h, v @ h)) + params.sigma2_sa[0]
    rho = min(1.0, 1.0 - params.e_bar_s / params.eta_s[0] / received)
    return TransmitDesign.from_beamformer(q, v, np.array([max(rho, RHO_EPS)]))


def _grid_axes(n: int) -> list[np.ndarray]:
    axes = []
    for lo, hi, per in zip(LOWER, UPPER, PERIODIC):
        axes.append(np.linspace(lo, hi, n, endpoint=not per))
    return axes


def _wrap(x: np.ndarray) -> np.ndarray:
    span = UPPER - LOWER
    x = np.where(PERIODIC, LOWER + np.mod(x - LOWER, span), x)
    return np.clip(x, LOWER, UPPER)


def _compass(inst: np.ndarray, x: np.ndarray, step: np.ndarray, rng: np.random.Generator
             ) -> tuple[float, np.ndarray]:
    """Pattern search over the coordinate axes plus fresh random
    orthonormal frames each iteration (so that thin feasible ridges, which
    the energy constraints create, can be followed); the step is halved
    when no move improves."""
    best = float(oracle_values(inst, x[None, :])[0])
    eye = np.eye(len(x))
    while step.max() > MIN_STEP:
        frames = [np.linalg.qr(rng.standard_normal((len(x), len(x))))[0].T for _ in range(N_FRAMES)]
        dirs = np.vstack([eye] + frames) * step
        trial = _wrap(np.vstack([x + dirs, x - dirs]))
        vals = oracle_values(inst, trial)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, x = float(vals[j]), trial[j]
        else:
            step = step / 2.0
    return best, x


def brute_force_oracle(params: SystemParams, channels: ChannelSet,
                       resolution: int = DEFAULT_RESOLUTION) -> OracleResult:
    """Best secrecy rate over all designs of a tiny instance.

    ``resolution`` is the number of grid points per parameter. The grid
    maximum and the best points of a fixed-seed uniform sample seed a
    pattern search whose final step is far below the grid spacing, so the
    result is insensitive to ``resolution`` once the grid resolves the right basin (halving the
    spacing from the default changes the value by far less than 0.01 bits
    on the seeded test instances).
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    inst = pack_instance(params, channels)
    axes = _grid_axes(resolution)
    value, idx = oracle_grid(inst, axes)
    if not np.isfinite(value):
        return OracleResult(0.0, False, None, None)

    spacing = (UPPER - LOWER) / (resolution - 1)
    rng = np.random.default_rng(0)
    # seeds: the grid maximum and the best of a uniform random sample
    sample = LOWER + (UPPER - LOWER) * rng.uniform(size=(N_SAMPLES, 6))
    vals = oracle_values(inst, sample)
    order = np.argsort(-vals, kind="stable")[:N_STARTS - 1]
    starts = [np.array([ax[i] for ax, i in zip(axes, idx)])] + [sample[i] for i in order if np.isfinite(vals[i])]
    best, best_x = -np.inf, starts[0]
    for x in starts:
        val, x = _compass(inst, x, spacing / 2.0, rng)
        if val > best:
            best, best_x = val, x
    design = design_from_point(best_x, params, channels)
    rate = achievable_secrecy_rate(design, channels, params).secrecy_rate
    return OracleResult(max(0.0, rate), True, best_x, design)
