"""Hot loops: Gaussian-randomization candidate scoring and the tiny-instance
oracle grid.

Each kernel has a numba implementation and a plain numpy one with the same
signature. Numba is used when it imports and ``SWIPTSEC_DISABLE_NUMBA`` is
unset (or ``0``); :data:`BACKEND` reports the choice. The ``*_numpy`` and
``*_numba`` variants stay importable so the benchmark can time both; the
numba variants fall back to interpreted loops if numba is missing.
"""

from __future__ import annotations

import math
import os

import numpy as np

DISABLE_ENV = "SWIPTSEC_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get(DISABLE_ENV, "").strip().lower() in ("", "0", "false", "no")
BACKEND = "numba" if USE_NUMBA else "numpy"

LN2 = math.log(2.0)


def _jit(fn):
    # loop kernels are compiled whenever numba imports, so the benchmark can
    # time both paths in one process; USE_NUMBA only selects the dispatch
    return numba.njit(cache=True)(fn) if HAVE_NUMBA else fn


# -- Gaussian randomization -----------------------------------------------

def score_candidates_numpy(cands, hu, v_quad, s2_sa, s2_sp, e_user, he, a_inv, eve_base, e_eve,
                           p_budget, rho_eps):
    """Score rank-one candidates ``q`` (rows of ``cands``) against a fixed AN.

    Parameters
    ----------
    cands : (C, N) complex
    hu : (K, N) complex user channels
    v_quad, s2_sa, s2_sp : (K,) AN power at each user and noise variances
    e_user : (K,) required received power ``E_s / eta_s`` at each user
    he : (L, N, M) complex eavesdropper channels
    a_inv : (L, M, M) inverse interference-plus-noise covariance per eavesdropper
    eve_base : (L,) harvested power from AN and antenna noise
    e_eve : (L,) required received power ``E_e / eta_e``
    p_budget : float
        Largest admissible ``||q||^2``.
    rho_eps : float
        Smallest admissible power splitting ratio.

    Returns
    -------
    rate : (C,) secrecy rate, ``-inf`` for rejected candidates
    rho : (C, K) re-selected splitting ratios
    """
    gain_u = np.abs(cands.conj() @ hu.T) ** 2  # |h_k^H q|^2, (C, K)
    received = gain_u + v_quad + s2_sa
    rho = np.minimum(1.0, 1.0 - e_user / received)
    ok = np.all(rho >= rho_eps, axis=1)
    rho = np.maximum(rho, rho_eps)
    sinr = gain_u / (v_quad + s2_sa + s2_sp / rho)
    r_user = np.min(np.log1p(sinr), axis=1) / LN2

    g = np.einsum("lnm,cn->clm", he.conj(), cands)  # H_l^H q, (C, L, M)
    quad = np.real(np.einsum("clm,lmp,clp->cl", g.conj(), a_inv, g))
    r_eve = np.max(np.log1p(np.maximum(quad, 0.0)), axis=1) / LN2 if he.shape[0] else np.zeros(len(cands))
    harvested = np.sum(np.abs(g) ** 2, axis=2) + eve_base
    ok &= np.all(harvested >= e_eve, axis=1)
    ok &= np.sum(np.abs(cands) ** 2, axis=1) <= p_budget
    rate = np.where(ok, r_user - r_eve, -np.inf)
    return rate, rho


@_jit
def _score_candidates_loop(cands, hu, v_quad, s2_sa, s2_sp, e_user, he, a_inv, eve_base, e_eve,
                           p_budget, rho_eps):
    C, N = cands.shape
    K = hu.shape[0]
    L, _, M = he.shape
    rate = np.empty(C)
    rho = np.empty((C, K))
    g = np.empty(M, dtype=np.complex128)
    for c in range(C):
        ok = True
        pw = 0.0
        for n in range(N):
            pw += cands[c, n].real ** 2 + cands[c, n].imag ** 2
        if pw > p_budget:
            ok = False
        r_user = np.inf
        for k in range(K):
            acc = 0j
            for n in range(N):
                acc += np.conj(hu[k, n]) * cands[c, n]
            gain = acc.real ** 2 + acc.imag ** 2
            r = min(1.0, 1.0 - e_user[k] / (gain + v_quad[k] + s2_sa[k]))
            if r < rho_eps:
                ok = False
                r = rho_eps
            rho[c, k] = r
            sinr = gain / (v_quad[k] + s2_sa[k] + s2_sp[k] / r)
            r_user = min(r_user, math.log1p(sinr) / LN2)
        r_eve = 0.0
        for l in range(L):
            harvested = eve_base[l]
            for m in range(M):
                acc = 0j
                for n in range(N):
                    acc += np.conj(he[l, n, m]) * cands[c, n]
                g[m] = acc
                harvested += acc.real ** 2 + acc.imag ** 2
            if harvested < e_eve[l]:
                ok = False
            quad = 0.0
            for i in range(M):
                row = 0j
                for j in range(M):
                    row += a_inv[l, i, j] * g[j]
                quad += (np.conj(g[i]) * row).real
            r_eve = max(r_eve, math.log1p(max(quad, 0.0)) / LN2)
        rate[c] = r_user - r_eve if ok else -np.inf
    return rate, rho


# -- tiny-instance oracle ---------------------------------------------------
#
# Geometry for N_T = 2, K = L = N_E = 1 with full power use:
#   q = sqrt(f P) (cos a, sin a e^{i b})
#   V = (1 - f) P / 2 (I + r (sin th cos ps X + sin th sin ps Y + cos th Z))
# with Pauli matrices X, Y, Z, so (r, th, ps) sweeps the whole Bloch ball and
# V every PSD matrix of trace (1 - f) P. ``inst`` is a float array
#   [Re h0, Im h0, Re h1, Im h1, Re g0, Im g0, Re g1, Im g1,
#    P, s2_sa, s2_sp, s2_e, s2_ea, e_user, e_eve, rho_eps]
# and a point is x = (f, a, b, r, th, ps).

def oracle_values_numpy(inst, x):
    """Secrecy rate at each row of ``x`` (``-inf`` where infeasible)."""
    inst = np.asarray(inst, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    h0, h1, g0, g1 = inst[0:8:2] + 1j * inst[1:8:2]
    P, s2_sa, s2_sp, s2_e, s2_ea, e_user, e_eve, rho_eps = inst[8:16]
    f, a, b, r, th, ps = x.T
    ca, q1 = np.cos(a), np.sin(a) * np.exp(1j * b)
    gain_u = f * P * np.abs(np.conj(h0) * ca + np.conj(h1) * q1) ** 2
    gain_e = f * P * np.abs(np.conj(g0) * ca + np.conj(g1) * q1) ** 2
    nx, ny, nz = r * np.sin(th) * np.cos(ps), r * np.sin(th) * np.sin(ps), r * np.cos(th)

    def bloch(x0, x1):
        a0, a1 = abs(x0) ** 2, abs(x1) ** 2
        return 0.5 * (1.0 - f) * P * (a0 + a1 + nz * (a0 - a1) + 2.0 * np.real(np.conj(x0) * x1 * (nx - 1j * ny)))

    vu, ve = bloch(h0, h1), bloch(g0, g1)
    rho = np.minimum(1.0, 1.0 - e_user / (gain_u + vu + s2_sa))
    ok = (rho >= rho_eps) & (gain_e + ve + s2_ea >= e_eve)
    sinr = gain_u / (vu + s2_sa + s2_sp / np.maximum(rho, rho_eps))
    val = (np.log1p(sinr) - np.log1p(gain_e / (ve + s2_e))) / LN2
    return np.where(ok, val, -np.inf)


def oracle_grid_numpy(inst, axes):
    """Best value over the Cartesian grid ``axes = (f, a, b, r, th, ps)``.

    Returns ``(value, index)`` with ``index`` the 6-tuple of grid indices
    (all ``-1`` when no point is feasible). Evaluated one ``f`` slice at a
    time to bound memory.
    """
    axes = [np.asarray(ax, dtype=float) for ax in axes]
    best, idx = -np.inf, (-1,) * 6
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, 5)
    for i0, f in enumerate(axes[0]):
        x = np.column_stack([np.full(len(rest), f), rest])
        val = oracle_values_numpy(inst, x)
        j = int(np.argmax(val))
        if val[j] > best:
            best = float(val[j])
            idx = (i0,) + tuple(int(i) for i in np.unravel_index(j, [len(ax) for ax in axes[1:]]))
    return best, idx


@_jit
def _oracle_value(inst, f, a, b, r, th, ps):
    P, s2_sa, s2_sp, s2_e, s2_ea, e_user, e_eve, rho_eps = (inst[8], inst[9], inst[10], inst[11], inst[12],
                                                             inst[13], inst[14], inst[15])
    ca = math.cos(a)
    q1r, q1i = math.sin(a) * math.cos(b), math.sin(a) * math.sin(b)
    nx = r * math.sin(th) * math.cos(ps)
    ny = r * math.sin(th) * math.sin(ps)
    nz = r * math.cos(th)
    out = np.empty(4)
    for j in range(2):  # j = 0: user, 1: eavesdropper
        x0r, x0i, x1r, x1i = inst[4 * j], inst[4 * j + 1], inst[4 * j + 2], inst[4 * j + 3]
        # conj(x0) * cos a + conj(x1) * q1
        pr = x0r * ca + x1r * q1r + x1i * q1i
        pi = -x0i * ca + x1r * q1i - x1i * q1r
        a0 = x0r * x0r + x0i * x0i
        a1 = x1r * x1r + x1i * x1i
        # Re(conj(x0) x1 (nx - i ny))
        cr = x0r * x1r + x0i * x1i
        ci = x0r * x1i - x0i * x1r
        cross = cr * nx + ci * ny
        out[2 * j] = f * P * (pr * pr + pi * pi)
        out[2 * j + 1] = 0.5 * (1.0 - f) * P * (a0 + a1 + nz * (a0 - a1) + 2.0 * cross)
    gain_u, vu, gain_e, ve = out[0], out[1], out[2], out[3]
    rho = min(1.0, 1.0 - e_user / (gain_u + vu + s2_sa))
    if rho < rho_eps or gain_e + ve + s2_ea < e_eve:
        return -np.inf
    sinr = gain_u / (vu + s2_sa + s2_sp / rho)
    return (math.log1p(sinr) - math.log1p(gain_e / (ve + s2_e))) / LN2


@_jit
def _oracle_values_loop(inst, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _oracle_value(inst, x[i, 0], x[i, 1], x[i, 2], x[i, 3], x[i, 4], x[i, 5])
    return out


@_jit
def _oracle_grid_loop(inst, f, a, b, r, th, ps):
    best = -np.inf
    idx = np.full(6, -1)
    for i0 in range(f.size):
        for i1 in range(a.size):
            for i2 in range(b.size):
                for i3 in range(r.size):
                    for i4 in range(th.size):
                        for i5 in range(ps.size):
                            v = _oracle_value(inst, f[i0], a[i1], b[i2], r[i3], th[i4], ps[i5])
                            if v > best:
                                best = v
                                idx[0], idx[1], idx[2], idx[3], idx[4], idx[5] = i0, i1, i2, i3, i4, i5
    return best, idx


def oracle_values_numba(inst, x):
    x = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
    return _oracle_values_loop(np.asarray(inst, dtype=float), x)


def oracle_grid_numba(inst, axes):
    axes = [np.ascontiguousarray(ax, dtype=float) for ax in axes]
    best, idx = _oracle_grid_loop(np.asarray(inst, dtype=float), *axes)
    return float(best), tuple(int(i) for i in idx)


score_candidates_numba = _score_candidates_loop


def score_candidates(*args):
    if USE_NUMBA:
        return score_candidates_numba(*args)
    return score_candidates_numpy(*args)


def oracle_grid(inst, axes):
    if USE_NUMBA:
        return oracle_grid_numba(inst, axes)
    return oracle_grid_numpy(inst, axes)


def oracle_values(inst, x):
    if USE_NUMBA:
        return oracle_values_numba(inst, x)
    return oracle_values_numpy(inst, x)
