"""Dense complex Hermitian helpers and the real-symmetric embedding."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-6
PSD_CLAMP_TOL = 1e-9


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return (A + A^H) / 2."""
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol * scale)


def _require_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(a)
    if not is_hermitian(a, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return a


def embed_real(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re H, -Im H], [Im H, Re H]].

    The embedding is linear, preserves positive semidefiniteness in both
    directions and doubles every eigenvalue's multiplicity, so its trace is
    twice the trace of ``h``.
    """
    h = _require_hermitian(h)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def unembed(t: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed_real` (averages the redundant blocks)."""
    t = np.asarray(t, dtype=float)
    n = t.shape[0] // 2
    re = 0.5 * (t[:n, :n] + t[n:, n:])
    im = 0.5 * (t[n:, :n] - t[:n, n:])
    return hermitize(re + 1j * im)


def quadratic_form(h: np.ndarray, m: np.ndarray) -> float:
    """h^H M h for Hermitian M; the (roundoff) imaginary part is dropped."""
    h = np.asarray(h)
    m = np.asarray(m)
    if m.shape != (h.shape[0], h.shape[0]):
        raise ValueError(f"dimension mismatch: vector {h.shape}, matrix {m.shape}")
    return float(np.real(np.vdot(h, m @ h)))


def numerical_rank(h: np.ndarray, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of eigenvalues above ``rel_tol`` times the largest one."""
    w = np.linalg.eigvalsh(hermitize(h))
    lam_max = w[-1] if w.size else 0.0
    if lam_max <= 0.0:
        return 0
    return int(np.count_nonzero(w > rel_tol * lam_max))


def psd_eigh(h: np.ndarray, clamp_tol: float = PSD_CLAMP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a PSD matrix with small negative eigenvalues clamped.

    Raises ``ValueError`` when an eigenvalue is below ``-clamp_tol * lambda_max``.
    """
    w, u = np.linalg.eigh(hermitize(h))
    lam_max = max(w[-1], 0.0) if w.size else 0.0
    if w.size and w[0] < -clamp_tol * max(lam_max, np.finfo(float).tiny):
        raise ValueError(f"matrix is indefinite (min eigenvalue {w[0]:.3e}, max {lam_max:.3e})")
    return np.clip(w, 0.0, None), u


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    """Hermitian square root S with S S^H = H."""
    w, u = psd_eigh(h)
    return (u * np.sqrt(w)) @ u.conj().T


def min_eigenvalue(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitize(h))[0])
