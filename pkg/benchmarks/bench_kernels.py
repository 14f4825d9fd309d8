"""Time the numba kernels against their numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py``. Both variants are timed in
the same process (the numba one after a warm-up call that triggers
compilation), and their outputs are compared before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from swiptsec import kernels
from swiptsec.model import SystemParams, dbm_to_watts, generate_channels
from swiptsec.oracle import LOWER, UPPER, _grid_axes, pack_instance
from swiptsec.recovery import _eve_inverse, FEAS_RTOL, RHO_EPS

PARAMS = SystemParams(p_total=dbm_to_watts(30.0), e_bar_s=dbm_to_watts(0.0), e_bar_e=dbm_to_watts(0.0))
TINY = SystemParams(n_tx=2, n_users=1, n_eves=1, n_eve_rx=1, p_total=dbm_to_watts(10.0),
                    e_bar_s=dbm_to_watts(-30.0), e_bar_e=dbm_to_watts(-30.0))


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def score_inputs(n_cand: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    ch = generate_channels(PARAMS, seed)
    p = PARAMS
    cands = (rng.standard_normal((n_cand, p.n_tx)) + 1j * rng.standard_normal((n_cand, p.n_tx))) * 0.3
    w = rng.standard_normal((p.n_tx, 3)) + 1j * rng.standard_normal((p.n_tx, 3))
    v = w @ w.conj().T * 0.02
    hu, he = ch.h_users, ch.h_eves
    v_quad = np.real(np.einsum("ki,ij,kj->k", hu.conj(), v, hu))
    tv = np.real(np.einsum("lim,ij,ljm->l", he.conj(), v, he))
    return (cands, np.ascontiguousarray(hu), v_quad, p.sigma2_sa, p.sigma2_sp, p.e_bar_s / p.eta_s,
            np.ascontiguousarray(he), _eve_inverse(he, v, p, True), tv + p.n_eve_rx * p.sigma2_ea,
            p.e_bar_e / p.eta_e * (1.0 - FEAS_RTOL), p.p_total, RHO_EPS)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    rows = []
    for n in (101, 1_000, 10_000):
        a = score_inputs(n)
        r1, _ = kernels.score_candidates_numpy(*a)
        r2, _ = kernels.score_candidates_numba(*a)
        fin = np.isfinite(r1)
        assert np.array_equal(fin, np.isfinite(r2)) and np.allclose(r1[fin], r2[fin], rtol=1e-10)
        rows.append((f"score_candidates C={n}", best_of(lambda: kernels.score_candidates_numpy(*a), args.repeat),
                     best_of(lambda: kernels.score_candidates_numba(*a), args.repeat)))

    inst = pack_instance(TINY, generate_channels(TINY, 0))
    x = LOWER + (UPPER - LOWER) * np.random.default_rng(0).uniform(size=(20_000, 6))
    assert np.allclose(kernels.oracle_values_numpy(inst, x), kernels.oracle_values_numba(inst, x), rtol=1e-10)
    rows.append(("oracle_values 20000 points", best_of(lambda: kernels.oracle_values_numpy(inst, x), args.repeat),
                 best_of(lambda: kernels.oracle_values_numba(inst, x), args.repeat)))
    for res in (8, 12):
        axes = _grid_axes(res)
        va, _ = kernels.oracle_grid_numpy(inst, axes)
        vb, _ = kernels.oracle_grid_numba(inst, axes)
        assert np.isclose(va, vb, rtol=1e-10)
        rep = max(1, args.repeat // 2)
        rows.append((f"oracle_grid {res}^6 = {res ** 6} points", best_of(lambda: kernels.oracle_grid_numpy(inst, axes),
                                                                          rep),
                     best_of(lambda: kernels.oracle_grid_numba(inst, axes), rep)))

    print(f"{'kernel':<34} {'numpy (ms)':>12} {'numba (ms)':>12} {'speed-up':>9}")
    for name, t_np, t_nb in rows:
        print(f"{name:<34} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
