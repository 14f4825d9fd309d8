import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swiptsec import kernels
from swiptsec.model import SystemParams, dbm_to_watts, generate_channels
from swiptsec.oracle import LOWER, UPPER, _grid_axes, pack_instance
from swiptsec.recovery import _score

TINY = SystemParams(n_tx=2, n_users=1, n_eves=1, n_eve_rx=1, p_total=dbm_to_watts(10.0),
                    e_bar_s=dbm_to_watts(-30.0), e_bar_e=dbm_to_watts(-30.0))
PARAMS = SystemParams(p_total=dbm_to_watts(30.0), e_bar_s=dbm_to_watts(0.0), e_bar_e=dbm_to_watts(0.0))


def score_args(seed, n_cand=50):
    """Argument tuple of :func:`kernels.score_candidates` for a random instance."""
    rng = np.random.default_rng(seed)
    ch = generate_channels(PARAMS, seed)
    cands = (rng.standard_normal((n_cand, 5)) + 1j * rng.standard_normal((n_cand, 5))) * 0.2
    w = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    v = w @ w.conj().T * 0.02
    captured = {}

    def spy(*args):
        captured["args"] = args
        return kernels.score_candidates_numpy(*args)

    orig = kernels.score_candidates
    import swiptsec.recovery as rec
    rec.score_candidates = spy
    try:
        _score(cands, v, PARAMS, ch, True)
    finally:
        rec.score_candidates = orig
    return captured["args"]


@given(st.integers(0, 10_000))
def test_score_numba_matches_numpy(seed):
    args = score_args(seed)
    r1, rho1 = kernels.score_candidates_numpy(*args)
    r2, rho2 = kernels.score_candidates_numba(*args)
    fin = np.isfinite(r1)
    assert np.array_equal(fin, np.isfinite(r2))
    assert np.allclose(r1[fin], r2[fin], rtol=1e-10, atol=1e-12)
    assert np.allclose(rho1[fin], rho2[fin], rtol=1e-12)


@given(st.integers(0, 1000), st.integers(0, 2**32 - 1))
def test_oracle_values_numba_matches_numpy(seed, pseed):
    inst = pack_instance(TINY, generate_channels(TINY, seed))
    x = LOWER + (UPPER - LOWER) * np.random.default_rng(pseed).uniform(size=(64, 6))
    a, b = kernels.oracle_values_numpy(inst, x), kernels.oracle_values_numba(inst, x)
    assert np.array_equal(np.isfinite(a), np.isfinite(b))
    fin = np.isfinite(a)
    assert np.allclose(a[fin], b[fin], rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_oracle_grid_numba_matches_numpy(seed):
    inst = pack_instance(TINY, generate_channels(TINY, seed))
    axes = _grid_axes(5)
    va, ia = kernels.oracle_grid_numpy(inst, axes)
    vb, ib = kernels.oracle_grid_numba(inst, axes)
    assert va == pytest.approx(vb, rel=1e-10)
    x = np.array([[ax[i] for ax, i in zip(axes, ia)], [ax[i] for ax, i in zip(axes, ib)]])
    vals = kernels.oracle_values_numpy(inst, x)
    assert vals[0] == pytest.approx(vals[1], rel=1e-10)


def test_disable_flag_selects_numpy():
    code = "from swiptsec import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, **{kernels.DISABLE_ENV: "1"})
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env[kernels.DISABLE_ENV] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == ("numba" if kernels.HAVE_NUMBA else "numpy")
