import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_vector
from swiptsec.inner import recover_design, solve_inner
from swiptsec.metrics import TransmitDesign, achievable_secrecy_rate, user_energy, eve_energy
from swiptsec.model import SystemParams, dbm_to_watts, generate_channels
from swiptsec.outer import outer_rate
from swiptsec.recovery import (DIRECT, RANDOMIZATION, RHO_EPS, check_proposition1, direct_extraction,
                               extract_rank_one, gaussian_randomization, principal_design)

seeds = st.integers(0, 2**32 - 1)
PARAMS = SystemParams(p_total=dbm_to_watts(30.0), e_bar_s=dbm_to_watts(0.0), e_bar_e=dbm_to_watts(0.0))


def test_prop1_rank_one_pair(rng):
    q, w = random_vector(rng, 5), random_vector(rng, 5)
    rq, rv, holds = check_proposition1(np.outer(q, q.conj()), np.outer(w, w.conj()), 3, 3)
    assert (rq, rv, holds) == (1, 1, True)


def test_prop1_rank_above_k(rng):
    q = random_hermitian(rng, 5, psd=True, rank=4)
    rq, _, holds = check_proposition1(q, np.zeros((5, 5)), 3, 3)
    assert rq == 4 and not holds


@given(st.integers(0, 5), st.integers(0, 5), st.integers(1, 4), st.integers(0, 4))
def test_prop1_predicate(rq, rv, k, l):
    q = np.diag([1.0] * rq + [0.0] * (5 - rq))
    v = np.diag([1.0] * rv + [0.0] * (5 - rv))
    assert check_proposition1(q, v, k, l) == (rq, rv, rq <= k and rq * rq + rv * rv <= 2 * k + l)


def test_extract_scaled_basis_vector():
    q = extract_rank_one(4 * np.diag([1.0, 0, 0]).astype(complex))
    assert abs(abs(q[0]) - 2.0) < 1e-12 and np.allclose(q[1:], 0)


@given(seeds)
def test_extract_reconstruction(seed):
    rng = np.random.default_rng(seed)
    q = random_vector(rng, 5)
    qq = np.outer(q, q.conj())
    q2 = extract_rank_one(qq)
    lam = np.linalg.norm(q) ** 2
    assert np.linalg.norm(np.outer(q2, q2.conj()) - qq) / lam < 1e-6


def test_extract_rejects_rank_two(rng):
    with pytest.raises(ValueError):
        extract_rank_one(random_hermitian(rng, 5, psd=True, rank=2))


def test_extracted_rate_matches_covariance_rate(rng):
    ch = generate_channels(PARAMS, 0)
    q = random_vector(rng, 5) * 0.2
    v = random_hermitian(rng, 5, psd=True, rank=2) * 0.05
    rho = np.full(3, 0.5)
    a = achievable_secrecy_rate(TransmitDesign(np.outer(q, q.conj()), v, rho), ch, PARAMS)
    d, rep = direct_extraction(np.outer(q, q.conj()), v, rho, PARAMS, ch)
    assert rep.method == DIRECT
    assert abs(achievable_secrecy_rate(d, ch, PARAMS).secrecy_rate - a.secrecy_rate) < 1e-9
    assert np.allclose(a.user_rates, achievable_secrecy_rate(d, ch, PARAMS).user_rates, atol=1e-9)


@pytest.fixture(scope="module")
def relaxed():
    ch = generate_channels(PARAMS, 5)
    sol = solve_inner(PARAMS, ch, 0.05)
    return ch, sol, recover_design(sol, PARAMS)


def _feasible(design, ch, params):
    for k in range(params.n_users):
        assert user_energy(ch.h_users[k], design, k, params) >= params.e_bar_s - 1e-9
    for l in range(params.n_eves):
        assert eve_energy(ch.h_eves[l], design.q_cov, design.an_cov, params, l) >= params.e_bar_e - 1e-9
    assert design.total_power <= params.p_total + 1e-6
    assert np.all(design.rho >= RHO_EPS) and np.all(design.rho <= 1.0)


def test_randomization_properties(relaxed):
    ch, sol, d = relaxed
    design, rep = gaussian_randomization(d.q_cov, d.an_cov, d.rho, PARAMS, ch, 100, 0)
    assert rep.n_candidates_tried == 101
    assert design.beamformer is not None and not rep.fallback
    _feasible(design, ch, PARAMS)
    assert rep.best_rate <= outer_rate(sol.theta, sol.t) + 1e-6 or rep.best_rate <= 0
    assert rep.best_rate == pytest.approx(achievable_secrecy_rate(design, ch, PARAMS).secrecy_rate)
    sdr = principal_design(d.q_cov, d.an_cov, PARAMS, ch)
    if sdr is not None:
        assert rep.best_rate >= achievable_secrecy_rate(sdr, ch, PARAMS).secrecy_rate


def test_randomization_deterministic(relaxed):
    ch, _, d = relaxed
    a, ra = gaussian_randomization(d.q_cov, d.an_cov, d.rho, PARAMS, ch, 100, 7)
    b, rb = gaussian_randomization(d.q_cov, d.an_cov, d.rho, PARAMS, ch, 100, 7)
    assert np.array_equal(a.beamformer, b.beamformer) and np.array_equal(a.rho, b.rho) and ra == rb


def test_randomization_nested_candidates(relaxed):
    ch, _, d = relaxed
    rates = [gaussian_randomization(d.q_cov, d.an_cov, d.rho, PARAMS, ch, n, 3)[1].best_rate for n in (5, 20, 80)]
    assert rates[0] <= rates[1] <= rates[2]


def test_randomization_rank_one_input_no_regression(rng):
    params = PARAMS.replace(e_bar_s=dbm_to_watts(-20.0), e_bar_e=dbm_to_watts(-20.0))
    ch = generate_channels(params, 1)
    q = random_vector(rng, 5)
    q *= np.sqrt(0.5 * params.p_total) / np.linalg.norm(q)
    v = np.eye(5) * 0.1 * params.p_total
    design, rep = gaussian_randomization(np.outer(q, q.conj()), v, np.full(3, 0.5), params, ch, 20, 0)
    sdr = principal_design(np.outer(q, q.conj()), v, params, ch)
    assert sdr is not None
    assert rep.method == DIRECT
    assert rep.best_rate >= achievable_secrecy_rate(sdr, ch, params).secrecy_rate


def test_randomization_fallback_when_nothing_feasible(rng):
    ch = generate_channels(PARAMS, 1)
    params = PARAMS.replace(e_bar_e=1.0)  # unreachable
    q = random_hermitian(rng, 5, psd=True, rank=2) * 1e-2
    design, rep = gaussian_randomization(q, np.eye(5) * 1e-2, np.full(3, 0.5), params, ch, 10, 0)
    assert rep.fallback and rep.n_feasible == 0 and rep.method == RANDOMIZATION
    assert design.beamformer is None
    assert principal_design(q, np.eye(5) * 1e-2, params, ch) is None


def test_randomization_rejects_zero_candidates(relaxed):
    ch, _, d = relaxed
    with pytest.raises(ValueError):
        gaussian_randomization(d.q_cov, d.an_cov, d.rho, PARAMS, ch, 0, 0)
