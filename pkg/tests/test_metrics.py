import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_vector
from swiptsec.kernels import oracle_values
from swiptsec.metrics import (TransmitDesign, achievable_secrecy_rate, eve_energy, eve_rate_exact, eve_rate_upper,
                              user_energy, user_rate, user_sinr)
from swiptsec.model import SystemParams, dbm_to_watts, generate_channels
from swiptsec.oracle import design_from_point, pack_instance

seeds = st.integers(0, 2**32 - 1)
PARAMS = SystemParams()
TINY = SystemParams(n_tx=2, n_users=1, n_eves=1, n_eve_rx=1, p_total=dbm_to_watts(10.0),
                    e_bar_s=dbm_to_watts(-30.0), e_bar_e=dbm_to_watts(-30.0))


def random_design(rng, params, rank_q=None):
    n = params.n_tx
    q = random_hermitian(rng, n, psd=True, rank=rank_q) * 1e-1
    v = random_hermitian(rng, n, psd=True, rank=2) * 1e-1
    return TransmitDesign(q, v, rng.uniform(0.05, 1.0, params.n_users))


# -- user_rate ---------------------------------------------------------------

def test_user_rate_zero_q(rng):
    h = random_vector(rng, 5)
    d = TransmitDesign(np.zeros((5, 5)), np.eye(5), [0.5, 0.5, 0.5])
    assert user_rate(h, d, 0, PARAMS) == 0.0


def test_user_rate_matched_beamformer(rng):
    h = random_vector(rng, 5) * 0.03
    p = 0.7
    d = TransmitDesign(p * np.outer(h, h.conj()) / np.linalg.norm(h) ** 2, np.zeros((5, 5)), [1.0, 1.0, 1.0])
    expect = np.log2(1 + p * np.linalg.norm(h) ** 2 / (PARAMS.sigma2_sa[0] + PARAMS.sigma2_sp[0]))
    assert user_rate(h, d, 0, PARAMS) == pytest.approx(expect, rel=1e-12)


def test_user_rate_rejects_zero_rho(rng):
    d = TransmitDesign(np.eye(5), np.eye(5), [0.0, 0.5, 0.5])
    with pytest.raises(ValueError):
        user_rate(random_vector(rng, 5), d, 0, PARAMS)


@given(seeds)
def test_user_rate_independent_path(seed):
    rng = np.random.default_rng(seed)
    d = random_design(rng, PARAMS)
    h = random_vector(rng, 5) * 0.03
    k = 1
    num = (h.conj() @ d.q_cov @ h).real
    den = (h.conj() @ d.an_cov @ h).real + PARAMS.sigma2_sa[k] + PARAMS.sigma2_sp[k] / d.rho[k]
    assert abs(user_rate(h, d, k, PARAMS) - np.log2(1 + num / den)) < 1e-10


@given(seeds, st.floats(0.01, 0.99), st.floats(1.0, 10.0))
def test_user_rate_and_energy_monotone(seed, rho, alpha):
    rng = np.random.default_rng(seed)
    d = random_design(rng, PARAMS)
    h = random_vector(rng, 5) * 0.03

    def with_rho(r):
        return TransmitDesign(d.q_cov, d.an_cov, [r, r, r])

    lo, hi = with_rho(rho), with_rho(min(1.0, rho + 0.01))
    assert user_rate(h, hi, 0, PARAMS) >= user_rate(h, lo, 0, PARAMS) - 1e-12
    assert user_energy(h, hi, 0, PARAMS) <= user_energy(h, lo, 0, PARAMS) + 1e-18
    scaled = TransmitDesign(alpha * d.q_cov, d.an_cov, d.rho)
    assert user_rate(h, scaled, 0, PARAMS) >= user_rate(h, d, 0, PARAMS) - 1e-12
    assert user_rate(h, d, 0, PARAMS) >= 0 and user_energy(h, d, 0, PARAMS) >= 0


# -- eavesdropper rates ------------------------------------------------------

def test_eve_upper_zero_q(rng):
    he = generate_channels(PARAMS, 0).h_eves[0]
    assert eve_rate_upper(he, np.zeros((5, 5)), np.eye(5) * 0.1, PARAMS) == 0.0


def test_eve_exact_zero_q(rng):
    he = generate_channels(PARAMS, 0).h_eves[0]
    assert eve_rate_exact(he, np.zeros((5, 5)), np.eye(5) * 0.1, 0.4, PARAMS) == 0.0


@given(seeds)
def test_eve_exact_at_one_equals_upper(seed):
    rng = np.random.default_rng(seed)
    ch = generate_channels(PARAMS, seed)
    d = random_design(rng, PARAMS)
    for l in range(PARAMS.n_eves):
        up = eve_rate_upper(ch.h_eves[l], d.q_cov, d.an_cov, PARAMS, l)
        assert abs(eve_rate_exact(ch.h_eves[l], d.q_cov, d.an_cov, 1.0, PARAMS, l) - up) < 1e-10


@given(seeds)
def test_eve_single_antenna_scalar_formula(seed):
    rng = np.random.default_rng(seed)
    params = SystemParams(n_eve_rx=1)
    ch = generate_channels(params, seed)
    d = random_design(rng, params)
    g = ch.h_eves[0][:, 0]
    expect = np.log2(1 + (g.conj() @ d.q_cov @ g).real / ((g.conj() @ d.an_cov @ g).real + params.sigma2_e[0]))
    assert abs(eve_rate_upper(ch.h_eves[0], d.q_cov, d.an_cov, params) - expect) < 1e-10


@given(seeds, st.sampled_from([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]))
def test_eve_exact_below_upper(seed, rho_e):
    rng = np.random.default_rng(seed)
    ch = generate_channels(PARAMS, seed)
    d = random_design(rng, PARAMS, rank_q=int(rng.integers(1, 6)))
    for l in range(PARAMS.n_eves):
        exact = eve_rate_exact(ch.h_eves[l], d.q_cov, d.an_cov, rho_e, PARAMS, l)
        assert exact <= eve_rate_upper(ch.h_eves[l], d.q_cov, d.an_cov, PARAMS, l) + 1e-10
        assert exact >= 0


def test_eve_exact_rejects_bad_rho():
    with pytest.raises(ValueError):
        eve_rate_exact(np.ones((5, 2)), np.eye(5), np.eye(5), 0.0, PARAMS)


def test_eve_upper_without_noise_singular():
    # rank-deficient AN leaves part of the eavesdropper space noise-free
    he = generate_channels(PARAMS, 0).h_eves[0]
    q = np.eye(5) * 0.1
    assert np.isinf(eve_rate_upper(he, q, np.zeros((5, 5)), PARAMS, noise=False))
    assert np.isfinite(eve_rate_upper(he, q, np.zeros((5, 5)), PARAMS, noise=True))


# -- energies ----------------------------------------------------------------

def test_user_energy_full_rho(rng):
    d = random_design(rng, PARAMS)
    d = TransmitDesign(d.q_cov, d.an_cov, [1.0, 1.0, 1.0])
    assert user_energy(random_vector(rng, 5), d, 0, PARAMS) == 0.0


def test_user_energy_noise_only(rng):
    d = TransmitDesign(np.zeros((5, 5)), np.zeros((5, 5)), [0.5, 0.5, 0.5])
    assert user_energy(random_vector(rng, 5), d, 0, PARAMS) == pytest.approx(0.5 * PARAMS.sigma2_sa[0], rel=1e-15)


def test_eve_energy_noise_only():
    he = generate_channels(PARAMS, 0).h_eves[0]
    z = np.zeros((5, 5))
    assert eve_energy(he, z, z, PARAMS) == pytest.approx(PARAMS.n_eve_rx * PARAMS.sigma2_ea[0], rel=1e-15)


def test_eve_energy_linear(rng):
    he = generate_channels(PARAMS, 0).h_eves[0]
    d = random_design(rng, PARAMS)
    floor = PARAMS.n_eve_rx * PARAMS.sigma2_ea[0]
    one = eve_energy(he, d.q_cov, d.an_cov, PARAMS) - floor
    two = eve_energy(he, 2 * d.q_cov, 2 * d.an_cov, PARAMS) - floor
    assert two == pytest.approx(2 * one, rel=1e-12)


@given(seeds)
def test_energies_independent_path(seed):
    rng = np.random.default_rng(seed)
    params = SystemParams(eta_s=0.7, eta_e=0.6)
    ch = generate_channels(params, seed)
    d = random_design(rng, params)
    h = ch.h_users[2]
    r = (np.vdot(h, (d.q_cov + d.an_cov) @ h)).real + params.sigma2_sa[2]
    assert abs(user_energy(h, d, 2, params) - 0.7 * (1 - d.rho[2]) * r) < 1e-12
    he = ch.h_eves[1]
    tr = sum(np.vdot(he[:, m], (d.q_cov + d.an_cov) @ he[:, m]).real for m in range(2))
    assert abs(eve_energy(he, d.q_cov, d.an_cov, params, 1) - 0.6 * (tr + 2 * params.sigma2_ea[1])) < 1e-12


# -- achievable_secrecy_rate -------------------------------------------------

def test_secrecy_zero_q():
    ch = generate_channels(PARAMS, 0)
    d = TransmitDesign(np.zeros((5, 5)), np.eye(5) * 0.1, [0.5] * 3)
    assert achievable_secrecy_rate(d, ch, PARAMS).secrecy_rate == 0.0


def test_secrecy_report_composition(rng):
    params = SystemParams(n_users=1, n_eves=1)
    ch = generate_channels(params, 3)
    d = random_design(rng, params)
    rep = achievable_secrecy_rate(d, ch, params)
    h, he = ch.h_users[0], ch.h_eves[0]
    assert rep.user_rates[0] == user_rate(h, d, 0, params)
    assert rep.eve_rates_upper[0] == eve_rate_upper(he, d.q_cov, d.an_cov, params)
    assert rep.user_energies[0] == user_energy(h, d, 0, params)
    assert rep.eve_energies[0] == eve_energy(he, d.q_cov, d.an_cov, params)
    assert rep.secrecy_rate == max(0.0, rep.user_rates[0] - rep.eve_rates_upper[0])


@given(seeds)
def test_secrecy_rate_invariant(seed):
    rng = np.random.default_rng(seed)
    ch = generate_channels(PARAMS, seed)
    rep = achievable_secrecy_rate(random_design(rng, PARAMS), ch, PARAMS)
    assert rep.secrecy_rate == max(0.0, rep.user_rates.min() - rep.eve_rates_upper.max())
    assert np.all(rep.user_rates >= 0) and np.all(rep.eve_rates_upper >= 0)
    assert np.all(rep.user_energies >= 0) and np.all(rep.eve_energies >= 0)


def test_sinr_matches_rate(rng):
    ch = generate_channels(PARAMS, 1)
    d = random_design(rng, PARAMS)
    assert user_rate(ch.h_users[0], d, 0, PARAMS) == pytest.approx(np.log2(1 + user_sinr(ch.h_users[0], d, 0,
                                                                                         PARAMS)))


@given(seeds, st.integers(0, 2**32 - 1))
def test_secrecy_matches_oracle_evaluation(seed, point_seed):
    ch = generate_channels(TINY, seed % 1000)
    rng = np.random.default_rng(point_seed)
    x = rng.uniform([0, 0, 0, 0, 0, 0], [1, np.pi / 2, 2 * np.pi, 1, np.pi, 2 * np.pi])
    val = oracle_values(pack_instance(TINY, ch), x[None, :])[0]
    if np.isfinite(val):
        rate = achievable_secrecy_rate(design_from_point(x, TINY, ch), ch, TINY).secrecy_rate
        assert abs(rate - max(0.0, val)) < 1e-9
