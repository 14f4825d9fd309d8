import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_vector
from swiptsec.hermitian import embed_real, numerical_rank, psd_sqrt, quadratic_form, unembed

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 6)


# -- embed_real ------------------------------------------------------------

def test_embed_identity():
    assert np.array_equal(embed_real(np.eye(3)), np.eye(6))


def test_embed_pauli_y_spectrum():
    h = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(np.sort(np.linalg.eigvalsh(h)), [-1, 1])
    assert np.allclose(np.sort(np.linalg.eigvalsh(embed_real(h))), [-1, -1, 1, 1], atol=1e-14)


def test_embed_rejects_non_hermitian():
    with pytest.raises(ValueError):
        embed_real(np.array([[0, 1], [0, 0]]))


@given(seeds, dims)
def test_embed_spectrum_doubles(seed, n):
    h = random_hermitian(np.random.default_rng(seed), n)
    ev = np.sort(np.linalg.eigvalsh(h))
    assert np.allclose(np.sort(np.linalg.eigvalsh(embed_real(h))), np.repeat(ev, 2), atol=1e-10)
    assert np.trace(embed_real(h)) == pytest.approx(2 * np.trace(h).real)
    assert np.allclose(unembed(embed_real(h)), h)


@given(seeds, dims, st.floats(-3, 3), st.floats(-3, 3))
def test_embed_linear(seed, n, a, b):
    rng = np.random.default_rng(seed)
    x, y = random_hermitian(rng, n), random_hermitian(rng, n)
    assert np.allclose(embed_real(a * x + b * y), a * embed_real(x) + b * embed_real(y), atol=1e-12)


@given(seeds, dims, st.floats(-2, 2))
def test_embed_preserves_psd(seed, n, shift):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, n, psd=True)
    h = h + shift * np.linalg.eigvalsh(h)[-1] * 0.1 * np.eye(n)
    lam = np.linalg.eigvalsh(h)[0]
    lam_t = np.linalg.eigvalsh(embed_real(h))[0]
    if abs(lam) > 1e-9:
        assert (lam >= 0) == (lam_t >= 0)


# -- quadratic_form --------------------------------------------------------

def test_quadratic_form_identity(rng):
    h = random_vector(rng, 4)
    assert quadratic_form(h, np.eye(4)) == pytest.approx(np.linalg.norm(h) ** 2)


def test_quadratic_form_projector(rng):
    h = random_vector(rng, 4)
    assert quadratic_form(h, np.outer(h, h.conj())) == pytest.approx(np.linalg.norm(h) ** 4)


def test_quadratic_form_dimension_mismatch():
    with pytest.raises(ValueError):
        quadratic_form(np.ones(3), np.eye(4))


@given(seeds, dims)
def test_quadratic_form_matches_triple_sum(seed, n):
    rng = np.random.default_rng(seed)
    h, m = random_vector(rng, n), random_hermitian(rng, n)
    naive = sum(h[i].conjugate() * m[i, j] * h[j] for i in range(n) for j in range(n))
    assert abs(quadratic_form(h, m) - naive.real) < 1e-10 * max(1.0, abs(naive))
    assert isinstance(quadratic_form(h, m), float)


# -- numerical_rank --------------------------------------------------------

def test_rank_one(rng):
    q = random_vector(rng, 5)
    assert numerical_rank(np.outer(q, q.conj())) == 1


def test_rank_zero():
    assert numerical_rank(np.zeros((4, 4))) == 0


def test_rank_threshold():
    assert numerical_rank(np.diag([1.0, 1e-9, 0.0]), 1e-6) == 1


@given(seeds, dims)
def test_rank_two_outer_products(seed, n):
    rng = np.random.default_rng(seed)
    q, w = random_vector(rng, n), random_vector(rng, n)
    assert numerical_rank(np.outer(q, q.conj()) + np.outer(w, w.conj())) <= 2


# -- psd_sqrt --------------------------------------------------------------

def test_sqrt_identity():
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))


def test_sqrt_rank_one(rng):
    q = random_vector(rng, 4)
    h = np.outer(q, q.conj())
    s = psd_sqrt(h)
    assert np.linalg.norm(s @ s.conj().T - h) / np.linalg.norm(h) < 1e-8
    # S is a multiple of the projector onto q
    assert np.allclose(s, h / np.linalg.norm(q))


def test_sqrt_rejects_indefinite():
    with pytest.raises(ValueError):
        psd_sqrt(np.diag([1.0, -0.5]))


@given(seeds, dims, st.integers(1, 6))
def test_sqrt_reconstruction(seed, n, r):
    h = random_hermitian(np.random.default_rng(seed), n, psd=True, rank=min(r, n))
    s = psd_sqrt(h)
    assert np.linalg.norm(s @ s.conj().T - h) / np.linalg.norm(h) < 1e-8
