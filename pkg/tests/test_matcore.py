import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from transrate import matcore
from transrate.errors import NumericOverflow
from transrate.matcore import FEATURE, SAMPLE, gram, logdet_ipd, singular_values, unit_normalize_rows


def _eig_logdet(G, alpha):
    lam = np.linalg.eigvalsh(G)
    return float(np.sum(np.log1p(alpha * np.clip(lam, 0, None))))


def test_normalize_345():
    out, zeros = unit_normalize_rows(np.array([[3.0, 4.0]]))
    np.testing.assert_allclose(out, [[0.6, 0.8]], rtol=0, atol=1e-15)
    assert zeros == 0


def test_normalize_zero_row_warns():
    with pytest.warns(RuntimeWarning, match="all-zero"):
        out, zeros = unit_normalize_rows(np.zeros((1, 2)))
    assert zeros == 1
    assert (out == 0).all()


def test_normalize_random_norms(rng):
    out, _ = unit_normalize_rows(rng.normal(size=(10, 5)))
    np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)


def test_gram_identity():
    G = gram(np.eye(2))
    assert G.side == FEATURE  # n == d goes to the feature side
    np.testing.assert_array_equal(G.matrix, np.eye(2))


def test_gram_sample_side():
    G = gram(np.array([[1.0, 0.0], [1.0, 0.0]]), SAMPLE)
    np.testing.assert_array_equal(G.matrix, np.ones((2, 2)))


def test_gram_auto_side():
    assert gram(np.ones((3, 5))).side == SAMPLE
    assert gram(np.ones((5, 3))).side == FEATURE


def test_gram_sides_share_spectrum(rng):
    F = rng.normal(size=(7, 3))
    a = np.sort(np.linalg.eigvalsh(gram(F, FEATURE).matrix))
    b = np.sort(np.linalg.eigvalsh(gram(F, SAMPLE).matrix))[-3:]
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_gram_overflow():
    with pytest.raises(NumericOverflow):
        gram(np.full((3, 2), 1e200))


def test_gram_blocked_matches_direct(rng, monkeypatch):
    monkeypatch.setattr(matcore, "BLOCK_ROWS", 16)
    F = rng.normal(size=(100, 6))
    np.testing.assert_allclose(gram(F, FEATURE).matrix, F.T @ F, rtol=1e-12)
    np.testing.assert_allclose(gram(F, SAMPLE).matrix, F @ F.T, rtol=1e-12)


def test_gram_bit_identical_across_threads(rng, monkeypatch):
    monkeypatch.setattr(matcore, "BLOCK_ROWS", 64)
    F = rng.normal(size=(1000, 20))
    ref = gram(F, FEATURE, threads=1).matrix.tobytes()
    for t in (2, 3, 8):
        assert gram(F, FEATURE, threads=t).matrix.tobytes() == ref


def test_logdet_zero():
    assert logdet_ipd(np.zeros((4, 4)), 3.0) == 0.0


def test_logdet_identity():
    assert logdet_ipd(np.eye(2), 1.0) == pytest.approx(2 * np.log(2), abs=1e-15)


def test_logdet_eigen_oracle(rng):
    A = rng.normal(size=(6, 6))
    G = A @ A.T
    assert logdet_ipd(G, 0.37) == pytest.approx(_eig_logdet(G, 0.37), rel=1e-9)


def test_logdet_fallback(monkeypatch, caplog):
    def boom(_):
        raise np.linalg.LinAlgError("forced")

    monkeypatch.setattr(np.linalg, "cholesky", boom)
    G = np.diag([1.0, 3.0])
    assert logdet_ipd(G, 1.0) == pytest.approx(np.log(2) + np.log(4))
    assert "falling back" in caplog.text


def test_singular_values_diag():
    np.testing.assert_allclose(singular_values(np.diag([3.0, 1.0])), [3.0, 1.0])


def test_singular_values_zero():
    s = singular_values(np.zeros((4, 2)))
    assert s.tolist() == [0.0, 0.0]


def test_singular_values_rank_deficient(rng):
    F = rng.normal(size=(6, 1)) @ rng.normal(size=(1, 4))
    s = singular_values(F)
    assert s.size == 4 and s[0] > 0 and (s[1:] == 0).all()


def test_singular_value_route(rng):
    F = rng.normal(size=(5, 3))
    n, eps = 5, 1e-2
    s = singular_values(F)
    via_sv = 0.5 * np.sum(np.log1p(s ** 2 / (n * eps)))
    via_logdet = 0.5 * logdet_ipd(gram(F), 1 / (n * eps))
    assert via_sv == pytest.approx(via_logdet, rel=1e-9)
    assert np.sum(s ** 2) == pytest.approx(np.sum(F ** 2), rel=1e-8)


matrices = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-5, 5, allow_nan=False)))


@settings(max_examples=80, deadline=None)
@given(matrices, st.floats(1e-3, 1e3))
def test_commutativity(F, alpha):
    a = logdet_ipd(gram(F, FEATURE), alpha)
    b = logdet_ipd(gram(F, SAMPLE), alpha)
    assert a == pytest.approx(b, rel=1e-8, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(matrices, st.floats(1e-3, 1e3))
def test_singular_value_identity(F, alpha):
    s = singular_values(F)
    expected = float(np.sum(np.log1p(alpha * s ** 2)))
    assert logdet_ipd(gram(F), alpha) == pytest.approx(expected, rel=1e-8, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(matrices, st.integers(0, 2 ** 32 - 1))
def test_orthogonal_invariance(F, seed):
    d = F.shape[1]
    Q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(d, d)))
    a = logdet_ipd(gram(F), 0.5)
    b = logdet_ipd(gram(F @ Q), 0.5)
    assert a == pytest.approx(b, rel=1e-8, abs=1e-10)
    np.testing.assert_allclose(singular_values(F), singular_values(F @ Q), rtol=1e-8, atol=1e-8)


def test_determinism(rng):
    F = rng.normal(size=(300, 40))
    assert logdet_ipd(gram(F), 0.1) == logdet_ipd(gram(F.copy()), 0.1)
