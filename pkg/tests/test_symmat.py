import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from matsubdiff.exceptions import DimensionMismatch, DimensionTooLarge, NonFinite, PreconditionViolated
from matsubdiff.symmat import (
    PsdOutcome,
    SymMat,
    eigen_sym,
    frobenius,
    loewner_leq,
    order_ball_bound_check,
    psd_verdict,
    sample_order_ball,
)

I2 = np.eye(2)
ONES = np.ones((2, 2))
K = np.array([[1.0, -1.0], [-1.0, 1.0]])


def jacobi_eigenvalues(a, sweeps=50):
    """Plain cyclic Jacobi; independent of the LAPACK route under test."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < 1e-14 * (1 + np.linalg.norm(a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta ** 2 + 1)) if theta else 1.0
                c = 1 / np.sqrt(t ** 2 + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q], J[q, p] = s, -s
                a = J.T @ a @ J
    return np.sort(np.diag(a))


sym_arrays = st.integers(1, 6).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-100, 100, allow_nan=False))
).map(lambda a: (a + a.T) / 2)


class TestSymMat:
    def test_storage_is_upper_triangle(self):
        A = SymMat.from_array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])
        np.testing.assert_array_equal(A.entries, [1, 2, 3, 4, 5, 6])
        assert np.array_equal(A.to_array(), A.to_array().T)

    def test_rejects_asymmetric_and_nonfinite(self):
        with pytest.raises(ValueError):
            SymMat.from_array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(NonFinite):
            SymMat.from_array([[np.nan, 0.0], [0.0, 1.0]])

    def test_dimension_limits(self):
        with pytest.raises(DimensionMismatch):
            SymMat(0, [])
        with pytest.raises(DimensionTooLarge):
            SymMat.zeros(33)

    def test_arithmetic(self):
        A, B = SymMat.from_array(ONES), SymMat.from_array(K)
        np.testing.assert_array_equal(np.asarray(A + B), 2 * I2)
        np.testing.assert_array_equal(np.asarray(2 * A - B), 2 * ONES - K)
        assert -A == SymMat.from_array(-ONES)
        with pytest.raises(DimensionMismatch):
            A + SymMat.identity(3)

    def test_immutable(self):
        A = SymMat.identity(2)
        with pytest.raises(ValueError):
            A.entries[0] = 5.0


class TestFrobenius:
    def test_identity(self):
        assert frobenius(I2, I2) == 2.0

    def test_orthogonal_pair(self):
        assert frobenius(ONES, K) == 0.0

    def test_zero(self):
        assert frobenius(np.zeros((2, 2)), K) == 0.0

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            frobenius(I2, np.eye(3))

    @given(sym_arrays)
    def test_self_product_is_squared_norm(self, a):
        assert frobenius(a, a) == pytest.approx(np.linalg.norm(a) ** 2, rel=1e-12, abs=1e-12)


class TestEigen:
    @pytest.mark.parametrize("a, expected", [(I2, [1, 1]), (K, [0, 2]), (ONES, [0, 2])])
    def test_known_spectra(self, a, expected):
        np.testing.assert_allclose(eigen_sym(a).eigenvalues, expected, atol=1e-14)

    @settings(max_examples=200)
    @given(sym_arrays)
    def test_residual_and_orthonormality(self, a):
        spec = eigen_sym(a)
        Q, w = spec.basis, spec.eigenvalues
        assert np.all(np.diff(w) >= 0)
        for i in range(a.shape[0]):
            assert np.linalg.norm(a @ Q[:, i] - w[i] * Q[:, i]) <= 1e-9 * (1 + np.linalg.norm(a))
        np.testing.assert_allclose(Q.T @ Q, np.eye(a.shape[0]), atol=1e-10)

    @given(sym_arrays)
    def test_matches_jacobi(self, a):
        np.testing.assert_allclose(eigen_sym(a).eigenvalues, jacobi_eigenvalues(a),
                                   atol=1e-9 * (1 + np.linalg.norm(a)))

    def test_deterministic(self):
        a = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
        s1, s2 = eigen_sym(a), eigen_sym(a)
        np.testing.assert_array_equal(s1.basis, s2.basis)

    def test_nonfinite(self):
        with pytest.raises(NonFinite):
            eigen_sym([[np.inf, 0.0], [0.0, 1.0]])


class TestPsd:
    def test_zero_is_psd(self):
        assert psd_verdict(np.zeros((2, 2))).outcome is PsdOutcome.PSD

    def test_boundary_is_psd(self):
        v = psd_verdict(K)
        assert v.is_psd
        assert v.min_eigenvalue == pytest.approx(0.0, abs=1e-15)
        assert v.witness is None

    def test_negative_identity(self):
        v = psd_verdict(-I2)
        assert v.outcome is PsdOutcome.INDEFINITE
        z = v.witness
        assert np.linalg.norm(z) == pytest.approx(1.0, abs=1e-12)
        assert z @ (-I2) @ z == pytest.approx(-1.0)

    def test_relative_tolerance(self):
        big = np.diag([1e6, -1e-4])
        assert psd_verdict(big, tol=1e-9).is_psd
        assert not psd_verdict(big, tol=1e-12).is_psd
        assert psd_verdict(big).tolerance_used == pytest.approx(1e-9 * (1 + np.linalg.norm(big)))

    def test_negative_tol(self):
        with pytest.raises(ValueError):
            psd_verdict(I2, tol=-1.0)

    @given(sym_arrays)
    def test_witness_violates(self, a):
        v = psd_verdict(a)
        assert v.is_psd == (v.min_eigenvalue >= -v.tolerance_used)
        if not v.is_psd:
            assert v.witness @ a @ v.witness < 0
            assert np.linalg.norm(v.witness) == pytest.approx(1.0, abs=1e-12)


class TestLoewner:
    def test_zero_below_2i(self):
        assert loewner_leq(np.zeros((2, 2)), 2 * I2)

    def test_ones_below_2i(self):
        assert loewner_leq(ONES, 2 * I2)

    def test_ones_not_below_diag(self):
        # det([[1,-1],[-1,-1]]) = -2 < 0
        assert not loewner_leq(ONES, np.diag([2.0, 0.0]))

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            loewner_leq(I2, np.eye(3))


def _random_pair(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A + A.T
    G = rng.standard_normal((n, n))
    return rng, A, A + G @ G.T


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_order_properties(seed, n):
    rng, A, B = _random_pair(seed, n)
    E = rng.standard_normal((n, n))
    E = E + E.T
    t = rng.uniform(0, 10)
    assert loewner_leq(A, B)
    assert loewner_leq(-B, -A)
    assert loewner_leq(A + E, B + E)
    assert loewner_leq(t * A, t * B)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_antisymmetry(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A + A.T
    E = rng.standard_normal((n, n))
    B = A + (E + E.T) * 10.0 ** rng.uniform(-12, -7)
    tol = 1e-9
    if loewner_leq(A, B, tol) and loewner_leq(B, A, tol):
        # both verdicts bound every eigenvalue of B - A by the tolerance;
        # the Frobenius norm picks up a sqrt(n) factor from the n eigenvalues
        scale = 1 + max(np.linalg.norm(A), np.linalg.norm(B))
        assert np.linalg.norm(A - B) <= 2 * tol * scale * np.sqrt(n)


def test_limit_closure():
    rng, A, B = _random_pair(7, 3)
    for k in range(1, 200):
        An = A - np.eye(3) / k
        Bn = B + np.eye(3) / k
        assert loewner_leq(An, Bn)
    assert loewner_leq(A, B, tol=1e-8)


class TestOrderBall:
    def test_trivial(self):
        Z = np.zeros((2, 2))
        assert order_ball_bound_check(1.0, Z, Z, Z, Z) is True

    def test_cone_violation(self):
        with pytest.raises(PreconditionViolated) as exc:
            order_ball_bound_check(1.0, I2 / 2, -I2 / 2, np.zeros((2, 2)), 2 * I2)
        assert "Z NSD" in exc.value.failed

    def test_reports_every_failure(self):
        with pytest.raises(PreconditionViolated) as exc:
            order_ball_bound_check(1.0, 3 * I2, np.zeros((2, 2)), -I2, I2)
        assert {"||X1||_F <= C", "Y PSD", "Z NSD"} <= set(exc.value.failed)

    def test_valid_instance(self):
        X1 = I2 / np.sqrt(2)
        X2 = 2 * I2 / np.linalg.norm(2 * I2)
        Y = np.zeros((2, 2))
        Z = X1 + Y - X2
        assert order_ball_bound_check(1.0, X1, X2, Y, Z)

    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_sampled(self, dim):
        rng = np.random.default_rng(dim)
        for _ in range(100):
            X1, X2, Y, Z = sample_order_ball(rng, 1.0, dim)
            assert order_ball_bound_check(1.0, X1, X2, Y, Z)
