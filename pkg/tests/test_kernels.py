import numpy as np
import pytest
from pydantic import ValidationError

from npga.core.kernels import gram, gram_grad_points
from npga.errors import InvalidInputError, ShapeError
from npga.models import KernelSpec
from npga.runner.gradcheck import relative_errors

KINDS = ["linear", "rbf", "arcsine", "periodic"]


def random_spec(kind, rng):
    return KernelSpec(
        kind=kind,
        signal_variance=rng.uniform(0.5, 2.0),
        lengthscale=rng.uniform(0.5, 2.0),
        period=rng.uniform(1.0, 7.0),
        input_weight=rng.uniform(0.5, 2.0),
        bias_weight=rng.uniform(0.5, 2.0),
    )


class TestGramExamples:
    def test_linear_inner_product(self):
        K = gram([[1.0, 2.0]], [[3.0, 4.0]], KernelSpec(kind="linear"))
        assert K.shape == (1, 1)
        assert K[0, 0] == pytest.approx(11.0)

    def test_rbf_zero_distance_is_signal_variance(self, rng):
        x = rng.standard_normal((1, 3))
        assert gram(x, x, KernelSpec(kind="rbf"))[0, 0] == pytest.approx(1.0)

    def test_periodic_shift_by_period(self, rng):
        spec = KernelSpec(kind="periodic", period=3.0)
        x = rng.standard_normal((1, 1))
        np.testing.assert_allclose(gram(x, x + 3.0, spec), gram(x, x, spec), atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
class TestGramProperties:
    def test_symmetric_and_psd(self, kind, rng):
        for _ in range(50):
            spec = random_spec(kind, rng)
            A = rng.standard_normal((int(rng.integers(1, 13)), int(rng.integers(1, 4))))
            K = gram(A, None, spec)
            np.testing.assert_allclose(K, K.T, atol=1e-12)
            assert np.linalg.eigvalsh(K).min() >= -1e-9
            assert np.all(np.isfinite(K))

    def test_transpose_of_swapped_arguments(self, kind, rng):
        spec = random_spec(kind, rng)
        A = rng.standard_normal((4, 2))
        B = rng.standard_normal((6, 2))
        np.testing.assert_allclose(gram(A, B, spec), gram(B, A, spec).T, atol=1e-12)

    def test_row_permutation(self, kind, rng):
        spec = random_spec(kind, rng)
        A = rng.standard_normal((7, 3))
        perm = rng.permutation(7)
        K = gram(A, None, spec)
        np.testing.assert_allclose(gram(A[perm], None, spec), K[np.ix_(perm, perm)], atol=1e-12)

    def test_point_gradient_matches_finite_differences(self, kind, rng):
        step = 1e-5
        for _ in range(10):
            spec = random_spec(kind, rng)
            X = rng.standard_normal((4, 3))
            analytic = gram_grad_points(X, spec).full()
            numeric = np.zeros_like(analytic)
            for i in range(4):
                for h in range(3):
                    plus, minus = X.copy(), X.copy()
                    plus[i, h] += step
                    minus[i, h] -= step
                    numeric[:, :, i, h] = (gram(plus, None, spec) - gram(minus, None, spec)) / (2 * step)
            assert relative_errors(analytic, numeric).max() < 1e-6

    def test_partials_are_symmetric(self, kind, rng):
        T = gram_grad_points(rng.standard_normal((5, 2)), random_spec(kind, rng)).full()
        np.testing.assert_allclose(T, np.transpose(T, (1, 0, 2, 3)), atol=1e-12)

    def test_contract_matches_dense_chain_rule(self, kind, rng):
        X = rng.standard_normal((5, 2))
        G = gram_grad_points(X, random_spec(kind, rng))
        dL_dK = rng.standard_normal((5, 5))
        dense = np.einsum("nm,nmih->ih", dL_dK, G.full())
        np.testing.assert_allclose(G.contract(dL_dK), dense, atol=1e-12)


def test_arcsine_values_strictly_inside_signal_variance(rng):
    for _ in range(20):
        spec = random_spec("arcsine", rng)
        K = gram(rng.standard_normal((8, 2)) * 5.0, None, spec)
        assert np.all(np.abs(K) < spec.signal_variance)


def test_rbf_diagonal_partials_vanish(rng):
    G = gram_grad_points(rng.standard_normal((4, 3)), KernelSpec(kind="rbf"))
    for n in range(4):
        np.testing.assert_array_equal(G.first_arg[n, n], 0.0)


def test_linear_partial_is_other_point(rng):
    X = rng.standard_normal((4, 3))
    G = gram_grad_points(X, KernelSpec(kind="linear"))
    for n in range(4):
        for m in range(4):
            if n != m:
                np.testing.assert_allclose([G.entry_partial(n, m, n, h) for h in range(3)], X[m])


def test_non_finite_point_rejected():
    with pytest.raises(InvalidInputError):
        gram([[0.0, np.nan]], None, KernelSpec())


def test_dimension_mismatch_rejected():
    with pytest.raises(ShapeError):
        gram(np.zeros((2, 2)), np.zeros((2, 3)), KernelSpec())


@pytest.mark.parametrize("field", ["signal_variance", "lengthscale", "period", "input_weight", "bias_weight"])
def test_non_positive_hyperparameter_rejected(field):
    with pytest.raises(ValidationError):
        KernelSpec(**{field: 0.0})
