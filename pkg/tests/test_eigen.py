import numpy as np
import pytest

from sumproduct.eigen import ConvergenceError, jacobi_eigh, power_iteration


@pytest.mark.parametrize("parallel", [False, True])
def test_small_examples(parallel):
    assert jacobi_eigh(np.zeros((2, 2)), parallel_order=parallel).values.tolist() == [0.0, 0.0]
    assert jacobi_eigh(np.diag([1.0, 3.0]), parallel_order=parallel).values.tolist() == [3.0, 1.0]


@pytest.mark.parametrize("parallel", [False, True])
@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_matches_lapack_on_random_symmetric(n, parallel):
    rng = np.random.default_rng(n)
    m = rng.normal(size=(n, n))
    m = m + m.T
    res = jacobi_eigh(m, parallel_order=parallel)
    np.testing.assert_allclose(res.values, np.linalg.eigvalsh(m)[::-1], atol=1e-10)
    assert res.residual(m) < 1e-9
    np.testing.assert_allclose(res.vectors.T @ res.vectors, np.eye(n), atol=1e-10)


def test_repeated_eigenvalues():
    # K_5: eigenvalues 4 and -1 (x4)
    k5 = np.ones((5, 5)) - np.eye(5)
    res = jacobi_eigh(k5)
    np.testing.assert_allclose(res.values, [4, -1, -1, -1, -1], atol=1e-12)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))


def test_sweep_cap():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(20, 20))
    with pytest.raises(ConvergenceError):
        jacobi_eigh(m + m.T, max_sweeps=1)


def test_power_iteration():
    k5 = np.ones((5, 5)) - np.eye(5)
    assert power_iteration(k5) == pytest.approx(4.0)
