# tests/test_numlin.py
import numpy as np
import pytest

from app.services.errors import DimensionMismatch, Singular
from app.services.numlin import apply_builtin, gaussian_solve


def test_gaussian_solve_on_random_diagonally_shifted_matrices():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        a = rng.uniform(-1.0, 1.0, (n, n)) + n * np.eye(n)
        b = rng.uniform(-10.0, 10.0, n)
        x = gaussian_solve(a, b)
        assert np.max(np.abs(a @ x - b)) <= 1e-10 * (1.0 + np.max(np.abs(b)))


def test_partial_pivoting_handles_zero_leading_entry():
    x = gaussian_solve([[0.0, 1.0], [1.0, 0.0]], [2.0, 3.0])
    assert np.allclose(x, [3.0, 2.0])


def test_inputs_are_not_mutated():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    b = np.array([1.0, 2.0])
    gaussian_solve(a, b)
    assert np.array_equal(a, [[2.0, 1.0], [1.0, 3.0]])
    assert np.array_equal(b, [1.0, 2.0])


def test_zero_and_rank_deficient_matrices_are_singular():
    with pytest.raises(Singular):
        gaussian_solve(np.zeros((3, 3)), [1.0, 2.0, 3.0])
    with pytest.raises(Singular):
        gaussian_solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        gaussian_solve([[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0, 3.0])


def test_builtin_operations():
    assert apply_builtin("dot", [1, 2, 3], [4, 5, 6]) == 32.0
    assert np.array_equal(apply_builtin("cross", [0, 1, 0], [0, 0, 1]), [1.0, 0.0, 0.0])
    assert apply_builtin("norm", [3, 4]) == 5.0
    assert np.array_equal(apply_builtin("matvec", [[1, 2], [3, 4]], [1, 1]), [3.0, 7.0])
    with pytest.raises(DimensionMismatch):
        apply_builtin("dot", [1, 2], [1, 2, 3])
    with pytest.raises(DimensionMismatch):
        apply_builtin("cross", [1, 2], [3, 4])
