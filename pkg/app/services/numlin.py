# app/services/numlin.py
import logging
from typing import Any, Sequence, Union

import numpy as np

from app.config.settings import PIVOT_RELATIVE_TOLERANCE
from app.services.errors import DimensionMismatch, Singular

logger = logging.getLogger(__name__)

Numeric = Union[float, np.ndarray]

BUILTIN_OPS = ("dot", "cross", "norm", "add", "sub", "scale", "matvec", "matmul")


def as_vector(value: Any) -> np.ndarray:
    vec = np.asarray(value, dtype=float)
    if vec.ndim != 1 or vec.size == 0:
        raise DimensionMismatch("vector", vec.shape)
    return vec


def as_matrix(value: Any) -> np.ndarray:
    mat = np.asarray(value, dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise DimensionMismatch("matrix", mat.shape)
    return mat


def _same_shape(op: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(op, a.shape, b.shape)


def apply_builtin(op: str, *args: Any) -> Numeric:
    """
    Dense vector/matrix operations shared by the interpreter builtins.
    Scalars come back as Python floats, everything else as float arrays.
    """
    if op == "dot":
        a, b = as_vector(args[0]), as_vector(args[1])
        _same_shape(op, a, b)
        return float(np.dot(a, b))
    if op == "cross":
        a, b = as_vector(args[0]), as_vector(args[1])
        if a.shape != (3,) or b.shape != (3,):
            raise DimensionMismatch(op, a.shape, b.shape)
        return np.cross(a, b)
    if op == "norm":
        return float(np.linalg.norm(as_vector(args[0])))
    if op == "add":
        a, b = np.asarray(args[0], dtype=float), np.asarray(args[1], dtype=float)
        _same_shape(op, a, b)
        return a + b
    if op == "sub":
        a, b = np.asarray(args[0], dtype=float), np.asarray(args[1], dtype=float)
        _same_shape(op, a, b)
        return a - b
    if op == "scale":
        return float(args[0]) * np.asarray(args[1], dtype=float)
    if op == "matvec":
        m, v = as_matrix(args[0]), as_vector(args[1])
        if m.shape[1] != v.shape[0]:
            raise DimensionMismatch(op, m.shape, v.shape)
        return m @ v
    if op == "matmul":
        a, b = as_matrix(args[0]), as_matrix(args[1])
        if a.shape[1] != b.shape[0]:
            raise DimensionMismatch(op, a.shape, b.shape)
        return a @ b
    raise ValueError(f"unknown builtin operation '{op}'")


def gaussian_solve(A: Sequence[Sequence[float]], b: Sequence[float]) -> np.ndarray:
    """
    Solves A x = b by Gaussian elimination with partial pivoting (largest
    absolute entry in the current column). Inputs are copied, never mutated.
    """
    a = as_matrix(A).copy()
    x = as_vector(b).copy()
    n = x.shape[0]
    if a.shape != (n, n):
        raise DimensionMismatch("gaussian_solve", a.shape, x.shape)

    scale = float(np.max(np.abs(a)))
    threshold = PIVOT_RELATIVE_TOLERANCE * scale
    if scale == 0.0:
        raise Singular(0, 0.0)

    for k in range(n):
        p = int(np.argmax(np.abs(a[k:, k]))) + k
        pivot = a[p, k]
        if abs(pivot) < threshold:
            raise Singular(k, float(pivot))
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        for i in range(k + 1, n):
            if a[i, k] != 0.0:
                lam = a[i, k] / a[k, k]
                a[i, k + 1:] = a[i, k + 1:] - lam * a[k, k + 1:]
                a[i, k] = 0.0
                x[i] = x[i] - lam * x[k]

    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - np.dot(a[k, k + 1:], x[k + 1:])) / a[k, k]
    return x
