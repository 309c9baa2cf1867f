"""Vector primitives of the ambient space R^d.

Vectors are 1-D ``float64`` numpy arrays. Every public function validates
its inputs through :func:`as_vector`, so lists and tuples are accepted too.
"""

import math

import numpy as np

from .errors import ContractViolation


def as_vector(x, name="x"):
    """Return ``x`` as a finite, nonempty 1-D float array.

    Raises
    ------
    ContractViolation
        If ``x`` is not one-dimensional, is empty, or has a NaN/Inf entry.
    """
    if type(x) is np.ndarray and x.dtype == np.float64:
        v = x
    else:
        v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ContractViolation(f"{name} must be a nonempty 1-D vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ContractViolation(f"{name} has non-finite components")
    return v


def _same_dim(x, y):
    if x.shape != y.shape:
        raise ContractViolation(f"dimension mismatch: {x.size} vs {y.size}")


def inner(x, y):
    """Euclidean inner product."""
    x, y = as_vector(x, "x"), as_vector(y, "y")
    _same_dim(x, y)
    return float(np.dot(x, y))


def norm(x):
    """Euclidean norm, ``sqrt(inner(x, x))``."""
    x = as_vector(x)
    return math.sqrt(float(np.dot(x, x)))


def combine(lam, x, y):
    """Return ``lam * x + (1 - lam) * y``.

    ``lam`` may be any finite real; iteration code restricts it to [0, 1].
    """
    x, y = as_vector(x, "x"), as_vector(y, "y")
    _same_dim(x, y)
    lam = float(lam)
    if not math.isfinite(lam):
        raise ContractViolation("lambda must be finite")
    return lam * x + (1.0 - lam) * y


def convexity_identity_residual(lam, x, y):
    r"""Absolute defect of the two-point identity

    .. math::
        \|\lambda x + (1-\lambda) y\|^2
        = \lambda\|x\|^2 + (1-\lambda)\|y\|^2 - \lambda(1-\lambda)\|x-y\|^2 .

    Zero in exact arithmetic for every real ``lam``.
    """
    x, y = as_vector(x, "x"), as_vector(y, "y")
    _same_dim(x, y)
    lam = float(lam)
    if not math.isfinite(lam):
        raise ContractViolation("lambda must be finite")
    lhs = float(np.dot(z := lam * x + (1.0 - lam) * y, z))
    d = x - y
    rhs = lam * float(np.dot(x, x)) + (1.0 - lam) * float(np.dot(y, y)) - lam * (1.0 - lam) * float(np.dot(d, d))
    return abs(lhs - rhs)


def to_list(x):
    """JSON form of a vector: a plain list of floats."""
    return [float(c) for c in np.asarray(x, dtype=float)]
