"""Input validation helpers, in the spirit of ``sklearn.utils.validation``.

scikit-learn's own ``check_array`` rejects complex input, so points in C^n
are checked here.
"""
import numbers

import numpy as np

from .errors import DimensionError, NumericRangeError


def check_points(Z, dimension=None):
    """Return ``Z`` as a finite complex array of shape (m, n).

    A one-dimensional input is read as a single point.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim == 0:
        Z = Z.reshape(1, 1)
    elif Z.ndim == 1:
        Z = Z.reshape(1, -1)
    elif Z.ndim != 2:
        raise DimensionError(f"expected a 2-d array of points, got shape {Z.shape}")
    if Z.shape[1] < 1:
        raise DimensionError("points must have at least one coordinate")
    if dimension is not None and Z.shape[1] != dimension:
        raise DimensionError(
            f"points have {Z.shape[1]} coordinates, expected {dimension}"
        )
    if not np.all(np.isfinite(Z)):
        raise NumericRangeError("non-finite coordinate in input points")
    return Z


def check_point(z, dimension=None):
    """Return a single point as a complex vector of shape (n,)."""
    Z = check_points(z, dimension)
    if Z.shape[0] != 1:
        raise DimensionError(f"expected a single point, got {Z.shape[0]}")
    return Z[0]


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_positive_real(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


def check_schedule(j_schedule, name="j_schedule"):
    """Nonempty, strictly increasing positive integers."""
    js = [check_positive_int(j, name) for j in j_schedule]
    if not js:
        raise ValueError(f"{name} must be nonempty")
    if any(b <= a for a, b in zip(js, js[1:])):
        raise ValueError(f"{name} must be strictly increasing, got {js}")
    return tuple(js)
