"""Levi form of log(1 + |f|^2) and the sharp derivative f#.

For holomorphic ``f`` the Levi form of ``log(1 + |f|^2)`` in direction ``v``
is ``|<Df, v>|^2 / (1 + |f|^2)^2`` with the bilinear pairing
``<Df, v> = sum_k f_k v_k``. Its square root is maximized over unit ``v`` at
``v* = conj(Df)/|Df|``, which gives ``f# = |Df| / (1 + |f|^2)``.
"""
from dataclasses import dataclass

import numpy as np

from .holofun import value_and_gradient
from .sampling import unit_directions
from .validation import check_point, check_positive_int


@dataclass(frozen=True)
class SharpValue:
    value: float
    gradient_norm: float
    abs_f: float


def _sharp_from(absf, normdf):
    # for |f| > 1 divide through by |f| to keep |f|^2 from overflowing
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        big = absf > 1.0
        direct = normdf / (1.0 + absf * absf)
        scaled = (normdf / absf) / (absf + 1.0 / absf)
    return np.where(big, scaled, direct)


def _row_norms(G):
    # scaled by the largest component so huge gradients do not overflow
    A = np.abs(G)
    top = A.max(axis=1, initial=0.0)
    safe = np.where(top > 0, top, 1.0)
    return top * np.sqrt(np.sum((A / safe[:, None]) ** 2, axis=1))


def sharp_parts(f, Z):
    """Arrays (sharp, |Df|, |f|) at each row of ``Z``."""
    v, g = value_and_gradient(f, Z)
    absf = np.abs(v)
    normdf = _row_norms(g)
    return _sharp_from(absf, normdf), normdf, absf


def sharp_values(f, Z):
    """Vectorized f# at each row of ``Z``."""
    return sharp_parts(f, Z)[0]


def sharp(f, z):
    """f# at a single point, with the pieces of the closed form."""
    z = check_point(z, f.dimension)
    s, nd, a = sharp_parts(f, z[None, :])
    return SharpValue(float(s[0]), float(nd[0]), float(a[0]))


def levi_form(f, z, v):
    """Levi form of log(1 + |f|^2) at ``z`` in direction ``v`` (any length)."""
    z = check_point(z, f.dimension)
    v = check_point(v, f.dimension)
    val, g = value_and_gradient(f, z[None, :])
    pairing = np.dot(g[0], v)
    return float(abs(pairing) ** 2 / (1.0 + abs(val[0]) ** 2) ** 2)


def maximizing_direction(f, z):
    """``conj(Df)/|Df|``, or ``None`` where the gradient vanishes."""
    g = value_and_gradient(f, check_point(z, f.dimension)[None, :])[1][0]
    norm = np.linalg.norm(g)
    if norm == 0:
        return None
    return np.conj(g) / norm


def direction_samples(f, z, num_samples, seed):
    """sqrt of the Levi form over ``num_samples`` random unit directions."""
    num_samples = check_positive_int(num_samples, "num_samples")
    z = check_point(z, f.dimension)
    val, g = value_and_gradient(f, z[None, :])
    V = unit_directions(f.dimension, num_samples, seed)
    return np.abs(V @ g[0]) / (1.0 + abs(val[0]) ** 2)


def sharp_via_direction_sup(f, z, num_samples, seed):
    """f# as the supremum over unit directions of sqrt(Levi form).

    Validation oracle only: the analytic maximizer is always among the
    candidates, together with ``num_samples`` seeded random directions.
    """
    num_samples = check_positive_int(num_samples, "num_samples")
    v_star = maximizing_direction(f, z)
    if v_star is None:
        return 0.0
    best = np.sqrt(levi_form(f, z, v_star))
    return float(max(best, np.max(direction_samples(f, z, num_samples, seed))))
