"""Deterministic point sets: quasi-random ball grids and random unit directions."""
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

MAX_GRID_POINTS = 20_000_000


def _to_complex(X, n):
    return X[:, :n] + 1j * X[:, n:]


@lru_cache(maxsize=64)
def _unit_ball_grid(n, per_dim, seed):
    count = per_dim ** (2 * n)
    if count > MAX_GRID_POINTS:
        raise ValueError(
            f"grid of {per_dim}^{2 * n} = {count} points is too large; lower grid_per_dim"
        )
    X = qmc.Halton(d=2 * n, scramble=True, seed=seed).random(count)
    X = 2.0 * X - 1.0
    X = X[np.einsum("ij,ij->i", X, X) <= 1.0]
    pts = np.vstack([np.zeros((1, n), dtype=complex), _to_complex(X, n)])
    pts.setflags(write=False)
    return pts


def ball_grid(center, radius, per_dim, seed=0):
    """Quasi-random grid of a closed ball in C^n.

    ``per_dim ** (2n)`` Halton points are drawn in the cube around the ball
    (real coordinates), points outside the ball are discarded and the center
    is prepended as row 0. The order is deterministic given ``seed``.
    """
    center = np.atleast_1d(np.asarray(center, dtype=complex))
    return center + radius * _unit_ball_grid(center.size, int(per_dim), int(seed))


def ball_sample(center, radius, num_points, seed=0):
    """Exactly ``num_points`` quasi-random points of a closed ball in C^n."""
    center = np.atleast_1d(np.asarray(center, dtype=complex))
    n = center.size
    engine = qmc.Halton(d=2 * n, scramble=True, seed=seed)
    kept = []
    have = 0
    while have < num_points:
        X = 2.0 * engine.random(max(64, 2 * (num_points - have) * 2 ** n)) - 1.0
        X = X[np.einsum("ij,ij->i", X, X) <= 1.0]
        kept.append(X)
        have += len(X)
    X = np.vstack(kept)[:num_points]
    return center + radius * _to_complex(X, n)


def unit_directions(n, num, seed):
    """``num`` directions uniform on the unit sphere of C^n (normalized Gaussians)."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((num, 2 * n))
    V = _to_complex(G, n)
    return V / np.linalg.norm(V, axis=1, keepdims=True)
