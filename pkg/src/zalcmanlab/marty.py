"""Sup estimates of f# on compact balls and a Marty-style growth classifier.

The optimizer is a quasi-random grid over the ball followed by multistart
coordinate direct search with shrinking steps. It is deterministic: the
grid is seeded, ties go to the earliest grid point, and all reductions are
ordered.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError
from .holofun import Ball, instantiate
from .levi import sharp_values
from .sampling import ball_grid
from .validation import check_schedule

CompactBall = Ball

BOUNDED = "BOUNDED"
DIVERGING = "DIVERGING"


@dataclass(frozen=True)
class OptimizerConfig:
    grid_per_dim: int = 16
    multistarts: int = 8
    refine_iters: int = 100
    value_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if int(self.grid_per_dim) < 8:
            raise ValueError(f"grid_per_dim must be >= 8, got {self.grid_per_dim}")
        if int(self.multistarts) < 1:
            raise ValueError(f"multistarts must be >= 1, got {self.multistarts}")
        if int(self.refine_iters) < 1:
            raise ValueError(f"refine_iters must be >= 1, got {self.refine_iters}")
        if not (float(self.value_tol) > 0):
            raise ValueError(f"value_tol must be positive, got {self.value_tol}")

    def to_dict(self):
        return asdict(self)


def _project(X, center, radius):
    D = X - center
    norm = np.linalg.norm(D, axis=1)
    outside = norm > radius
    if outside.any():
        D[outside] *= (radius / norm[outside])[:, None]
        X = center + D
    return X


def maximize_on_ball(objective, center, radius, cfg):
    """Maximize a vectorized real ``objective`` over a closed ball in C^n.

    ``objective`` maps an (m, n) complex array to m real values. Returns
    ``(value, argmax)``. The value is never below the best grid value, and
    the grid always contains the center.
    """
    center = np.atleast_1d(np.asarray(center, dtype=complex))
    n = center.size
    grid = ball_grid(center, radius, cfg.grid_per_dim, cfg.seed)
    vals = np.asarray(objective(grid), dtype=float)
    if np.isnan(vals).any():
        k = int(np.argmax(np.isnan(vals)))
        raise ArithmeticError(f"objective is NaN at grid point {grid[k]}")
    best_i = int(np.argmax(vals))
    best_val, best_x = float(vals[best_i]), grid[best_i].copy()

    order = np.argsort(-vals, kind="stable")[: cfg.multistarts]
    X = grid[order].copy()
    F = vals[order].copy()
    step = np.full(len(X), 2.0 * radius / cfg.grid_per_dim)
    for _ in range(cfg.refine_iters):
        improved = np.zeros(len(X), dtype=bool)
        for d in range(2 * n):
            unit = 1.0 if d < n else 1j
            k = d % n
            for sign in (1.0, -1.0):
                C = X.copy()
                C[:, k] += sign * unit * step
                C = _project(C, center, radius)
                fc = np.asarray(objective(C), dtype=float)
                better = fc > F
                X[better] = C[better]
                F[better] = fc[better]
                improved |= better
        step[~improved] *= 0.5
        if np.all(step < cfg.value_tol):
            break
    i = int(np.argmax(F))
    if F[i] > best_val:
        best_val, best_x = float(F[i]), X[i].copy()
    return best_val, best_x


def sup_sharp_on_ball(f, K, cfg):
    """Best found ``max f#`` over the ball ``K``; returns (value, argmax)."""
    if K.dimension != f.dimension:
        raise DomainError(f"ball has dimension {K.dimension}, function {f.dimension}")
    return maximize_on_ball(lambda Z: sharp_values(f, Z), K.center, K.radius, cfg)


@dataclass(frozen=True)
class MartyRecord:
    j: int
    sup_estimate: float
    argmax: tuple


@dataclass(frozen=True)
class MartyVerdict:
    """Numerical evidence only; never a proof of (non-)normality."""

    kind: str
    m_estimate: float
    growth_exponent: float = None


@dataclass(frozen=True)
class MartyReport:
    per_j: tuple
    verdict: MartyVerdict
    ball: Ball
    config: OptimizerConfig = field(default_factory=OptimizerConfig)

    @property
    def sups(self):
        return np.array([r.sup_estimate for r in self.per_j])

    def to_dict(self):
        return {
            "per_j": [
                {"j": r.j, "sup_estimate": r.sup_estimate,
                 "argmax": [[c.real, c.imag] for c in r.argmax]}
                for r in self.per_j
            ],
            "verdict": {
                "kind": self.verdict.kind,
                "M_estimate": self.verdict.m_estimate,
                "growth_exponent": self.verdict.growth_exponent,
                "note": "numerical evidence from sup estimates, not a proof",
            },
            "ball": {"center": [[c.real, c.imag] for c in self.ball.center],
                     "radius": self.ball.radius},
            "config": self.config.to_dict(),
        }


def growth_threshold(js):
    """Required ratio last/first sup: 10, or sqrt(j_last/j_first) on
    schedules spanning less than a factor 100."""
    return min(10.0, math.sqrt(js[-1] / js[0]))


def classify_growth(js, sups):
    """DIVERGING when log(sup) vs log(j) has slope > 0.5 and the last sup
    exceeds the first by :func:`growth_threshold`; BOUNDED otherwise."""
    js = np.asarray(js, dtype=float)
    sups = np.asarray(sups, dtype=float)
    m_est = float(sups.max())
    slope = None
    if len(js) >= 2 and np.all(sups > 0):
        slope = float(np.polyfit(np.log(js), np.log(sups), 1)[0])
        if slope > 0.5 and sups[-1] > growth_threshold(js) * sups[0]:
            return MartyVerdict(DIVERGING, m_est, slope)
    return MartyVerdict(BOUNDED, m_est, slope)


def marty_probe(family, K, j_schedule, cfg):
    """Estimate ``sup_K f_j#`` along ``j_schedule`` and classify the growth."""
    js = check_schedule(j_schedule)
    if not family.domain.contains_ball(K):
        raise DomainError("compact ball is not contained in the family domain")
    records = []
    for j in js:
        value, x = sup_sharp_on_ball(instantiate(family, j), K, cfg)
        records.append(MartyRecord(j, value, tuple(complex(c) for c in x)))
    verdict = classify_growth(js, [r.sup_estimate for r in records])
    return MartyReport(tuple(records), verdict, K, cfg)
