"""Grid-level diagnostics for the rescaled sequence and its limit candidate,
plus probes for normal (Marty-bounded) families, families with f# bounded
below, and zero-free families."""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MartyDivergingError, ZeroFreeError
from .holofun import evaluate_many, instantiate, reciprocal
from .levi import sharp, sharp_values
from .marty import BOUNDED, DIVERGING, marty_probe
from .sampling import ball_grid, ball_sample
from .validation import check_points, check_positive_real, check_schedule

CONVERGING = "CONVERGING"
INCONCLUSIVE = "INCONCLUSIVE"

OK = "OK"
SUSPECT = "SUSPECT"


@dataclass(frozen=True)
class CauchyPair:
    j_low: int
    j_high: int
    sup_diff: float


@dataclass(frozen=True)
class ConvergenceReport:
    radius: float
    pairs: tuple
    cauchy_verdict: str
    limit_sharp_max: float
    limit_sharp_origin: float
    min_abs_limit: float
    max_abs_limit: float

    @property
    def sup_diffs(self):
        return np.array([p.sup_diff for p in self.pairs])

    def to_dict(self):
        return {
            "radius": self.radius,
            "pairs": [vars(p) for p in self.pairs],
            "cauchy_verdict": self.cauchy_verdict,
            "limit_sharp_max": self.limit_sharp_max,
            "limit_sharp_origin": self.limit_sharp_origin,
            "min_abs_limit": self.min_abs_limit,
            "max_abs_limit": self.max_abs_limit,
        }


def cauchy_verdict(sup_diffs, growth_factor=1.1, shrink=0.1, atol=1e-8):
    """CONVERGING when successive differences never grow by more than
    ``growth_factor`` and the last is below ``shrink`` times the first.

    Differences at or below ``atol`` count as zero (rounding level).
    """
    d = np.where(np.asarray(sup_diffs, float) <= atol, 0.0, sup_diffs)
    if len(d) == 0:
        return INCONCLUSIVE
    monotone = all(b <= growth_factor * a for a, b in zip(d, d[1:]))
    shrinking = d[-1] < shrink * d[0] or d[-1] == 0.0
    return CONVERGING if monotone and shrinking else INCONCLUSIVE


def convergence_diagnostic(steps, radius, grid_per_dim, seed=0, atol=1e-8):
    """Sup-norm differences of successive ``g_j`` on a ball grid, and the
    limit properties of the largest-j function."""
    steps = sorted(steps, key=lambda s: s.j)
    if len(steps) < 2:
        raise ValueError("at least 2 rescaling steps are required")
    dims = {s.dimension for s in steps}
    alphas = {s.alpha for s in steps}
    if len(dims) != 1 or len(alphas) != 1:
        raise ValueError("steps must share dimension and alpha")
    radius = check_positive_real(radius, "radius")
    if radius > steps[0].j / 2.0:
        raise DomainError(f"radius {radius} exceeds min(j)/2 = {steps[0].j / 2.0}")
    n = dims.pop()
    origin = np.zeros(n, dtype=complex)
    grid = ball_grid(origin, radius, grid_per_dim, seed)
    values = [evaluate_many(s.g, grid) for s in steps]
    pairs = tuple(
        CauchyPair(a.j, b.j, float(np.max(np.abs(va - vb))))
        for a, b, va, vb in zip(steps, steps[1:], values, values[1:])
    )
    last = steps[-1].g
    abs_last = np.abs(values[-1])
    return ConvergenceReport(
        radius=radius,
        pairs=pairs,
        cauchy_verdict=cauchy_verdict([p.sup_diff for p in pairs], atol=atol),
        limit_sharp_max=float(np.max(sharp_values(last, grid))),
        limit_sharp_origin=sharp(last, origin).value,
        min_abs_limit=float(abs_last.min()),
        max_abs_limit=float(abs_last.max()),
    )


def limit_sharp_check(g, radius, grid_per_dim, seed=0):
    """``max(0, max_grid g# - g#(0))``; zero means the grid maximum of g#
    sits at the origin."""
    origin = np.zeros(g.dimension, dtype=complex)
    grid = ball_grid(origin, radius, grid_per_dim, seed)
    vals = sharp_values(g, grid)
    return float(max(0.0, np.max(vals) - vals[0]))


@dataclass(frozen=True)
class BackwardRecord:
    j: int
    origin_sharp: float
    bound: float


def normal_backward_probe(family, j_schedule, z_seq, rho_seq, K, cfg, tol=1e-9):
    """For a Marty-bounded family, ``g_j(z) = f_j(z_j + rho_j z)`` has
    ``g_j#(0) = rho_j f_j#(z_j) <= M rho_j``.

    Raises :class:`MartyDivergingError` if the family looks diverging on
    ``K``. Returns ``(records, marty_report)``; ``records[k].bound`` is
    ``M rho_j + tol``.
    """
    js = check_schedule(j_schedule)
    if len(z_seq) != len(js) or len(rho_seq) != len(js):
        raise ValueError("z_seq and rho_seq must match the schedule length")
    report = marty_probe(family, K, js, cfg)
    if report.verdict.kind == DIVERGING:
        raise MartyDivergingError(
            f"family is Marty-diverging on K (exponent {report.verdict.growth_exponent:.3g})"
        )
    M = report.verdict.m_estimate
    Zs = check_points(np.asarray(z_seq, dtype=complex).reshape(len(js), -1), family.dimension)
    if not np.all(K.contains(Zs, 1e-12)):
        raise DomainError("every z_j must lie in K")
    records = []
    for j, zj, rho in zip(js, Zs, rho_seq):
        rho = check_positive_real(rho, "rho")
        # sharp of z -> f_j(z_j + rho z) at the origin
        s = rho * sharp(instantiate(family, j), zj).value
        records.append(BackwardRecord(j, float(s), M * rho + tol))
    return tuple(records), report


@dataclass(frozen=True)
class EpsilonProbeResult:
    hypothesis_held: bool
    min_sharp: tuple
    marty_verdict: str
    marty_report: object

    @property
    def consistent(self):
        """A held hypothesis must come with a BOUNDED verdict."""
        return not self.hypothesis_held or self.marty_verdict == BOUNDED


def epsilon_family_probe(family, epsilon, K, j_schedule, cfg, num_points=10_000):
    """Check ``f_j# > epsilon`` on sampled points of ``K`` for every j, and
    report the Marty verdict that must then be BOUNDED."""
    epsilon = check_positive_real(epsilon, "epsilon")
    js = check_schedule(j_schedule)
    Z = ball_sample(K.center, K.radius, num_points, cfg.seed)
    mins = tuple(float(np.min(sharp_values(instantiate(family, j), Z))) for j in js)
    held = all(m > epsilon for m in mins)
    report = marty_probe(family, K, js, cfg)
    return EpsilonProbeResult(held, mins, report.verdict.kind, report)


def reciprocal_sharp_check(family, points, j_values):
    """Max over j and points of ``|(1/f_j)#(z) - f_j#(z)|``."""
    if not family.zero_free:
        raise ZeroFreeError("reciprocal_sharp_check needs a zero-free family")
    Z = check_points(points, family.dimension)
    worst = 0.0
    for j in j_values:
        f = instantiate(family, j)
        diff = np.abs(sharp_values(reciprocal(f, True), Z) - sharp_values(f, Z))
        worst = max(worst, float(diff.max()))
    return worst


def zero_free_limit_check(report, family_zero_free, threshold=1e-9):
    """Hurwitz dichotomy at grid level: a limit of zero-free functions is
    either nowhere zero or identically zero. Returns OK, SUSPECT, or
    ``None`` when the family is not zero-free (nothing to check)."""
    if not family_zero_free:
        return None
    if report.min_abs_limit > threshold or report.max_abs_limit < threshold:
        return OK
    return SUSPECT
