"""Constructive rescaling: the weighted functional, its normalization root,
and the rescaled functions ``g_j(z) = r_j^alpha f_j(xi_j + r_j z)``.

All functions assume the family has been recentered so that the probe point
is the origin and ``f_j`` is holomorphic on the closed unit ball (see
:func:`recenter`).
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergence, PreconditionUnmet
from .holofun import (
    Ball,
    FamilySpec,
    affine_reparam,
    check_zero_free,
    instantiate,
    scale_by_power,
)
from .levi import sharp, sharp_parts, sharp_values
from .marty import maximize_on_ball
from .sampling import ball_grid
from .validation import check_point, check_positive_int, check_positive_real


def check_alpha(alpha, zero_free=False):
    """Validate the rescaling exponent: ``alpha > -1`` unless zero-free."""
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha}")
    if alpha <= -1 and not zero_free:
        raise ValueError(f"alpha = {alpha} <= -1 is only admitted for zero-free families")
    return alpha


def _phi_core(absf, normdf, s, alpha):
    """Weighted functional in terms of |f|, |Df| and s = (1 - j|z|) t.

    For negative alpha numerator and denominator are multiplied by
    s^(-2 alpha) so only nonnegative powers of s appear; this keeps
    s -> 0 finite and is the same function.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if alpha >= 0:
            num = s ** (1.0 + alpha) * normdf
            den = 1.0 + s ** (2.0 * alpha) * absf * absf
        else:
            num = s ** (1.0 - alpha) * normdf
            den = s ** (-2.0 * alpha) + absf * absf
        out = num / den
    return np.where(s > 0, out, 0.0)


def _weight(Z, j):
    return np.maximum(1.0 - j * np.linalg.norm(Z, axis=1), 0.0)


def _check_in_small_ball(z, j):
    if np.linalg.norm(z) > (1.0 + 1e-12) / j:
        raise DomainError(f"|z| = {np.linalg.norm(z):.6g} exceeds 1/j = {1.0 / j:.6g}")


def phi(f, j, alpha, t, z):
    """The weighted functional at ``t`` in [0, 1] and ``|z| <= 1/j``.

    ``(1-j|z|)^(1+a) t^(1+a) (1+|f|^2) f#(z) / (1 + (1-j|z|)^(2a) t^(2a) |f|^2)``
    """
    j = check_positive_int(j, "j")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    z = check_point(z, f.dimension)
    _check_in_small_ball(z, j)
    s_, nd, a = sharp_parts(f, z[None, :])
    w = _weight(z[None, :], j)
    return float(_phi_core(a, nd, w * t, float(alpha))[0])


def phi_general(f, j, alpha, t, z):
    """The functional evaluated literally term by term (reference path)."""
    z = check_point(z, f.dimension)
    _check_in_small_ball(z, j)
    sv = sharp(f, z)
    w = max(1.0 - j * float(np.linalg.norm(z)), 0.0)
    a2 = sv.abs_f ** 2
    num = w ** (1 + alpha) * t ** (1 + alpha) * (1 + a2) * sv.value
    den = 1 + w ** (2 * alpha) * t ** (2 * alpha) * a2
    return num / den


def weighted_max(f, j, alpha, cfg):
    """Best found ``(1-j|z|)^(1+|alpha|) f#(z)`` over ``|z| <= 1/j``."""
    j = check_positive_int(j, "j")
    p = 1.0 + abs(float(alpha))

    def objective(Z):
        return _weight(Z, j) ** p * sharp_values(f, Z)

    return maximize_on_ball(objective, np.zeros(f.dimension, dtype=complex), 1.0 / j, cfg)


@dataclass(frozen=True)
class LemmaSolution:
    xi_star: np.ndarray
    rho: float
    max_value: float
    iterations: int


def solve_normalization(f, j, alpha, cfg, bisect_tol=1e-10, max_iter=200):
    """Bisection on ``t -> max_z phi(t, z) - 1``; full diagnostics."""
    j = check_positive_int(j, "j")
    alpha = float(alpha)
    bisect_tol = check_positive_real(bisect_tol, "bisect_tol")
    center = np.zeros(f.dimension, dtype=complex)

    def M(t):
        def objective(Z):
            _, nd, a = sharp_parts(f, Z)
            return _phi_core(a, nd, _weight(Z, j) * t, alpha)

        return maximize_on_ball(objective, center, 1.0 / j, cfg)

    m1, x1 = M(1.0)
    if not m1 > 1.0:
        raise PreconditionUnmet(
            f"max of the weighted functional at t = 1 is {m1:.6g} <= 1 for j = {j}",
            max_value=m1,
        )
    if m1 - 1.0 <= bisect_tol:
        raise NonConvergence(f"M(1) = {m1!r} is within tolerance of 1; rho would not lie in (0, 1)")
    lo, hi = 0.0, 1.0
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        m, x = M(mid)
        if abs(m - 1.0) <= bisect_tol:
            return LemmaSolution(x, mid, m, it)
        if m < 1.0:
            lo = mid
        else:
            hi = mid
        if not lo < 0.5 * (lo + hi) < hi:
            break
    raise NonConvergence(
        f"bisection stalled at t in [{lo!r}, {hi!r}] without |M(t) - 1| <= {bisect_tol:g}"
    )


def lemma_lp_solve(f, j, alpha, cfg, bisect_tol=1e-10):
    """Return ``(xi_star, rho)`` with ``max_z phi(rho, z) = phi(rho, xi_star) = 1``
    up to ``bisect_tol``.

    Raises :class:`PreconditionUnmet` when ``max_z phi(1, z) <= 1`` and
    :class:`NonConvergence` when bisection cannot reach the tolerance.
    """
    sol = solve_normalization(f, j, alpha, cfg, bisect_tol)
    return sol.xi_star, sol.rho


def sharp_upper_bound(j, alpha):
    """``(1 + sgn(alpha)/j)^(2 alpha) * (1 / (1 - 1/j))^(1 + alpha)``."""
    j = check_positive_int(j, "j", minimum=2)
    alpha = float(alpha)
    sgn = float(np.sign(alpha))
    return (1.0 + sgn / j) ** (2.0 * alpha) * (1.0 / (1.0 - 1.0 / j)) ** (1.0 + alpha)


def weight_inequality_check(f, j, alpha, z):
    """``phi(1, z) >= (1-j|z|)^(1+|alpha|) f#(z)`` up to 1e-12 (relative above 1)."""
    j = check_positive_int(j, "j")
    z = check_point(z, f.dimension)
    _check_in_small_ball(z, j)
    lhs = phi(f, j, alpha, 1.0, z)
    w = max(1.0 - j * float(np.linalg.norm(z)), 0.0)
    rhs = w ** (1.0 + abs(alpha)) * sharp(f, z).value
    return bool(lhs >= rhs - 1e-12 * max(1.0, rhs))


def weight_scalar_violation(s, w, alpha):
    """Relative violation of the scalar inequalities behind :func:`weight_inequality_check`.

    With ``p = s^(2 alpha)``: for ``alpha <= 0`` the claim is
    ``p (1 + w) >= 1 + p w``; for ``alpha > 0`` it is ``1 + p w <= 1 + w``.
    Returns ``max(0, (smaller_side_expected - larger)/larger)`` elementwise.
    """
    s, w, alpha = np.broadcast_arrays(np.asarray(s, float), np.asarray(w, float),
                                      np.asarray(alpha, float))
    p = s ** (2.0 * alpha)
    big = np.where(alpha <= 0, p * (1.0 + w), 1.0 + w)
    small = 1.0 + p * w
    return np.maximum(0.0, (small - big) / big)


def recenter(family, z0):
    """Move the probe point ``z0`` to the origin and the domain to the unit ball.

    ``f_j`` becomes ``z -> f_j(z0 + s z)`` with ``s`` the largest radius of a
    ball around ``z0`` inside the domain.
    """
    z0 = check_point(z0, family.dimension)
    c = np.asarray(family.domain.center)
    s = family.domain.radius - float(np.linalg.norm(z0 - c))
    if s <= 0:
        raise DomainError("probe point is not interior to the family domain")
    if s == 1.0 and not np.any(z0):
        return FamilySpec(family.template, Ball.unit(family.dimension),
                          family.zero_free, family.name)
    template = affine_reparam(family.template, z0, s)
    return FamilySpec(template, Ball.unit(family.dimension), family.zero_free, family.name)


@dataclass(frozen=True)
class RescalingStep:
    j: int
    alpha: float
    xi_star: tuple
    rho: float
    r: float
    g: object
    sharp_origin_residual: float
    bound_value: float
    max_sharp_on_grid: float
    report_radius: float
    # |z| <= 1/(j^2 rho) is where the ratio estimates behind the bound hold
    bound_radius: float
    max_sharp_in_bound_radius: float
    lemma_max: float
    bisect_iterations: int

    @property
    def dimension(self):
        return len(self.xi_star)

    def to_dict(self):
        return {
            "j": self.j,
            "alpha": self.alpha,
            "xi_star": [[c.real, c.imag] for c in self.xi_star],
            "rho": self.rho,
            "r": self.r,
            "g": str(self.g),
            "sharp_origin_residual": self.sharp_origin_residual,
            "bound_value": self.bound_value,
            "max_sharp_on_grid": self.max_sharp_on_grid,
            "report_radius": self.report_radius,
            "bound_radius": self.bound_radius,
            "max_sharp_in_bound_radius": self.max_sharp_in_bound_radius,
            "lemma_max": self.lemma_max,
            "bisect_iterations": self.bisect_iterations,
        }


def _check_recentered(family):
    if not family.domain.contains_ball(Ball.unit(family.dimension)):
        raise DomainError("family must be recentered to the closed unit ball (use recenter)")


def rescale_step(family, j, alpha, cfg, bisect_tol=1e-10, report_radius=1.0,
                 report_grid_per_dim=None):
    """One rescaling step at index ``j``.

    Solves the normalization for ``(xi*, rho)``, sets
    ``r = (1 - j|xi*|) rho`` and ``g(z) = r^alpha f_j(xi* + r z)``, and
    records ``|g#(0) - 1|`` and the grid maximum of ``g#`` on
    ``|z| <= min(j/2, report_radius)``.
    """
    j = check_positive_int(j, "j", minimum=2)
    alpha = check_alpha(alpha, family.zero_free)
    _check_recentered(family)
    if family.zero_free:
        check_zero_free(family, j, ball=Ball((0j,) * family.dimension, 1.0 / j))
    f = instantiate(family, j)
    sol = solve_normalization(f, j, alpha, cfg, bisect_tol)
    xi = sol.xi_star
    r = (1.0 - j * float(np.linalg.norm(xi))) * sol.rho
    g = scale_by_power(affine_reparam(f, xi, r), r, alpha)

    residual = abs(sharp(g, np.zeros(f.dimension)).value - 1.0)
    per_dim = report_grid_per_dim or cfg.grid_per_dim
    radius = min(j / 2.0, float(report_radius))
    origin = np.zeros(f.dimension, dtype=complex)
    max_grid = float(np.max(sharp_values(g, ball_grid(origin, radius, per_dim, cfg.seed))))
    bound_radius = 1.0 / (j * j * sol.rho)
    inner = min(radius, bound_radius)
    max_inner = float(np.max(sharp_values(g, ball_grid(origin, inner, per_dim, cfg.seed))))
    return RescalingStep(
        j=j,
        alpha=alpha,
        xi_star=tuple(complex(c) for c in xi),
        rho=float(sol.rho),
        r=float(r),
        g=g,
        sharp_origin_residual=float(residual),
        bound_value=sharp_upper_bound(j, alpha),
        max_sharp_on_grid=max_grid,
        report_radius=radius,
        bound_radius=bound_radius,
        max_sharp_in_bound_radius=max_inner,
        lemma_max=float(sol.max_value),
        bisect_iterations=sol.iterations,
    )
