"""scikit-learn style wrappers.

The fitted "data" is a :class:`~zalcmanlab.holofun.FamilySpec` (or, for
:class:`SharpDerivative`, nothing at all); ``transform`` acts on arrays of
points in C^n with shape (m, n). Hyperparameters are plain constructor
arguments so ``get_params``/``set_params``/``clone`` work as usual.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import PreconditionUnmet
from .holofun import Ball, FamilySpec, FunExpr, evaluate_many, parse_expression
from .levi import sharp_values
from .limits import convergence_diagnostic
from .marty import OptimizerConfig, marty_probe
from .validation import check_points, check_schedule
from .zalcman import recenter, rescale_step


def _check_family(family):
    if not isinstance(family, FamilySpec):
        raise TypeError(f"expected a FamilySpec, got {type(family).__name__}")
    return family


class SharpDerivative(TransformerMixin, BaseEstimator):
    """Map points to ``f#(z)`` for a fixed expression.

    Parameters
    ----------
    expression : str or FunExpr
    dimension : int, used when ``expression`` is text
    """

    def __init__(self, expression="z1", dimension=1):
        self.expression = expression
        self.dimension = dimension

    def fit(self, X=None, y=None):
        f = self.expression
        if not isinstance(f, FunExpr):
            f = parse_expression(f, self.dimension)
        if f.has_param:
            raise ValueError("expression still contains the parameter j")
        self.function_ = f
        self.n_features_in_ = f.dimension
        if X is not None:
            check_points(X, f.dimension)
        return self

    def transform(self, X):
        check_is_fitted(self, "function_")
        return sharp_values(self.function_, check_points(X, self.n_features_in_))


class _OptimizerParams:
    def _optimizer(self):
        return OptimizerConfig(self.grid_per_dim, self.multistarts, self.refine_iters,
                               self.value_tol, self.seed)


class MartyProbe(_OptimizerParams, BaseEstimator):
    """Estimate ``sup_K f_j#`` along a schedule and classify its growth.

    After ``fit(family)``: ``report_``, ``verdict_`` (``"BOUNDED"`` or
    ``"DIVERGING"``), ``sup_estimates_``.
    """

    def __init__(self, j_schedule=(5, 10, 20, 40), ball_center=None, ball_radius=0.5,
                 grid_per_dim=16, multistarts=8, refine_iters=100, value_tol=1e-12, seed=0):
        self.j_schedule = j_schedule
        self.ball_center = ball_center
        self.ball_radius = ball_radius
        self.grid_per_dim = grid_per_dim
        self.multistarts = multistarts
        self.refine_iters = refine_iters
        self.value_tol = value_tol
        self.seed = seed

    def fit(self, family, y=None):
        family = _check_family(family)
        center = self.ball_center
        if center is None:
            center = family.domain.center
        K = Ball(center, self.ball_radius)
        self.report_ = marty_probe(family, K, check_schedule(self.j_schedule), self._optimizer())
        self.verdict_ = self.report_.verdict.kind
        self.sup_estimates_ = self.report_.sups
        return self


class ZalcmanRescaler(_OptimizerParams, TransformerMixin, BaseEstimator):
    """Extract rescaling steps ``g_j(z) = r_j^alpha f_j(xi_j + r_j z)``.

    ``fit(family)`` recenters the family at ``probe_center``, computes one
    step per j (indices where no step exists are listed in
    ``skipped_``) and, with at least two steps, a Cauchy diagnostic in
    ``convergence_``. ``transform(X)`` evaluates every fitted ``g_j`` at the
    points of ``X``; the result has one column per step.
    """

    def __init__(self, alpha=0.0, j_schedule=(10, 20, 40, 80), probe_center=None,
                 bisect_tol=1e-10, report_radius=1.0, report_grid_per_dim=32,
                 grid_per_dim=16, multistarts=8, refine_iters=100, value_tol=1e-12, seed=0):
        self.alpha = alpha
        self.j_schedule = j_schedule
        self.probe_center = probe_center
        self.bisect_tol = bisect_tol
        self.report_radius = report_radius
        self.report_grid_per_dim = report_grid_per_dim
        self.grid_per_dim = grid_per_dim
        self.multistarts = multistarts
        self.refine_iters = refine_iters
        self.value_tol = value_tol
        self.seed = seed

    def fit(self, family, y=None):
        family = _check_family(family)
        center = self.probe_center
        if center is None:
            center = np.zeros(family.dimension, dtype=complex)
        family = recenter(family, center)
        cfg = self._optimizer()
        steps, skipped = [], []
        for j in check_schedule(self.j_schedule):
            try:
                steps.append(rescale_step(family, j, self.alpha, cfg, self.bisect_tol,
                                          self.report_radius, self.report_grid_per_dim))
            except PreconditionUnmet:
                skipped.append(j)
        self.steps_ = tuple(steps)
        self.skipped_ = tuple(skipped)
        self.n_features_in_ = family.dimension
        self.convergence_ = None
        if len(steps) >= 2:
            self.convergence_ = convergence_diagnostic(
                steps, min(self.report_radius, steps[0].j / 2), self.report_grid_per_dim, self.seed)
        return self

    def transform(self, X):
        check_is_fitted(self, "steps_")
        X = check_points(X, self.n_features_in_)
        if not self.steps_:
            return np.empty((X.shape[0], 0), dtype=complex)
        return np.column_stack([evaluate_many(s.g, X) for s in self.steps_])
