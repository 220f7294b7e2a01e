"""Numerical laboratory for Zalcman-type rescaling of holomorphic families in C^n."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DimensionError,
    DomainError,
    ExpressionError,
    MartyDivergingError,
    NonConvergence,
    NumericRangeError,
    PreconditionUnmet,
    ZalcmanLabError,
    ZeroFreeError,
)
from .holofun import (  # noqa: E402
    Ball,
    FamilySpec,
    FunExpr,
    affine_reparam,
    evaluate,
    gradient,
    instantiate,
    make_family,
    parse_expression,
    reciprocal,
    scale_by_power,
)
from .levi import levi_form, sharp, sharp_via_direction_sup  # noqa: E402
from .marty import CompactBall, OptimizerConfig, marty_probe, sup_sharp_on_ball  # noqa: E402
from .zalcman import (  # noqa: E402
    lemma_lp_solve,
    weight_inequality_check,
    phi,
    recenter,
    rescale_step,
    sharp_upper_bound,
    weighted_max,
)
from .limits import (  # noqa: E402
    convergence_diagnostic,
    epsilon_family_probe,
    limit_sharp_check,
    normal_backward_probe,
    reciprocal_sharp_check,
    zero_free_limit_check,
)
