"""Holomorphic functions of n complex variables as immutable expression trees.

Trees are built from a small set of node kinds, evaluated on batches of
points with numpy, and differentiated by forward propagation of
(value, gradient) pairs. Every holomorphic node has an exact chain rule, so
the gradient is exact up to rounding.

Variables are stored zero-based (``Variable(0)`` prints as ``z1``).
"""
from __future__ import annotations

import math
import numbers
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DimensionError,
    ExpressionError,
    NumericRangeError,
    ZeroFreeError,
)
from .validation import check_point, check_points, check_positive_int

__all__ = [
    "Variable", "Constant", "Param", "Sum", "Product", "Negate",
    "IntegerPower", "Exp", "Reciprocal", "AffineSubstitution",
    "ScalarMultiple", "FunExpr", "Ball", "FamilySpec",
    "parse_expression", "to_text", "instantiate", "evaluate",
    "evaluate_many", "gradient", "value_and_gradient", "affine_reparam",
    "scale_by_power", "reciprocal", "check_zero_free", "make_family",
]


# ---------------------------------------------------------------------------
# Node kinds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    index: int

    def __post_init__(self):
        if isinstance(self.index, bool) or not isinstance(self.index, numbers.Integral) or self.index < 0:
            raise ExpressionError(f"variable index must be a nonnegative integer, got {self.index!r}")


@dataclass(frozen=True)
class Constant:
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise NumericRangeError(f"non-finite constant {v!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Param:
    """The integer family parameter ``j``."""

    symbol: str = "j"


@dataclass(frozen=True)
class Sum:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 1:
            raise ExpressionError("Sum needs at least one child")


@dataclass(frozen=True)
class Product:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 1:
            raise ExpressionError("Product needs at least one child")


@dataclass(frozen=True)
class Negate:
    child: "Node"


@dataclass(frozen=True)
class IntegerPower:
    child: "Node"
    exponent: Union[int, Param]

    def __post_init__(self):
        e = self.exponent
        if isinstance(e, Param):
            return
        if isinstance(e, bool) or not isinstance(e, numbers.Integral) or e < 0:
            raise ExpressionError(f"exponent must be a nonnegative integer, got {e!r}")
        object.__setattr__(self, "exponent", int(e))


@dataclass(frozen=True)
class Exp:
    child: "Node"


@dataclass(frozen=True)
class Reciprocal:
    child: "Node"
    zero_free_declared: bool = True

    def __post_init__(self):
        if self.zero_free_declared is not True:
            raise ZeroFreeError("reciprocal of a function not declared zero-free")


@dataclass(frozen=True)
class AffineSubstitution:
    """``child(center + scale * z)``."""

    child: "Node"
    center: tuple
    scale: float

    def __post_init__(self):
        center = tuple(complex(c) for c in self.center)
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in center):
            raise NumericRangeError("non-finite substitution center")
        scale = float(self.scale)
        if not (math.isfinite(scale) and scale > 0):
            raise ExpressionError(f"substitution scale must be positive and finite, got {scale}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "scale", scale)


@dataclass(frozen=True)
class ScalarMultiple:
    child: "Node"
    coefficient: float

    def __post_init__(self):
        c = float(self.coefficient)
        if not (math.isfinite(c) and c > 0):
            raise NumericRangeError(f"scalar coefficient must be positive and finite, got {c}")
        object.__setattr__(self, "coefficient", c)


Node = Union[Variable, Constant, Param, Sum, Product, Negate, IntegerPower,
             Exp, Reciprocal, AffineSubstitution, ScalarMultiple]

_UNARY = (Negate, IntegerPower, Exp, Reciprocal, AffineSubstitution, ScalarMultiple)


def _children(node):
    if isinstance(node, (Sum, Product)):
        return node.children
    if isinstance(node, _UNARY):
        return (node.child,)
    return ()


def _walk(node):
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(_children(n))


# ---------------------------------------------------------------------------
# Folding constructors
# ---------------------------------------------------------------------------

def _ipow(c, n):
    """Integer power by repeated squaring (exact for small Gaussian integers)."""
    result = 1 + 0j
    base = c
    while n:
        if n & 1:
            result *= base
        n >>= 1
        if n:
            base *= base
    return result


def make_sum(children):
    children = tuple(children)
    if all(isinstance(c, Constant) for c in children):
        return Constant(sum((c.value for c in children), 0j))
    return Sum(children)


def make_product(children):
    children = tuple(children)
    if all(isinstance(c, Constant) for c in children):
        v = 1 + 0j
        for c in children:
            v *= c.value
        return Constant(v)
    return Product(children)


def make_negate(child):
    if isinstance(child, Constant):
        return Constant(-child.value)
    return Negate(child)


def make_power(child, exponent):
    if isinstance(child, Constant) and not isinstance(exponent, Param):
        return Constant(_ipow(child.value, int(exponent)))
    return IntegerPower(child, exponent)


def make_reciprocal(child):
    if isinstance(child, Constant):
        if child.value == 0:
            raise ExpressionError("division by zero constant")
        return Constant(1 / child.value)
    return Reciprocal(child, True)


def make_scalar_multiple(child, coefficient):
    if isinstance(child, ScalarMultiple):
        return make_scalar_multiple(child.child, child.coefficient * coefficient)
    if isinstance(child, Constant):
        return Constant(child.value * coefficient)
    return ScalarMultiple(child, coefficient)


# ---------------------------------------------------------------------------
# FunExpr
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunExpr:
    """A holomorphic expression of ``dimension`` complex variables."""

    root: Node
    dimension: int

    def __post_init__(self):
        n = check_positive_int(self.dimension, "dimension")
        object.__setattr__(self, "dimension", n)
        for node in _walk(self.root):
            if isinstance(node, Variable) and node.index >= n:
                raise ExpressionError(
                    f"variable z{node.index + 1} out of range for dimension {n}"
                )
            if isinstance(node, AffineSubstitution) and len(node.center) != n:
                raise DimensionError(
                    f"substitution center has {len(node.center)} coordinates, expected {n}"
                )

    @property
    def has_param(self):
        return any(
            isinstance(n, Param)
            or (isinstance(n, IntegerPower) and isinstance(n.exponent, Param))
            for n in _walk(self.root)
        )

    def __str__(self):
        return to_text(self)

    def __call__(self, z):
        return evaluate(self, z)


@dataclass(frozen=True)
class Ball:
    """Closed ball in C^n with the Euclidean norm of C^n = R^{2n}."""

    center: tuple
    radius: float

    def __post_init__(self):
        center = tuple(complex(c) for c in np.atleast_1d(np.asarray(self.center, dtype=complex)))
        if not center:
            raise DimensionError("ball center needs at least one coordinate")
        radius = float(self.radius)
        if not (math.isfinite(radius) and radius > 0):
            raise ValueError(f"ball radius must be positive, got {radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)

    @property
    def dimension(self):
        return len(self.center)

    @classmethod
    def unit(cls, dimension):
        return cls((0j,) * dimension, 1.0)

    def contains(self, Z, tol=0.0):
        Z = check_points(Z, self.dimension)
        d = np.linalg.norm(Z - np.asarray(self.center), axis=1)
        return d <= self.radius + tol

    def contains_ball(self, other, tol=1e-12):
        gap = np.linalg.norm(np.asarray(other.center) - np.asarray(self.center))
        return gap + other.radius <= self.radius + tol


@dataclass(frozen=True)
class FamilySpec:
    """A rule ``j -> f_j`` given by a template in the parameter ``j``."""

    template: FunExpr
    domain: Ball
    zero_free: bool = False
    name: str = ""

    def __post_init__(self):
        if self.domain.dimension != self.template.dimension:
            raise DimensionError(
                f"domain has dimension {self.domain.dimension}, template {self.template.dimension}"
            )

    @property
    def dimension(self):
        return self.template.dimension


def make_family(text, dimension=1, zero_free=False, domain=None, name=""):
    """Parse ``text`` and wrap it as a family on ``domain`` (unit ball by default)."""
    template = parse_expression(text, dimension)
    if domain is None:
        domain = Ball.unit(dimension)
    return FamilySpec(template, domain, bool(zero_free), name)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


class _Parser:
    def __init__(self, text, dimension):
        self.text = text
        self.dimension = dimension
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        tokens = []
        i = 0
        while i < len(text):
            if text[i].isspace():
                i += 1
                continue
            m = _TOKEN_RE.match(text, i)
            if m is None or m.end() == i:
                raise ExpressionError(f"unexpected character {text[i]!r}", i)
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), start))
            i = m.end()
        tokens.append(("end", "", len(text)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        kind, text, at = self.take()
        if text != value:
            raise ExpressionError(f"expected {value!r}, found {text or 'end of input'!r}", at)

    def parse(self):
        node = self.expr()
        kind, text, at = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {text!r}", at)
        return node

    def expr(self):
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else make_negate(t))
        return terms[0] if len(terms) == 1 else make_sum(terms)

    def term(self):
        factors = [self.factor()]
        while self.peek()[1] in ("*", "/"):
            op, at = self.take()[1:]
            f = self.factor()
            if op == "/":
                if not _is_admissible_denominator(f):
                    raise ExpressionError(
                        "division by a non-constant subexpression without zero-free "
                        "declaration (use inv(...))", at)
                f = make_reciprocal(f)
            factors.append(f)
        return factors[0] if len(factors) == 1 else make_product(factors)

    def factor(self):
        # unary minus is accepted as an extension of the grammar
        if self.peek()[1] == "-":
            self.take()
            return make_negate(self.factor())
        node = self.base()
        if self.peek()[1] == "^":
            self.take()
            kind, text, at = self.take()
            if kind == "num" and text.isdigit():
                return make_power(node, int(text))
            if kind == "name" and text == "j":
                return make_power(node, Param())
            raise ExpressionError("exponent must be an unsigned integer or j", at)
        return node

    def base(self):
        kind, text, at = self.take()
        if kind == "num":
            return Constant(float(text))
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if text == "i":
                return Constant(1j)
            if text == "j":
                return Param()
            if text in ("exp", "inv"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Exp(arg) if text == "exp" else make_reciprocal(arg)
            m = re.fullmatch(r"z(\d+)", text)
            if m:
                k = int(m.group(1))
                if k < 1 or k > self.dimension:
                    raise ExpressionError(
                        f"variable index out of range: {text} with dimension {self.dimension}", at)
                return Variable(k - 1)
            raise ExpressionError(f"unknown identifier {text!r}", at)
        raise ExpressionError(f"unexpected {text or 'end of input'!r}", at)


def _is_admissible_denominator(node):
    if isinstance(node, Reciprocal):
        return True
    return not any(isinstance(n, Variable) for n in _walk(node))


def parse_expression(text, dimension):
    """Parse ``text`` into a :class:`FunExpr` of the given dimension.

    >>> parse_expression("z1^2", 1).root
    IntegerPower(child=Variable(index=0), exponent=2)
    """
    dimension = check_positive_int(dimension, "dimension")
    return FunExpr(_Parser(text, dimension).parse(), dimension)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _fmt_real(x):
    s = repr(float(x))
    return f"(-{s[1:]})" if s.startswith("-") else s


def _fmt_complex(c):
    if c.imag == 0:
        return _fmt_real(c.real)
    return f"({_fmt_real(c.real)} + {_fmt_real(c.imag)}*i)"


def _print(node, var):
    if isinstance(node, Variable):
        return var(node.index)
    if isinstance(node, Constant):
        return _fmt_complex(node.value)
    if isinstance(node, Param):
        return "j"
    if isinstance(node, Sum):
        parts = [_print(node.children[0], var)]
        for c in node.children[1:]:
            if isinstance(c, Negate):
                parts.append("- " + _print(c.child, var))
            else:
                parts.append("+ " + _print(c, var))
        return "(" + " ".join(parts) + ")"
    if isinstance(node, Product):
        return "(" + "*".join(_print(c, var) for c in node.children) + ")"
    if isinstance(node, Negate):
        return "(-" + _print(node.child, var) + ")"
    if isinstance(node, IntegerPower):
        e = "j" if isinstance(node.exponent, Param) else str(node.exponent)
        return "(" + _print(node.child, var) + ")^" + e
    if isinstance(node, Exp):
        return "exp(" + _print(node.child, var) + ")"
    if isinstance(node, Reciprocal):
        return "inv(" + _print(node.child, var) + ")"
    if isinstance(node, ScalarMultiple):
        return "(" + _fmt_real(node.coefficient) + "*" + _print(node.child, var) + ")"
    if isinstance(node, AffineSubstitution):
        center, scale = node.center, _fmt_real(node.scale)

        def inner_var(k, outer=var):
            return f"({_fmt_complex(center[k])} + {scale}*{outer(k)})"

        return _print(node.child, inner_var)
    raise TypeError(f"unknown node {node!r}")


def to_text(f):
    """Render ``f`` in the expression grammar; substitutions are inlined."""
    return _print(f.root, lambda k: f"z{k + 1}")


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------

def _subst(node, j):
    if isinstance(node, Param):
        return Constant(float(j))
    if isinstance(node, (Variable, Constant)):
        return node
    if isinstance(node, Sum):
        return make_sum(_subst(c, j) for c in node.children)
    if isinstance(node, Product):
        return make_product(_subst(c, j) for c in node.children)
    if isinstance(node, Negate):
        return make_negate(_subst(node.child, j))
    if isinstance(node, IntegerPower):
        e = j if isinstance(node.exponent, Param) else node.exponent
        return make_power(_subst(node.child, j), e)
    if isinstance(node, Exp):
        return Exp(_subst(node.child, j))
    if isinstance(node, Reciprocal):
        return make_reciprocal(_subst(node.child, j))
    if isinstance(node, AffineSubstitution):
        return AffineSubstitution(_subst(node.child, j), node.center, node.scale)
    if isinstance(node, ScalarMultiple):
        return make_scalar_multiple(_subst(node.child, j), node.coefficient)
    raise TypeError(f"unknown node {node!r}")


def instantiate(family, j):
    """Replace the parameter ``j`` by an integer, folding constants."""
    j = check_positive_int(j, "j")
    template = family.template if isinstance(family, FamilySpec) else family
    return FunExpr(_subst(template.root, j), template.dimension)


# ---------------------------------------------------------------------------
# Forward-mode evaluation
# ---------------------------------------------------------------------------

class _Forward:
    """One batched traversal carrying (value, gradient) pairs."""

    def __init__(self, m, n, with_grad):
        self.m = m
        self.n = n
        self.with_grad = with_grad
        self.bad = np.zeros(m, dtype=bool)

    def _flag(self, v, g):
        self.bad |= ~np.isfinite(v)
        if g is not None:
            self.bad |= ~np.all(np.isfinite(g), axis=1)

    def zero_grad(self):
        return np.zeros((self.m, self.n), dtype=complex) if self.with_grad else None

    def run(self, node, Z):
        wg = self.with_grad
        if isinstance(node, Variable):
            g = None
            if wg:
                g = self.zero_grad()
                g[:, node.index] = 1.0
            return Z[:, node.index].copy(), g
        if isinstance(node, Constant):
            return np.full(self.m, node.value, dtype=complex), self.zero_grad()
        if isinstance(node, Param):
            raise ExpressionError("cannot evaluate a template; instantiate j first")
        if isinstance(node, Sum):
            v, g = self.run(node.children[0], Z)
            for c in node.children[1:]:
                cv, cg = self.run(c, Z)
                v = v + cv
                if wg:
                    g = g + cg
            return v, g
        if isinstance(node, Product):
            v, g = self.run(node.children[0], Z)
            for c in node.children[1:]:
                cv, cg = self.run(c, Z)
                if wg:
                    g = g * cv[:, None] + cg * v[:, None]
                v = v * cv
            self._flag(v, g)
            return v, g
        if isinstance(node, Negate):
            v, g = self.run(node.child, Z)
            return -v, (-g if wg else None)
        if isinstance(node, IntegerPower):
            n = node.exponent
            if isinstance(n, Param):
                raise ExpressionError("cannot evaluate a template; instantiate j first")
            v, g = self.run(node.child, Z)
            if n == 0:
                return np.ones(self.m, dtype=complex), self.zero_grad()
            lower = _ipow_array(v, n - 1)
            out = lower * v
            dg = (n * lower)[:, None] * g if wg else None
            self._flag(out, dg)
            return out, dg
        if isinstance(node, Exp):
            v, g = self.run(node.child, Z)
            out = np.exp(v)
            dg = out[:, None] * g if wg else None
            self._flag(out, dg)
            return out, dg
        if isinstance(node, Reciprocal):
            v, g = self.run(node.child, Z)
            out = 1.0 / v
            dg = -(out * out)[:, None] * g if wg else None
            self._flag(out, dg)
            return out, dg
        if isinstance(node, AffineSubstitution):
            W = np.asarray(node.center) + node.scale * Z
            v, g = self.run(node.child, W)
            return v, (node.scale * g if wg else None)
        if isinstance(node, ScalarMultiple):
            v, g = self.run(node.child, Z)
            out = node.coefficient * v
            dg = node.coefficient * g if wg else None
            self._flag(out, dg)
            return out, dg
        raise TypeError(f"unknown node {node!r}")


def _ipow_array(v, n):
    result = np.ones_like(v)
    base = v
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _forward(f, Z, with_grad):
    Z = check_points(Z, f.dimension)
    fw = _Forward(Z.shape[0], f.dimension, with_grad)
    with np.errstate(all="ignore"):
        v, g = fw.run(f.root, Z)
        fw._flag(v, g)
    if fw.bad.any():
        k = int(np.argmax(fw.bad))
        raise NumericRangeError("evaluation left double range", point=Z[k])
    return v, g


def evaluate_many(f, Z):
    """Values of ``f`` at each row of ``Z`` (shape (m, n))."""
    return _forward(f, Z, False)[0]


def value_and_gradient(f, Z):
    """Values (m,) and holomorphic gradients (m, n) at each row of ``Z``."""
    return _forward(f, Z, True)


def evaluate(f, z):
    """Value of ``f`` at a single point."""
    z = check_point(z, f.dimension)
    return complex(evaluate_many(f, z[None, :])[0])


def gradient(f, z):
    """Holomorphic gradient (df/dz_1, ..., df/dz_n) at a single point."""
    z = check_point(z, f.dimension)
    return value_and_gradient(f, z[None, :])[1][0]


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def affine_reparam(f, a, r):
    """Return ``h`` with ``h(z) = f(a + r z)``.

    A substitution applied to a substitution is merged into one node.
    """
    a = check_point(a, f.dimension)
    r = float(r)
    if not (math.isfinite(r) and r > 0):
        raise ValueError(f"scale must be positive, got {r}")
    root = f.root
    if isinstance(root, AffineSubstitution):
        c = np.asarray(root.center)
        return FunExpr(AffineSubstitution(root.child, c + root.scale * a, root.scale * r), f.dimension)
    return FunExpr(AffineSubstitution(root, a, r), f.dimension)


def scale_by_power(f, r, alpha):
    """Return ``r**alpha * f``; ``alpha == 0`` returns ``f`` itself."""
    r = float(r)
    if not (math.isfinite(r) and r > 0):
        raise ValueError(f"r must be positive, got {r}")
    alpha = float(alpha)
    if alpha == 0:
        return f
    try:
        coef = r ** alpha
    except OverflowError:
        raise NumericRangeError(f"r**alpha overflows for r={r}, alpha={alpha}") from None
    if not math.isfinite(coef) or coef == 0:
        raise NumericRangeError(f"r**alpha out of double range for r={r}, alpha={alpha}")
    return FunExpr(make_scalar_multiple(f.root, coef), f.dimension)


def reciprocal(f, zero_free):
    """Return ``1/f``. Refused unless the caller declares ``f`` zero-free."""
    if not zero_free:
        raise ZeroFreeError("reciprocal requires a zero-free declaration")
    return FunExpr(make_reciprocal(f.root), f.dimension)


def check_zero_free(family, j, ball=None, num_points=10_000, threshold=1e-12, seed=0):
    """Spot-check that ``f_j`` does not vanish on ``ball`` (default: domain).

    Returns the sampled minimum of ``|f_j|``; raises :class:`ZeroFreeError`
    when it falls below ``threshold``.
    """
    from .sampling import ball_sample

    if not family.zero_free:
        raise ZeroFreeError(f"family {family.name or ''} is not declared zero-free".strip())
    ball = family.domain if ball is None else ball
    f = instantiate(family, j)
    Z = ball_sample(ball.center, ball.radius, num_points, seed)
    low = float(np.min(np.abs(evaluate_many(f, Z))))
    if low < threshold:
        raise ZeroFreeError(f"f_{j} has |f| = {low:.3g} < {threshold:g} on the sampled ball")
    return low
