import numpy as np
import pytest

from zalcmanlab.catalogue import CATALOGUE
from zalcmanlab.holofun import instantiate, parse_expression

_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Collects one (criterion, passed, detail) line per acceptance check."""

    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def random_ball_points(rng, n, m, radius=1.0):
    """m points uniform in the ball of C^n (rejection-free via radial law)."""
    G = rng.standard_normal((m, 2 * n))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    R = radius * rng.uniform(size=(m, 1)) ** (1.0 / (2 * n))
    X = G * R
    return X[:, :n] + 1j * X[:, n:]


def catalogue_functions(rng, count, max_j=200):
    """``count`` random (name, f_j) pairs from the built-in families."""
    names = sorted(CATALOGUE)
    out = []
    for _ in range(count):
        name = names[rng.integers(len(names))]
        j = int(rng.integers(2, max_j + 1))
        out.append((name, j, instantiate(CATALOGUE[name].family(), j)))
    return out


def random_expression_text(rng, n, depth=3):
    """Random text in the expression grammar with moderate magnitudes."""
    if depth == 0 or rng.uniform() < 0.25:
        r = rng.uniform()
        if r < 0.6:
            return f"z{rng.integers(1, n + 1)}"
        if r < 0.8:
            return f"{rng.uniform(0.1, 2.0):.3f}"
        return "i"
    kind = rng.integers(7)
    a = random_expression_text(rng, n, depth - 1)
    if kind == 0:
        return f"({a} + {random_expression_text(rng, n, depth - 1)})"
    if kind == 1:
        return f"({a} - {random_expression_text(rng, n, depth - 1)})"
    if kind == 2:
        return f"({a} * {random_expression_text(rng, n, depth - 1)})"
    if kind == 3:
        return f"({a})^{rng.integers(0, 4)}"
    if kind == 4:
        return f"exp(0.5*{a})"
    if kind == 5:
        # zero-free by construction
        return f"inv(exp({a}))"
    return f"({a})/{rng.integers(1, 5)}"


def random_expressions(rng, count, max_dim=3):
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_dim + 1))
        out.append(parse_expression(random_expression_text(rng, n), n))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
