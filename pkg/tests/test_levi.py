import numpy as np
import pytest

from zalcmanlab.holofun import evaluate_many, instantiate, make_family, parse_expression
from zalcmanlab.levi import (
    direction_samples,
    levi_form,
    maximizing_direction,
    sharp,
    sharp_values,
    sharp_via_direction_sup,
)

from conftest import catalogue_functions, random_ball_points, random_expressions


def _levi_fd(f, z, v, h=1e-3):
    """Levi form as a quarter of the Laplacian of lambda -> log(1+|f(z+lambda v)|^2).

    Independent of the gradient code: only function values are used.
    """
    offsets = np.array([0, h, -h, 1j * h, -1j * h])
    pts = z[None, :] + offsets[:, None] * v[None, :]
    u = np.log1p(np.abs(evaluate_many(f, pts)) ** 2)
    return (u[1] + u[2] + u[3] + u[4] - 4 * u[0]) / (4 * h * h)


def test_levi_constant_is_zero():
    f = parse_expression("3 + 2*i", 2)
    assert levi_form(f, [0.1, 0.2], [1, 1j]) == 0.0


def test_levi_identity_unit_direction():
    assert levi_form(parse_expression("z1", 1), [0], [1]) == 1.0


def test_levi_orthogonal_direction():
    assert levi_form(parse_expression("z1", 2), [0, 0], [0, 1]) == 0.0


def test_levi_matches_laplacian_oracle(rng):
    checked = 0
    for f in random_expressions(rng, 60, max_dim=3):
        z = random_ball_points(rng, f.dimension, 1, 0.5)[0]
        v = rng.standard_normal(f.dimension) + 1j * rng.standard_normal(f.dimension)
        v /= np.linalg.norm(v)
        exact = levi_form(f, z, v)
        fd = _levi_fd(f, z, v)
        assert abs(exact - fd) <= 1e-4 * max(1.0, abs(exact))
        checked += 1
    assert checked == 60


def test_sharp_examples():
    assert sharp(parse_expression("5*z1", 1), [0]).value == 5.0
    assert sharp(parse_expression("exp(z1)", 1), [0]).value == pytest.approx(0.5, abs=1e-15)
    f = instantiate(make_family("j*z1"), 7)
    assert sharp(f, [1.0]).value == pytest.approx(7 / 50, rel=1e-14)
    # same modulus, different argument
    assert sharp(f, [np.exp(0.7j)]).value == pytest.approx(7 / 50, rel=1e-14)


def test_sharp_parts_reported():
    sv = sharp(parse_expression("z1*z2", 2), [2, 3j])
    assert sv.gradient_norm == pytest.approx(np.sqrt(13))
    assert sv.abs_f == pytest.approx(6)
    assert sv.value == pytest.approx(np.sqrt(13) / 37)


def test_sharp_large_modulus_no_overflow():
    # |f| ~ e^400 would overflow |f|^2 if squared directly
    f = parse_expression("exp(400*z1)", 1)
    s = sharp(f, [1.0]).value
    assert np.isfinite(s)
    assert s == pytest.approx(400 * np.exp(-400.0), rel=1e-10)


def test_cauchy_schwarz_identity(rng):
    for name, j, f in catalogue_functions(rng, 200):
        Z = random_ball_points(rng, f.dimension, 5, 1.0)
        for z in Z:
            sv = sharp(f, z)
            assert (1 + sv.abs_f ** 2) * sv.value == pytest.approx(sv.gradient_norm, rel=1e-12)


def test_maximizing_direction_attains_sharp(rng):
    for f in random_expressions(rng, 40):
        z = random_ball_points(rng, f.dimension, 1, 0.5)[0]
        v = maximizing_direction(f, z)
        s = sharp(f, z).value
        if v is None:
            assert s == 0.0
            continue
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert np.sqrt(levi_form(f, z, v)) == pytest.approx(s, rel=1e-12, abs=1e-300)


def test_direction_samples_bounded_by_sharp(rng):
    for f in random_expressions(rng, 40):
        z = random_ball_points(rng, f.dimension, 1, 0.5)[0]
        s = sharp(f, z).value
        assert np.all(direction_samples(f, z, 200, seed=1) <= s + 1e-12)


def test_direction_sup_examples():
    assert sharp_via_direction_sup(parse_expression("2", 1), [0.3], 50, 0) == 0.0
    assert sharp_via_direction_sup(parse_expression("z1", 2), [0, 0], 50, 0) == pytest.approx(1.0)
    f = parse_expression("z1 + 2*z2", 2)
    assert sharp_via_direction_sup(f, [0, 0], 500, 0) == pytest.approx(np.sqrt(5))
    assert np.all(direction_samples(f, [0, 0], 500, 0) <= np.sqrt(5) + 1e-12)


def test_sharp_values_vectorized_matches_pointwise(rng):
    f = parse_expression("exp(z1*z2) + z2^3", 2)
    Z = random_ball_points(rng, 2, 50)
    vec = sharp_values(f, Z)
    point = np.array([sharp(f, z).value for z in Z])
    np.testing.assert_allclose(vec, point, rtol=0, atol=0)


def test_levi_form_dimension_check():
    with pytest.raises(Exception):
        levi_form(parse_expression("z1", 2), [0], [1])
