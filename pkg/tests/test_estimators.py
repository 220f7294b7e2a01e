import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from zalcmanlab.catalogue import get_family
from zalcmanlab.estimators import MartyProbe, SharpDerivative, ZalcmanRescaler
from zalcmanlab.holofun import parse_expression


def test_sharp_derivative_transform():
    est = SharpDerivative("5*z1", 1).fit()
    out = est.transform([[0], [1]])
    np.testing.assert_allclose(out, [5.0, 5 / 26])
    assert est.n_features_in_ == 1


def test_sharp_derivative_accepts_funexpr():
    f = parse_expression("z1 + 2*z2", 2)
    assert SharpDerivative(f).fit_transform([[0, 0]])[0] == pytest.approx(np.sqrt(5))


def test_sharp_derivative_rejects_template():
    with pytest.raises(ValueError):
        SharpDerivative("j*z1").fit()


def test_sharp_derivative_checks_shape():
    est = SharpDerivative("z1*z2", 2).fit()
    with pytest.raises(Exception):
        est.transform([[0, 0, 0]])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        SharpDerivative().transform([[0]])
    with pytest.raises(NotFittedError):
        ZalcmanRescaler().transform([[0]])


def test_params_and_clone():
    est = ZalcmanRescaler(alpha=0.5, j_schedule=(10, 20), grid_per_dim=12)
    params = est.get_params()
    assert params["alpha"] == 0.5 and params["grid_per_dim"] == 12
    c = clone(est)
    assert c.get_params() == params
    c.set_params(alpha=0.0)
    assert c.alpha == 0.0 and est.alpha == 0.5


def test_marty_probe_estimator():
    est = MartyProbe(j_schedule=(5, 10, 20, 40)).fit(get_family("linear"))
    assert est.verdict_ == "DIVERGING"
    np.testing.assert_allclose(est.sup_estimates_, [5, 10, 20, 40], rtol=1e-12)


def test_marty_probe_rejects_non_family():
    with pytest.raises(TypeError):
        MartyProbe().fit(np.zeros((3, 1)))


def test_rescaler_linear():
    est = ZalcmanRescaler(j_schedule=(10, 100)).fit(get_family("linear"))
    assert [s.j for s in est.steps_] == [10, 100]
    assert est.skipped_ == ()
    X = np.array([[0.1], [0.5j], [-0.3 + 0.2j]])
    np.testing.assert_allclose(est.transform(X), np.repeat(X, 2, axis=1), atol=1e-9)
    assert est.convergence_.cauchy_verdict == "CONVERGING"


def test_rescaler_affine_normal_skips_all():
    est = ZalcmanRescaler(j_schedule=(10, 20)).fit(get_family("affine_normal"))
    assert est.steps_ == ()
    assert est.skipped_ == (10, 20)
    assert est.convergence_ is None
    assert est.transform([[0.0]]).shape == (1, 0)
