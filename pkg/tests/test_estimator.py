import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pmcut import PottsSuperpixels
from pmcut.errors import InvalidArgumentError


def two_tone():
    y = np.full((20, 20), 0.1)
    y[:, 10:] = 0.9
    return y


def test_params_and_clone():
    est = PottsSuperpixels(n_superpixels=4, sigma=0.7, node_limit=10)
    params = est.get_params()
    assert params["n_superpixels"] == 4 and params["sigma"] == 0.7
    twin = clone(est)
    assert twin.get_params() == params and twin is not est


def test_fit_exposes_results():
    est = PottsSuperpixels(n_superpixels=1, node_limit=20).fit(two_tone())
    assert est.labels_.max() == 1
    np.testing.assert_allclose(est.denoised_, two_tone())
    assert est.lambda_ > 0 and est.n_features_in_ == 20
    np.testing.assert_array_equal(est.predict(two_tone()), est.labels_)
    np.testing.assert_array_equal(est.transform(two_tone()), est.denoised_)


def test_fit_shortcuts_match():
    est = PottsSuperpixels(n_superpixels=4, node_limit=10)
    labels = est.fit_predict(two_tone())
    np.testing.assert_array_equal(labels, est.labels_)
    np.testing.assert_array_equal(est.fit_transform(two_tone()), est.denoised_)


def test_new_image_uses_same_settings():
    est = PottsSuperpixels(n_superpixels=1, node_limit=20).fit(two_tone())
    flipped = two_tone()[:, ::-1].copy()
    np.testing.assert_allclose(est.transform(flipped), flipped)


def test_fixed_lambda():
    est = PottsSuperpixels(n_superpixels=1, lam=100.0, node_limit=20).fit(two_tone())
    assert est.lambda_ == 100.0 and est.labels_.max() == 0


def test_not_fitted_and_invalid_input():
    with pytest.raises(NotFittedError):
        PottsSuperpixels().predict(two_tone())
    with pytest.raises(InvalidArgumentError):
        PottsSuperpixels(n_superpixels=1).fit(np.zeros((3, 3, 3)))
