"""Estimator-protocol behavior of GanColorizer."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from chromacycle.dataio import generate_synthetic_dataset
from chromacycle.estimator import GanColorizer


@pytest.fixture(scope="module")
def manifest_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("est-data")
    generate_synthetic_dataset(root, n=4, size=32, seed=2)
    return root


@pytest.fixture(scope="module")
def fitted(manifest_dir):
    est = GanColorizer(regime="cond_cyclegan", iterations=3, batch_size=2,
                       image_size=32, seed=0)
    return est.fit(manifest_dir / "manifest.json")


def test_params_round_trip():
    est = GanColorizer(regime="wgan", iterations=7, clip_value=0.02)
    params = est.get_params()
    assert params["regime"] == "wgan"
    assert params["iterations"] == 7
    rebuilt = GanColorizer(**params)
    assert rebuilt.get_params() == params


def test_set_params_returns_self():
    est = GanColorizer()
    assert est.set_params(iterations=9) is est
    assert est.iterations == 9


def test_clone_preserves_params():
    est = GanColorizer(regime="gan", iterations=11, seed=5)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert twin is not est


def test_predict_before_fit_raises():
    with pytest.raises(NotFittedError):
        GanColorizer().predict(np.zeros((8, 8)))


def test_fit_from_manifest_path_and_predict(fitted):
    out = fitted.predict(np.random.default_rng(0).random((2, 24, 24)))
    assert out.shape == (2, 24, 24, 3)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_predict_single_image_shape(fitted):
    out = fitted.predict(np.full((16, 16), 0.5))
    assert out.shape == (16, 16, 3)


def test_transform_matches_predict(fitted):
    x = np.random.default_rng(3).random((1, 16, 16))
    np.testing.assert_array_equal(fitted.transform(x), fitted.predict(x))


def test_fit_accepts_array_input():
    rng = np.random.default_rng(1)
    imgs = rng.random((3, 32, 32, 3))
    est = GanColorizer(regime="gan", iterations=2, batch_size=2, image_size=32)
    est.fit(imgs)
    assert est.checkpoint_.iteration == 2
    assert est.loss_log_.rows


def test_fit_rejects_bad_array_shape():
    with pytest.raises(ValueError, match="n, h, w, 3"):
        GanColorizer(iterations=1).fit(np.zeros((4, 8, 8)))


def test_unknown_regime_rejected_at_fit(manifest_dir):
    with pytest.raises(ValueError, match="regime"):
        GanColorizer(regime="vae").fit(manifest_dir / "manifest.json")


def test_hyphenated_regime_accepted(manifest_dir):
    est = GanColorizer(regime="cond-cyclegan", iterations=1, batch_size=2,
                       image_size=32)
    est.fit(manifest_dir)  # directory containing manifest.json
    assert est.checkpoint_.config.regime == "cond_cyclegan"


def test_save_and_from_checkpoint_round_trip(fitted, tmp_path):
    path = tmp_path / "est.ckpt"
    fitted.save(path)
    loaded = GanColorizer.from_checkpoint(path)
    x = np.random.default_rng(7).random((12, 12))
    np.testing.assert_allclose(loaded.predict(x), fitted.predict(x), atol=1e-12)


def test_baseline_noise_seed_changes_prediction(manifest_dir):
    est = GanColorizer(regime="gan", iterations=2, batch_size=2, image_size=32,
                       noise_seed=0)
    est.fit(manifest_dir)
    x = np.random.default_rng(11).random((16, 16))
    a = est.predict(x)
    est.set_params(noise_seed=1)
    b = est.predict(x)
    assert not np.allclose(a, b)
