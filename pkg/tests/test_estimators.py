import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from copoly import CopolymerSimulator, CopolymerTheory, TrajectoryEstimator
from copoly.exceptions import RateError, RegimeError
from copoly.model import RegimeClass

REF = dict(k_plus=(1.0, 1.2), k_minus=(1.8, 2.592))


def test_theory_params_roundtrip():
    est = CopolymerTheory(**REF, tol=1e-11)
    assert est.get_params() == {"k_plus": (1.0, 1.2), "k_minus": (1.8, 2.592), "tol": 1e-11}
    twin = clone(est).set_params(tol=1e-12)
    assert twin.tol == 1e-12 and twin.k_plus == est.k_plus


def test_theory_fit_predict():
    est = CopolymerTheory(**REF).fit()
    assert est.regime_ is RegimeClass.TRANSIENT
    assert est.sigma_bar_ == pytest.approx([0.5436, 0.4564], abs=5e-4)
    assert est.predict([0.0, 1000.0]) == pytest.approx([0.0, 1000 * est.m_])
    assert est.n_features_in_ == 2


def test_theory_recurrent():
    est = CopolymerTheory(k_plus=(0.3, 0.2), k_minus=(1, 1)).fit()
    assert est.root_mass_ == pytest.approx(0.5)
    assert est.stationary_weight((1, 0)) == pytest.approx(0.15)
    with pytest.raises(RegimeError):
        est.predict([1.0])


def test_theory_not_fitted_and_bad_rates():
    with pytest.raises(NotFittedError):
        CopolymerTheory(**REF).predict([1.0])
    with pytest.raises(RateError):
        CopolymerTheory(k_plus=(1, -1), k_minus=(1, 1)).fit()


def test_simulator_sample_and_transform():
    sim = CopolymerSimulator(**REF, t_max=3000.0, seed=5, n_jobs=2)
    trajs = sim.sample(3)
    assert [t.seed for t in trajs] == [5, 6, 7]
    serial = CopolymerSimulator(**REF, t_max=3000.0, seed=5, n_jobs=1).sample(3)
    assert all(np.array_equal(a.codes, b.codes) for a, b in zip(trajs, serial))

    est = TrajectoryEstimator(burn_in_fraction=0.1).fit(trajs)
    X = est.transform(trajs)
    names = est.get_feature_names_out()
    assert X.shape == (3, len(names)) == (3, 7)
    assert names[0] == "sigma_1" and names[2] == "velocity"
    assert est.sigma_ == pytest.approx(X[:, :2].mean(axis=0))
    assert np.all(est.cone_counts_ >= 0)
    assert est.fit_transform(trajs).shape == (3, 7)


def test_estimator_rejects_mixed_dimension():
    a = CopolymerSimulator(**REF, max_jumps=50).sample(1)
    b = CopolymerSimulator(k_plus=(2.0,), k_minus=(1.0,), max_jumps=50).sample(1)
    est = TrajectoryEstimator().fit(a)
    with pytest.raises(ValueError):
        est.transform(b)
