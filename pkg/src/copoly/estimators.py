"""scikit-learn compatible wrappers around the theory, simulator and analysis.

``CopolymerTheory`` is "fit" on a rate set and exposes the closed forms as
fitted attributes; ``CopolymerSimulator`` draws trajectories; and
``TrajectoryEstimator`` fits empirical counterparts of the same quantities
from trajectories and transforms trajectories into per-run feature rows.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import analysis, theory
from .exceptions import EmptyTrajectory, InsufficientData, RegimeError
from .parallel import map_ordered
from .simulator import SimConfig, simulate
from .validation import check_rates, check_sample_times, check_trajectories


class CopolymerTheory(BaseEstimator):
    """Closed-form long-run behaviour of the copolymerization chain.

    Parameters
    ----------
    k_plus, k_minus : array-like of shape (d,)
        Attachment and detachment rates.
    tol : float, default=1e-12
        Absolute tolerance on ``g(m) - 1`` for the root solve.

    Attributes
    ----------
    rates_ : RateSet
    summary_ : TheorySummary
    alpha_, regime_ : float, RegimeClass
    m_, F_, sigma_bar_, v_, v_bar_, V_, level_fractions_ :
        Transient-regime quantities; ``None`` otherwise.
    mean_holding_ : ndarray of shape (d,)
    root_mass_ : float or None
        Stationary probability of the root (positive-recurrent only).
    """

    def __init__(self, k_plus=(1.0,), k_minus=(1.0,), tol=theory.DEFAULT_TOL):
        self.k_plus = k_plus
        self.k_minus = k_minus
        self.tol = tol

    def fit(self, X=None, y=None):
        self.rates_ = check_rates(self.k_plus, self.k_minus)
        s = theory.summarize(self.rates_, self.tol)
        self.summary_ = s
        self.alpha_ = s.alpha
        self.regime_ = s.regime
        self.m_ = s.m
        self.F_ = s.F
        self.sigma_bar_ = s.sigma_bar
        self.v_ = s.v
        self.v_bar_ = s.v_bar
        self.V_ = s.V
        self.level_fractions_ = s.level_fractions
        self.mean_holding_ = s.mean_holding
        self.root_mass_ = s.root_mass
        self.n_features_in_ = self.rates_.d
        return self

    def predict(self, X):
        """Asymptotic polymer length ``v * t`` at the times in ``X``."""
        check_is_fitted(self, "summary_")
        if not self.summary_.transient:
            raise RegimeError("length prediction needs transient rates")
        t = check_sample_times(np.ravel(X))
        return self.v_ * t

    def stationary_weight(self, counts):
        check_is_fitted(self, "summary_")
        return theory.stationary_weight(self.rates_, counts)


class CopolymerSimulator(BaseEstimator):
    """Draw independent trajectories with seeds ``seed, seed + 1, ...``.

    ``n_jobs=None`` defers to the ``COPOLY_THREADS`` environment variable.
    """

    def __init__(self, k_plus=(1.0,), k_minus=(1.0,), t_max=None, max_jumps=None,
                 seed=0, record_stride=1024, n_jobs=None):
        self.k_plus = k_plus
        self.k_minus = k_minus
        self.t_max = t_max
        self.max_jumps = max_jumps
        self.seed = seed
        self.record_stride = record_stride
        self.n_jobs = n_jobs

    def _config(self) -> SimConfig:
        return SimConfig(check_rates(self.k_plus, self.k_minus), int(self.seed), self.t_max,
                         self.max_jumps, int(self.record_stride))

    def sample(self, n_replicas: int = 1) -> list:
        cfg = self._config()
        return map_ordered(lambda i: simulate(cfg.replica(i)), range(int(n_replicas)), self.n_jobs)


class TrajectoryEstimator(TransformerMixin, BaseEstimator):
    """Empirical estimates of the long-run quantities from simulated runs.

    ``fit`` pools or averages over replicas; ``transform`` returns one row per
    trajectory with columns given by :meth:`get_feature_names_out`.

    Parameters
    ----------
    burn_in_fraction : float, default=0.2
        Leading fraction of each run discarded by the velocity estimate.
    tail_guard : int or None
        Boundary tail guard in jumps; ``None`` uses the analysis default.
    """

    def __init__(self, burn_in_fraction=0.2, tail_guard=None):
        self.burn_in_fraction = burn_in_fraction
        self.tail_guard = tail_guard

    def fit(self, X, y=None):
        trajs = check_trajectories(X)
        d = trajs[0].d
        feats = self._features(trajs)
        self.n_monomers_ = d
        self.n_features_in_ = d
        self.sigma_ = feats[:, :d].mean(axis=0)
        self.velocity_ = float(feats[:, d].mean())
        self.level_fractions_ = feats[:, d + 1:2 * d + 1].mean(axis=0)
        self.root_visit_fraction_ = float(feats[:, 2 * d + 1].mean())
        self.root_occupation_ = float(feats[:, 2 * d + 2].mean())
        pooled = np.zeros((d, d), dtype=np.int64)
        for tr in trajs:
            try:
                pooled += analysis.cone_chain_empirical(
                    analysis.extract_boundary(tr, self.tail_guard), d).counts
            except (EmptyTrajectory, InsufficientData):
                continue
        dep = pooled.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            self.cone_matrix_ = np.where(dep > 0, pooled / np.where(dep > 0, dep, 1), np.nan)
        self.cone_counts_ = pooled
        return self

    def _features(self, trajs) -> np.ndarray:
        rows = []
        for tr in trajs:
            sigma = analysis.empirical_composition(tr, [tr.t_end])[0]
            vel = analysis.empirical_velocity(tr, self.burn_in_fraction) if tr.t_end > 0 else np.nan
            if tr.n_jumps:
                lev, root_visits = analysis.level_fraction_empirical(tr)
            else:
                lev, root_visits = np.full(tr.d, np.nan), np.nan
            rows.append(np.concatenate((sigma, [vel], lev, [root_visits, analysis.root_occupation(tr)])))
        return np.vstack(rows)

    def transform(self, X):
        check_is_fitted(self, "sigma_")
        return self._features(check_trajectories(X, self.n_monomers_))

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "sigma_")
        d = self.n_monomers_
        return np.array([f"sigma_{i + 1}" for i in range(d)] + ["velocity"]
                        + [f"level_fraction_{i + 1}" for i in range(d)]
                        + ["root_visit_fraction", "root_occupation"], dtype=object)
