"""Closed-form long-run quantities of the copolymerization chain.

All functions are pure. Transient-only quantities raise
:class:`~copoly.exceptions.RegimeError` when called on recurrent rates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DimensionError, DivisionDegenerate, NoConvergence, RegimeError
from .model import RateSet, RegimeClass

DEFAULT_TOL = 1e-12
NULL_RECURRENCE_RTOL = 1e-12

# internal consistency thresholds checked by summarize()
_IDENTITY_TOL = 1e-10
_BISECTION_MAX_ITER = 400
_NEWTON_STEPS = 5


def alpha(r: RateSet) -> float:
    """Sum of ``k_plus[i] / k_minus[i]`` accumulated in index order."""
    total = 0.0
    for kp, km in zip(r.k_plus, r.k_minus):
        total += float(kp) / float(km)
    return total


def classify(r: RateSet) -> RegimeClass:
    a = alpha(r)
    if abs(a - 1.0) <= NULL_RECURRENCE_RTOL * max(1.0, a):
        return RegimeClass.NULL_RECURRENT
    return RegimeClass.POSITIVE_RECURRENT if a < 1.0 else RegimeClass.TRANSIENT


def _require_transient(r: RateSet) -> None:
    regime = classify(r)
    if regime is not RegimeClass.TRANSIENT:
        raise RegimeError(f"rates are {regime.value} (alpha = {alpha(r)!r}); transient required")


def growth_function(r: RateSet, m: float) -> float:
    """``g(m) = sum_r k_plus[r] / (m + k_minus[r])``, strictly decreasing in m."""
    total = 0.0
    for kp, km in zip(r.k_plus, r.k_minus):
        total += float(kp) / (m + float(km))
    return total


def _growth_derivative(r: RateSet, m: float) -> float:
    total = 0.0
    for kp, km in zip(r.k_plus, r.k_minus):
        total -= float(kp) / (m + float(km)) ** 2
    return total


def solve_m(r: RateSet, tol: float = DEFAULT_TOL) -> float:
    """Unique positive root of ``g(m) = 1`` in the transient regime.

    ``g(0) = alpha > 1`` and ``g(K+) < 1``, so ``[0, K+]`` brackets the root.
    Bisection shrinks the bracket to ``1e-13 * K+`` and a few Newton steps,
    kept inside the bracket, polish the result.

    Raises
    ------
    RegimeError
        The rates are not transient.
    NoConvergence
        The residual ``|g(m) - 1|`` still exceeds ``tol`` after polishing.
    """
    _require_transient(r)
    lo, hi = 0.0, r.k_plus_total
    width = 1e-13 * hi
    for _ in range(_BISECTION_MAX_ITER):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        if growth_function(r, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    else:
        raise NoConvergence("bisection iteration cap reached")

    m = 0.5 * (lo + hi)
    for _ in range(_NEWTON_STEPS):
        resid = growth_function(r, m) - 1.0
        if abs(resid) <= 0.25 * tol:
            break
        step = resid / _growth_derivative(r, m)
        candidate = m - step
        if not (lo <= candidate <= hi):
            break
        m = candidate

    if not abs(growth_function(r, m) - 1.0) <= tol:
        raise NoConvergence(f"|g(m) - 1| = {abs(growth_function(r, m) - 1.0):.3e} > tol = {tol:.1e}")
    return m


def escape_probabilities(r: RateSet, m: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return probabilities ``F[i] = k_minus[i] / (m + k_minus[i])``.

    ``F[i]`` is the probability that a chain sitting at a polymer with tip
    ``Mi`` ever steps back to its predecessor. The result is checked against
    the defining fixed-point system, which must hold to ``10 * tol``.
    """
    _require_transient(r)
    km = r.k_minus
    F = km / (m + km)
    K = r.k_plus_total
    back = float(np.dot(r.k_plus, F))
    resid = np.abs(km / ((km + K) - back) - F)
    if resid.max() > 10 * tol:
        raise NoConvergence(f"escape-probability fixed-point residual {resid.max():.3e}")
    return F


def sigma_bar(r: RateSet, m: float) -> np.ndarray:
    """Limiting monomer fractions ``k_plus[i] / (m + k_minus[i])``."""
    _require_transient(r)
    return r.k_plus / (m + r.k_minus)


def velocity(r: RateSet, sigma: Sequence[float]) -> float:
    """Asymptotic growth velocity ``K+ - sum_r k_minus[r] * sigma[r]``."""
    _require_transient(r)
    return r.k_plus_total - float(np.dot(r.k_minus, np.asarray(sigma, dtype=float)))


def discrete_velocity(r: RateSet, sigma: Sequence[float], F: Sequence[float]) -> float:
    """Almost-sure drift ``lim |Z_n| / n`` of the embedded jump chain."""
    _require_transient(r)
    sigma = np.asarray(sigma, dtype=float)
    F = np.asarray(F, dtype=float)
    if np.any(F >= 1.0):
        raise DivisionDegenerate("an escape probability equals one; the root solve failed")
    back_prob = r.k_minus / (r.k_minus + r.k_plus_total)
    return 1.0 / float(np.sum(sigma * F / (back_prob * (1.0 - F))))


def cone_chain_matrix(r: RateSet, F: Sequence[float]) -> np.ndarray:
    """Transition matrix of the tip-type chain along the boundary process.

    ``V[i, j] = F[i] * (1 - F[j]) / (1 - F[i]) * k_plus[j] / k_minus[i]``.
    """
    _require_transient(r)
    F = np.asarray(F, dtype=float)
    return (F / (1.0 - F) / r.k_minus)[:, None] * ((1.0 - F) * r.k_plus)[None, :]


def visit_ratios(r: RateSet, sigma: Sequence[float]) -> np.ndarray:
    """Matrix ``R[i, j]``: expected visits to tip ``Mj`` states over tip ``Mi`` states."""
    w = np.asarray(sigma, dtype=float) * (r.k_minus + r.k_plus_total)
    return w[None, :] / w[:, None]


def level_time_fractions(r: RateSet, sigma: Sequence[float]) -> np.ndarray:
    """Long-run fraction of jump-chain visits to states with tip ``Mi``."""
    _require_transient(r)
    w = np.asarray(sigma, dtype=float) * (r.k_minus + r.k_plus_total)
    return w / w.sum()


def mean_holding_times(r: RateSet) -> np.ndarray:
    """Mean sojourn ``1 / (k_minus[i] + K+)`` in a state with tip ``Mi``."""
    return 1.0 / (r.k_minus + r.k_plus_total)


def two_monomer_closed_form(r: RateSet) -> tuple:
    """Radical closed form of the limiting fractions for two monomer types."""
    if r.d != 2:
        raise DimensionError(f"closed form needs d = 2, got d = {r.d}")
    _require_transient(r)
    k1p, k2p = (float(x) for x in r.k_plus)
    k1m, k2m = (float(x) for x in r.k_minus)
    if k1m == k2m:
        s = k1p + k2p
        return k1p / s, k2p / s
    b1 = k1p + k2p + k1m - k2m
    b2 = k1p + k2p + k2m - k1m
    s1 = (b1 - math.sqrt(b1 * b1 + 4 * k1p * k2m - 4 * k1p * k1m)) / (2 * (k1m - k2m))
    s2 = (b2 - math.sqrt(b2 * b2 + 4 * k2p * k1m - 4 * k2p * k2m)) / (2 * (k2m - k1m))
    return s1, s2


def stationary_weight(r: RateSet, counts: Sequence[int]) -> float:
    """Stationary probability of one specific polymer with the given type counts.

    Only defined for positive-recurrent rates, where the root carries mass
    ``1 - alpha``.
    """
    regime = classify(r)
    if regime is not RegimeClass.POSITIVE_RECURRENT:
        raise RegimeError(f"stationary distribution needs alpha < 1 (regime {regime.value})")
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (r.d,) or np.any(counts < 0):
        raise DimensionError("counts must be d non-negative integers")
    log_w = math.log1p(-alpha(r))
    for c, kp, km in zip(counts, r.k_plus, r.k_minus):
        log_w += int(c) * math.log(float(kp) / float(km))
    return math.exp(log_w)


def length_distribution(r: RateSet, max_length: int) -> np.ndarray:
    """Stationary probabilities ``(1 - alpha) * alpha**l`` of polymer length ``l``."""
    regime = classify(r)
    if regime is not RegimeClass.POSITIVE_RECURRENT:
        raise RegimeError(f"stationary distribution needs alpha < 1 (regime {regime.value})")
    a = alpha(r)
    return (1.0 - a) * a ** np.arange(max_length + 1)


@dataclass
class TheorySummary:
    rates: RateSet
    alpha: float
    regime: RegimeClass
    mean_holding: np.ndarray
    m: Optional[float] = None
    F: Optional[np.ndarray] = None
    sigma_bar: Optional[np.ndarray] = None
    v: Optional[float] = None
    v_bar: Optional[float] = None
    V: Optional[np.ndarray] = None
    level_fractions: Optional[np.ndarray] = None
    root_mass: Optional[float] = None
    checks: dict = field(default_factory=dict)

    @property
    def transient(self) -> bool:
        return self.regime is RegimeClass.TRANSIENT

    def to_dict(self) -> dict:
        def arr(x):
            return None if x is None else np.asarray(x).tolist()

        return {
            "alpha": self.alpha,
            "regime": self.regime.value,
            "m": self.m,
            "F": arr(self.F),
            "sigma_bar": arr(self.sigma_bar),
            "v": self.v,
            "v_bar": self.v_bar,
            "V": arr(self.V),
            "level_fractions": arr(self.level_fractions),
            "mean_holding": arr(self.mean_holding),
            "root_mass": self.root_mass,
        }


def _check(checks: dict, name: str, err: float, bound: float) -> None:
    checks[name] = err
    if not err <= bound:
        raise NoConvergence(f"identity check {name!r} failed: {err:.3e} > {bound:.1e}")


def summarize(r: RateSet, tol: float = DEFAULT_TOL) -> TheorySummary:
    """Evaluate every closed form permitted by the regime of ``r``.

    Internal identities (velocity equals ``m``, rows of ``V`` equal the
    limiting fractions, the discrete/continuous velocity cross-identity, ...)
    are verified before returning; a failure raises ``NoConvergence``.
    """
    a = alpha(r)
    regime = classify(r)
    out = TheorySummary(rates=r, alpha=a, regime=regime, mean_holding=mean_holding_times(r))
    if regime is RegimeClass.POSITIVE_RECURRENT:
        out.root_mass = 1.0 - a
        return out
    if regime is RegimeClass.NULL_RECURRENT:
        return out

    m = solve_m(r, tol)
    F = escape_probabilities(r, m, tol)
    sig = sigma_bar(r, m)
    v = velocity(r, sig)
    v_bar = discrete_velocity(r, sig, F)
    V = cone_chain_matrix(r, F)
    lf = level_time_fractions(r, sig)

    checks = out.checks
    _check(checks, "sigma_sum", abs(sig.sum() - 1.0), _IDENTITY_TOL)
    _check(checks, "sigma_vs_F", float(np.max(np.abs(sig - F * r.k_plus / r.k_minus))), 1e-12)
    _check(checks, "v_equals_m", abs(v - m), _IDENTITY_TOL)
    _check(checks, "V_rows_sum", float(np.max(np.abs(V.sum(axis=1) - 1.0))), _IDENTITY_TOL)
    _check(checks, "V_rows_sigma", float(np.max(np.abs(V - sig[None, :]))), _IDENTITY_TOL)
    _check(checks, "level_sum", abs(lf.sum() - 1.0), 1e-12)
    lf_ratio = 1.0 / visit_ratios(r, sig).sum(axis=1)
    _check(checks, "level_vs_ratio", float(np.max(np.abs(lf - lf_ratio))), 1e-12)
    holding_per_step = float(np.sum(lf / (r.k_minus + r.k_plus_total)))
    inv_v = 1.0 / v
    _check(checks, "velocity_cross",
           abs(inv_v - holding_per_step / v_bar) / max(1.0, inv_v), _IDENTITY_TOL)

    out.m, out.F, out.sigma_bar, out.v, out.v_bar, out.V, out.level_fractions = (
        m, F, sig, v, v_bar, V, lf,
    )
    return out
