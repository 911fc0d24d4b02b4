import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from copoly import theory
from copoly.exceptions import DimensionError, RegimeError
from copoly.model import RegimeClass, validate_rates

from conftest import random_rate_sets


def quadratic_m(kp, km):
    """Positive root of the d = 2 growth equation cleared of denominators."""
    b = km[0] + km[1] - kp[0] - kp[1]
    c = km[0] * km[1] - kp[0] * km[1] - kp[1] * km[0]
    return (-b + math.sqrt(b * b - 4 * c)) / 2


def polynomial_m(kp, km):
    """Largest real root of prod(m + k-) - sum_r k+_r prod_{s != r}(m + k-_s)."""
    P = np.poly1d([1.0])
    for k in km:
        P *= np.poly1d([1.0, k])
    Q = np.poly1d([0.0])
    for r, k in enumerate(kp):
        term = np.poly1d([k])
        for s, k2 in enumerate(km):
            if s != r:
                term *= np.poly1d([1.0, k2])
        Q += term
    roots = (P - Q).roots
    real = roots[np.abs(roots.imag) < 1e-9].real
    return float(real.max())


def test_alpha_ref(ref_rates):
    assert theory.alpha(ref_rates) == pytest.approx(1.0185185185185186, abs=1e-6)


@pytest.mark.parametrize("kp, km, regime", [
    ([1, 1.2], [1.8, 2.592], RegimeClass.TRANSIENT),
    ([0.3, 0.2], [1, 1], RegimeClass.POSITIVE_RECURRENT),
    ([0.5, 0.5], [1, 1], RegimeClass.NULL_RECURRENT),
    ([2], [1], RegimeClass.TRANSIENT),
])
def test_classify_examples(kp, km, regime):
    assert theory.classify(validate_rates(kp, km)) is regime


def test_solve_m_ref_against_quadratic(ref_rates):
    m = theory.solve_m(ref_rates)
    oracle = (-2.192 + math.sqrt(2.192 ** 2 + 4 * 0.0864)) / 2
    assert m == pytest.approx(oracle, abs=1e-9)
    assert m == pytest.approx(0.0387315, abs=1e-6)
    assert abs(theory.growth_function(ref_rates, m) - 1) <= 1e-12


def test_solve_m_simple_cases():
    assert theory.solve_m(validate_rates([2], [1])) == pytest.approx(1.0, abs=1e-12)
    assert theory.solve_m(validate_rates([1, 3], [1, 1])) == pytest.approx(3.0, abs=1e-12)


def test_solve_m_rejects_recurrent(recurrent_rates):
    with pytest.raises(RegimeError):
        theory.solve_m(recurrent_rates)
    with pytest.raises(RegimeError):
        theory.solve_m(validate_rates([0.5, 0.5], [1, 1]))


def test_escape_probabilities_ref(ref_rates):
    F = theory.escape_probabilities(ref_rates, theory.solve_m(ref_rates))
    assert F == pytest.approx([0.97894, 0.98528], abs=1e-5)


def test_escape_probabilities_fixed_point_iteration(ref_rates):
    # independent oracle: iterate F = k- / (k- + K+ - sum k+ F) from zero
    kp, km = ref_rates.k_plus, ref_rates.k_minus
    K = kp.sum()
    F = np.zeros(2)
    for _ in range(200000):
        F_new = km / (km + K - kp @ F)
        if np.max(np.abs(F_new - F)) < 1e-15:
            break
        F = F_new
    got = theory.escape_probabilities(ref_rates, theory.solve_m(ref_rates))
    assert got == pytest.approx(F, abs=1e-9)


def test_sigma_bar_examples(ref_rates, sym_rates):
    s = theory.sigma_bar(ref_rates, theory.solve_m(ref_rates))
    assert s == pytest.approx([0.5436, 0.4564], abs=5e-4)
    assert s[0] == pytest.approx(0.54385, abs=1e-5)
    assert theory.sigma_bar(sym_rates, 3.0) == pytest.approx([0.25, 0.75], abs=1e-15)


def test_closed_form_ref(ref_rates):
    s1 = (1.408 - math.sqrt(5.150464)) / (2 * (1.8 - 2.592))
    got = theory.two_monomer_closed_form(ref_rates)
    assert got[0] == pytest.approx(s1, abs=1e-12)
    assert got[0] + got[1] == pytest.approx(1.0, abs=1e-12)


def test_closed_form_equal_detachment(sym_rates):
    assert theory.two_monomer_closed_form(sym_rates) == pytest.approx((0.25, 0.75), abs=1e-15)


def test_closed_form_dimension():
    with pytest.raises(DimensionError):
        theory.two_monomer_closed_form(validate_rates([1, 1, 1], [1, 1, 1]))


def test_velocity_examples(sym_rates, ref_rates):
    assert theory.velocity(sym_rates, [0.25, 0.75]) == pytest.approx(3.0, abs=1e-15)
    m = theory.solve_m(ref_rates)
    assert theory.velocity(ref_rates, theory.sigma_bar(ref_rates, m)) == pytest.approx(m, abs=1e-12)


@pytest.mark.parametrize("kp, km, drift", [([2], [1], 1 / 3), ([1, 3], [1, 1], 0.6)])
def test_discrete_velocity_birth_death(kp, km, drift):
    r = validate_rates(kp, km)
    s = theory.summarize(r)
    # away from the root the embedded chain steps up with K+/q and down with k-/q
    q = r.k_plus_total + km[0]
    assert drift == pytest.approx((r.k_plus_total - km[0]) / q, abs=1e-15)
    assert s.v_bar == pytest.approx(drift, abs=1e-12)


def test_cone_chain_rows(sym_rates, ref_rates):
    V = theory.summarize(sym_rates).V
    assert V == pytest.approx(np.array([[0.25, 0.75], [0.25, 0.75]]), abs=1e-12)
    s = theory.summarize(ref_rates)
    assert np.allclose(s.V, s.sigma_bar[None, :], atol=1e-10, rtol=0)


def test_sigma_is_stationary_vector_of_cone_chain(ref_rates):
    s = theory.summarize(ref_rates)
    w, vecs = np.linalg.eig(s.V.T)
    pi = np.real(vecs[:, np.argmin(np.abs(w - 1))])
    pi /= pi.sum()
    assert pi == pytest.approx(s.sigma_bar, abs=1e-10)


def test_level_fractions(ref_rates, sym_rates):
    s = theory.summarize(ref_rates)
    w = np.array([0.5436 * 4.0, 0.4564 * 4.792])
    assert s.level_fractions == pytest.approx(w / w.sum(), abs=5e-4)
    assert s.level_fractions == pytest.approx([0.49880, 0.50120], abs=1e-5)
    assert theory.summarize(sym_rates).level_fractions == pytest.approx([0.25, 0.75], abs=1e-12)


def test_visit_ratios_reciprocal(ref_rates):
    s = theory.summarize(ref_rates)
    R = theory.visit_ratios(ref_rates, s.sigma_bar)
    assert np.allclose(R * R.T, 1.0, atol=1e-14)
    assert np.allclose(np.diag(R), 1.0)


@pytest.mark.parametrize("counts, expected", [((0, 0), 0.5), ((1, 0), 0.15), ((1, 1), 0.03)])
def test_stationary_weight(recurrent_rates, counts, expected):
    assert theory.stationary_weight(recurrent_rates, counts) == pytest.approx(expected, abs=1e-14)


def test_stationary_weight_transient_rejected(ref_rates):
    with pytest.raises(RegimeError):
        theory.stationary_weight(ref_rates, (0, 0))


def test_stationary_balance_by_enumeration():
    # global balance on all polymers of length <= 6; mass beyond is a geometric tail
    r = validate_rates([0.3, 0.2, 0.15], [1.0, 0.8, 2.0])
    a = theory.alpha(r)
    K = r.k_plus_total
    L = 6

    def mu(seq):
        return theory.stationary_weight(r, np.bincount(np.asarray(seq, dtype=int), minlength=3))

    total = 0.0
    for n in range(L + 1):
        for seq in itertools.product(range(3), repeat=n):
            total += mu(seq)
            q = K if not seq else K + r.k_minus[seq[-1]]
            inflow = sum(mu(seq + (j,)) * r.k_minus[j] for j in range(3))
            if seq:
                inflow += mu(seq[:-1]) * r.k_plus[seq[-1]]
            assert mu(seq) * q == pytest.approx(inflow, rel=1e-12)
    assert total == pytest.approx(1 - a ** (L + 1), rel=1e-12)


def test_length_distribution(recurrent_rates):
    p = theory.length_distribution(recurrent_rates, 3)
    assert p == pytest.approx([0.5, 0.25, 0.125, 0.0625])


def test_summary_regime_gating(recurrent_rates):
    s = theory.summarize(recurrent_rates)
    assert s.sigma_bar is None and s.v is None
    assert s.root_mass == pytest.approx(0.5)
    d = s.to_dict()
    assert d["regime"] == "positive_recurrent" and d["m"] is None
    null = theory.summarize(validate_rates([0.5, 0.5], [1, 1]))
    assert null.regime is RegimeClass.NULL_RECURRENT and null.root_mass is None


def test_classification_exact_on_random_sets():
    for r in random_rate_sets(300, seed=11):
        exact = sum(Fraction(float(p)) / Fraction(float(m)) for p, m in zip(r.k_plus, r.k_minus))
        expected = RegimeClass.TRANSIENT if exact > 1 else RegimeClass.POSITIVE_RECURRENT
        assert theory.classify(r) is expected


def test_general_m_against_polynomial_roots():
    for r in random_rate_sets(200, seed=5, d_range=(2, 5), low=0.1, high=10.0):
        if theory.classify(r) is not RegimeClass.TRANSIENT:
            continue
        assert theory.solve_m(r) == pytest.approx(polynomial_m(r.k_plus, r.k_minus), rel=1e-7)


def test_d2_m_against_quadratic():
    for r in random_rate_sets(200, seed=6, d_range=(2, 2)):
        if theory.classify(r) is not RegimeClass.TRANSIENT:
            continue
        oracle = quadratic_m(r.k_plus, r.k_minus)
        assert theory.solve_m(r) == pytest.approx(oracle, rel=1e-8, abs=1e-12)


transient_st = st.integers(1, 6).flatmap(lambda d: st.tuples(
    st.lists(st.floats(0.01, 10), min_size=d, max_size=d),
    st.lists(st.floats(0.01, 10), min_size=d, max_size=d)))


@settings(max_examples=200, deadline=None)
@given(transient_st)
def test_transient_invariants(rates):
    r = validate_rates(*rates)
    assume(theory.alpha(r) > 1.001)
    s = theory.summarize(r)
    assert abs(s.sigma_bar.sum() - 1) <= 1e-10
    assert np.all((s.F > 0) & (s.F < 1))
    assert np.all(s.sigma_bar > 0)
    assert 0 < s.m < r.k_plus_total
    assert abs(s.v - s.m) <= 1e-10
    assert np.allclose(s.V, s.sigma_bar[None, :], atol=1e-10, rtol=0)
    assert abs(s.level_fractions.sum() - 1) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(transient_st, st.floats(1.01, 3.0))
def test_m_increases_with_attachment(rates, factor):
    r = validate_rates(*rates)
    assume(theory.alpha(r) > 1.001)
    bigger = validate_rates(np.asarray(rates[0]) * factor, rates[1])
    assert theory.solve_m(bigger) > theory.solve_m(r)
