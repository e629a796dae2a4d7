from fractions import Fraction
from math import comb, factorial

import numpy as np
import pytest
from sklearn.base import clone

from filtcomod.comodule import regular_comodule
from filtcomod.errors import AmbiguousWindowError, ValidationError
from filtcomod.growth import CofiniteTypeEstimator, cofinite_check, dimension_sequence, fit_cofinite_type
from filtcomod.hopfmodels import make_model
from filtcomod.mockinj import (CountableTrivialFamily, LangGaFamily, PrimitivesFamily, QuotientFamily,
                               RegularFamily, TrivialFamily, TwistSumFamily)

# dims of the U_3 Lang module pieces over F_2 (measured; agrees with the fixed-point oracle)
U3_LANG = [1, 1, 3, 4, 8, 10, 16, 20, 29, 35, 47, 56, 72, 84, 104, 120, 145, 165, 195, 220, 256, 286, 328,
           364, 413]


def test_dimension_sequences():
    assert dimension_sequence(RegularFamily(make_model("Ga", 2, 1)), 5) == [1, 2, 3, 4, 5, 6]
    assert dimension_sequence(LangGaFamily(2, 1), 6) == [1, 1, 2, 2, 3, 3, 4]
    assert dimension_sequence(RegularFamily(make_model("UN", 2, 1, N=3)), 6) == [comb(3 + d, 3) for d in range(7)]
    assert dimension_sequence(regular_comodule(make_model("Ga", 3, 4), 4), 5) == [1, 2, 3, 4, 5, 5]


def test_fit_examples():
    assert fit_cofinite_type([d + 1 for d in range(41)]).gamma == (1, 1)
    prof = fit_cofinite_type([d // 2 + 1 for d in range(41)])
    assert prof.gamma == (1, Fraction(1, 2)) and prof.period == 2
    assert fit_cofinite_type([comb(3 + d, 3) for d in range(41)]).gamma == (3, Fraction(1, 6))


def test_polynomial_recovery(rng):
    for _ in range(60):
        e = int(rng.integers(1, 7))
        a = [int(x) for x in rng.integers(0, 5, size=e + 1)]
        a[e] = int(rng.integers(1, 6))
        dims = [sum(a[i] * comb(d, i) for i in range(e + 1)) for d in range(41)]
        prof = fit_cofinite_type(dims)
        assert prof.gamma == (e, Fraction(a[e], factorial(e)))


@pytest.mark.parametrize("q", [2, 3, 4, 8])
def test_quasi_polynomials(q):
    assert fit_cofinite_type([d // q + 1 for d in range(41)]).gamma == (1, Fraction(1, q))
    assert fit_cofinite_type([d - d // q for d in range(41)]).gamma == (1, Fraction(q - 1, q))


def test_product_of_floors():
    prof = fit_cofinite_type([(d // 2 + 1) * (d // 3 + 1) for d in range(61)])
    assert prof.gamma == (2, Fraction(1, 6))


def test_reindexing_keeps_degree(rng):
    base = [lambda d: comb(3 + d, 3), lambda d: d // 2 + 1, lambda d: (d // 3) * (d // 3 + 1)]
    for s in base:
        e = fit_cofinite_type([s(d) for d in range(41)]).degree
        for c in (2, 3):
            assert fit_cofinite_type([s(c * d) for d in range(41)]).degree == e


def test_flags():
    assert fit_cofinite_type(PrimitivesFamily(2).dims(40)).degree == "subpolynomial"
    assert fit_cofinite_type(PrimitivesFamily(3).dims(40)).degree == "subpolynomial"
    prof = fit_cofinite_type(TwistSumFamily(2, 2).dims(40))
    assert prof.degree == "superpolynomial" and prof.coeff == "inconclusive"
    assert fit_cofinite_type([2 ** d for d in range(30)]).degree == "superpolynomial"


def test_eventually_constant():
    assert fit_cofinite_type([1, 2, 3] + [4] * 10).gamma == (0, 4)


def test_errors():
    with pytest.raises(ValidationError):
        fit_cofinite_type([1, 2, 3])
    with pytest.raises(ValidationError):
        fit_cofinite_type([1, 2, 3, 2, 5, 6, 7, 8, 9])
    with pytest.raises(ValidationError):
        fit_cofinite_type([(0, 1), (2, 2)] + [(d, d) for d in range(3, 10)])
    with pytest.raises(AmbiguousWindowError):
        # the U_3 Lang sequence is too short at dMax = 20 to pin down its period-4 pattern
        fit_cofinite_type(U3_LANG[:21])


def test_u3_lang_type():
    prof = fit_cofinite_type(U3_LANG)
    assert prof.gamma == (3, Fraction(1, 48)) and prof.period == 4


def test_quotient_type():
    for p, d in ((2, 1), (3, 1), (2, 2)):
        q = p ** d
        Q = QuotientFamily(RegularFamily(make_model("Ga", p, 1)), LangGaFamily(p, d))
        assert fit_cofinite_type(Q.dims(40)).gamma == (1, Fraction(q - 1, q))


def test_cofinite_check():
    reg = cofinite_check(RegularFamily(make_model("Ga", 2, 1)), 3)
    assert all(r["cofinite"] for r in reg)
    ct = cofinite_check(CountableTrivialFamily(make_model("Ga", 2, 1)), 0)
    assert not ct[0]["cofinite"]
    # Q = span{1, t^{p^i}} and Q / soc(Q) is trivial of countable dimension
    for p in (2, 3):
        ga = make_model("Ga", p, 1)
        Qs = QuotientFamily(PrimitivesFamily(p), TrivialFamily(ga))
        assert not cofinite_check(Qs, 0)[0]["cofinite"]


def test_profile_serialization():
    prof = fit_cofinite_type([d // 2 + 1 for d in range(10)])
    js = prof.to_json()
    assert js["leadingCoeff"] == "1/2" and js["fittedDegree"] == 1 and js["window"]
    assert prof.to_csv().splitlines()[:2] == ["d,dim", "0,1"]


def test_estimator():
    est = CofiniteTypeEstimator()
    d = np.arange(41)
    est.fit(d, [x // 2 + 1 for x in d])
    assert (est.degree_, est.coeff_, est.period_) == (1, Fraction(1, 2), 2)
    assert np.allclose(est.predict([10, 20]), [5.0, 10.0])
    c = clone(CofiniteTypeEstimator(max_period=4))
    assert c.get_params() == {"max_period": 4, "max_degree": 8}
    assert CofiniteTypeEstimator().fit([comb(3 + x, 3) for x in range(30)]).degree_ == 3
