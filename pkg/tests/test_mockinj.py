import numpy as np
import pytest

from filtcomod.comodule import is_stable, regular_comodule, socle_invariants, trivial_comodule
from filtcomod.errors import CapOverflowError, ValidationError
from filtcomod.exactla import contains, get_field, same_span
from filtcomod.frobsupport import is_free, restrict_to_kernel
from filtcomod.hopfmodels import make_model
from filtcomod.mockinj import (CountableTrivialFamily, LangGaFamily, LangUNFamily, PrimitivesFamily,
                               QuotientFamily, RegularFamily, TwistSumFamily, cap_sequence,
                               family_from_json, fixed_point_rows, hom_vanishing_probe, lang_module_ga,
                               quotient_family, stable_cap_piece)


def ga_regular(p):
    return RegularFamily(make_model("Ga", p, 1))


def test_lang_ga_basis_example():
    J = lang_module_ga(2, 1, cap=6)
    m = make_model("Ga", 2, 6)
    got = [m.format(m.from_coords(r, 6)) for r in J.rows(6)]
    assert got == ["1", "t^2 + t", "t^4 + t^2", "t^6 + t^5 + t^4 + t^3"]
    with pytest.raises(ValidationError):
        LangGaFamily(2, 0)


@pytest.mark.parametrize("p,d", [(2, 1), (2, 2), (3, 1)])
def test_lang_ga_closed_form_matches_oracles(p, d):
    J = LangGaFamily(p, d)
    q = p ** d
    for D in (q, 2 * q + 1, 4 * q):
        F = J.model.F
        assert same_span(J.rows(D), J.lang_image_rows(D), F)
        assert same_span(J.rows(D), fixed_point_rows(J.model, d, D), F)
        assert J.rows(D).shape[0] == D // q + 1
        P = J.piece(D)
        P.check()


@pytest.mark.parametrize("p,d", [(2, 1), (2, 2), (3, 1)])
def test_lang_ga_pieces_are_subcomodules(p, d):
    J = LangGaFamily(p, d)
    D = 3 * p ** d
    assert is_stable(regular_comodule(J.model, D), J.rows(D))


@pytest.mark.parametrize("p,d", [(2, 1), (3, 1), (2, 2)])
def test_lang_ga_truncations_free(p, d):
    J = LangGaFamily(p, d)
    for r in (1, 2, 3):
        if p ** r > 27:
            continue
        K = restrict_to_kernel(J.truncation(2 * p ** r), r)
        assert is_free(K)["free"]


def test_quotient_examples():
    reg = ga_regular(2)
    Z = QuotientFamily(reg, reg)
    assert Z.piece(5).dim == 0
    Q = quotient_family(reg, LangGaFamily(2, 1))
    assert [Q.piece(D).dim for D in range(9)] == [D - D // 2 for D in range(9)]
    with pytest.raises(ValidationError):
        QuotientFamily(LangGaFamily(2, 1), reg).piece(4)


@pytest.mark.parametrize("p,d", [(2, 1), (2, 2), (3, 1)])
def test_quotient_socle(p, d):
    Q = QuotientFamily(ga_regular(p), LangGaFamily(p, d))
    assert socle_invariants(Q.piece(4 * p ** d)).dim == d


def test_short_exactness():
    for p, d in ((2, 1), (3, 1), (2, 2)):
        reg, J = ga_regular(p), LangGaFamily(p, d)
        Q = QuotientFamily(reg, J)
        for D in range(12):
            assert J.piece(D).dim + Q.piece(D).dim == reg.piece(D).dim


def test_sandwich_count():
    for p, d in ((2, 1), (3, 1), (2, 2)):
        q = p ** d
        J = LangGaFamily(p, d)
        for D in range(1, 20):
            assert J.piece_dim(D) == D // q + 1
            # lower edge: the Lang image of O_{<= D/(1+q)} already lies in the piece
            m = make_model("Ga", p, D)
            low = np.stack([m.coords(m.lang_pullback(d, m.var("t", k)), D) for k in range(D // (1 + q) + 1)])
            assert contains(J.rows(D), low, m.F)


def test_lang_un_examples():
    L = LangUNFamily(3, 2, 1)
    assert L.lang_image_rows(1).shape[0] == 4
    m = make_model("UN", 2, 2, N=3)
    img = m.lang_pullback(1, m.var("y_1_2"))
    assert img == m.var("y_1_2", 2) - m.var("y_1_2")
    assert L.rows(0).shape[0] == 1


def test_lang_un_matches_fixed_points():
    L = LangUNFamily(3, 2, 1)
    for D in (4, 8):
        assert same_span(L.rows(D), L.fixed_point_rows(D), get_field(2))
        assert same_span(L.saturated_rows(D), L.rows(D), get_field(2))


def test_lang_un_dims():
    L = LangUNFamily(3, 2, 1)
    assert L.dims(12) == [1, 1, 3, 4, 8, 10, 16, 20, 29, 35, 47, 56, 72]


def test_hom_probe():
    k = trivial_comodule(make_model("Ga", 2, 1), 1, 0)
    J = LangGaFamily(2, 1)
    assert hom_vanishing_probe(J, k, [8, 16, 32])["imageDim"] == 0
    zero = trivial_comodule(make_model("Ga", 2, 1), 0, 0)
    out = hom_vanishing_probe(J, zero, [4, 8])
    assert out["imageDim"] == 0 and all(r["homDim"] == 0 for r in out["perCap"])
    # the trivial family does carry a nonzero map to k that survives restriction
    triv = family_from_json({"kind": "trivial", "model": "Ga", "p": 2})
    assert hom_vanishing_probe(triv, k, [4, 8])["imageDim"] == 1


def test_cap_sequence_and_stability():
    J = LangGaFamily(2, 1)
    assert cap_sequence(J, 3) == [3 + 2 * (2 ** k - 1) for k in range(6)]
    _, caps, dims = stable_cap_piece(QuotientFamily(ga_regular(2), J), 2)
    assert len(set(dims[-3:])) == 1
    with pytest.raises(CapOverflowError):
        stable_cap_piece(CountableTrivialFamily(make_model("Ga", 2, 1)), 0)


def test_other_families():
    assert PrimitivesFamily(2).dims(8) == [1, 2, 3, 3, 4, 4, 4, 4, 5]
    assert TwistSumFamily(2, 2).dims(4) == [0, 2, 4, 4, 8]


@pytest.mark.parametrize("obj", [
    {"kind": "lang_ga", "p": 2, "d": 1},
    {"kind": "lang_un", "N": 3, "p": 2, "r": 1},
    {"kind": "regular", "model": "UN", "N": 3, "p": 2},
    {"kind": "primitives", "p": 3},
    {"kind": "quotient", "of": {"kind": "regular", "model": "Ga", "p": 2}, "by": {"kind": "lang_ga", "p": 2, "d": 1}},
    {"kind": "twist_sum", "N": 2, "p": 2},
])
def test_family_json_roundtrip(obj):
    assert family_from_json(obj).to_json() == obj


def test_family_json_rejects_unknown():
    with pytest.raises(ValidationError):
        family_from_json({"kind": "lang_ga", "p": 2, "d": 1, "cap": 3})
    with pytest.raises(ValidationError):
        family_from_json({"kind": "nope"})


def test_primitives_count_at_frobenius_degrees():
    # span{1, t, t^p, ..., t^{p^r}} has r + 2 elements of degree <= p^r
    for p in (2, 3):
        P = PrimitivesFamily(p)
        assert [P.piece_dim(p ** r) for r in range(4)] == [r + 2 for r in range(4)]
