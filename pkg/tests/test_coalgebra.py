import numpy as np
import pytest

from filtcomod.checks import all_subspaces, brute_generated, brute_subcoalgebras
from filtcomod.coalgebra import (FiniteCoalgebra, SubspaceInAmbient, filtration_coalgebra,
                                 generated_subcoalgebra, image_coalgebra, kernel_coalgebra,
                                 restrict_coalgebra)
from filtcomod.errors import CapOverflowError, NotCoalgebraMapError, ValidationError
from filtcomod.exactla import get_field, matmul
from filtcomod.hopfmodels import make_model, phi_star


def _coords(m, d, *elements):
    return np.stack([m.coords(e, d) for e in elements])


def test_filtration_coalgebra_examples():
    a = make_model("Ga", 2, 3)
    C0 = filtration_coalgebra(a, 0)
    assert C0.dim == 1 and C0.delta[0, 0, 0] == 1 and C0.counit[0] == 1
    assert filtration_coalgebra(make_model("UN", 2, 2, N=3), 2).dim == 10
    # O(G_a)_{<= p^r - 1} and O(G_a(r)) have the same structure constants
    for p, r in ((2, 1), (2, 2), (3, 1)):
        m = make_model("Ga", p, p ** r - 1)
        A = filtration_coalgebra(m, p ** r - 1)
        B = kernel_coalgebra(m, r)
        assert np.array_equal(A.delta, B.delta) and np.array_equal(A.counit, B.counit)


@pytest.mark.parametrize("kind,p,d,N", [("Ga", 2, 6, None), ("Ga", 3, 5, None), ("UN", 2, 3, 3),
                                        ("GLN", 2, 2, 2), ("GLN", 3, 1, 2)])
def test_coassociative(kind, p, d, N):
    assert filtration_coalgebra(make_model(kind, p, d, N=N), d).check()


def test_generated_examples():
    a = make_model("Ga", 2, 3)
    C = filtration_coalgebra(a, 3)
    one = SubspaceInAmbient.span(_coords(a, 3, a.one()), a.F, C.dim)
    assert generated_subcoalgebra(C, one) == one
    got = generated_subcoalgebra(C, SubspaceInAmbient.span(_coords(a, 3, a.var("t")), a.F, C.dim))
    assert got == SubspaceInAmbient.span(_coords(a, 3, a.one(), a.var("t")), a.F, C.dim)
    g = make_model("GLN", 2, 1, N=2)
    C = filtration_coalgebra(g, 1)
    got = generated_subcoalgebra(C, SubspaceInAmbient.span(_coords(g, 1, g.var("x_1_1")), g.F, C.dim))
    want = SubspaceInAmbient.span(_coords(g, 1, *[g.var(v) for v in g.vars]), g.F, C.dim)
    assert got == want


def test_generated_matches_brute_force():
    a = make_model("Ga", 2, 3)
    C = filtration_coalgebra(a, 3)
    closed = brute_subcoalgebras(C)
    for X in all_subspaces(C.dim, 2, max_dim=2):
        if X.shape[0]:
            got = generated_subcoalgebra(C, X).basis
            assert np.array_equal(got, brute_generated(closed, X, C.field, C.dim))


def test_generated_is_idempotent_and_monotone(rng):
    u = make_model("UN", 2, 2, N=3)
    C = filtration_coalgebra(u, 2)
    for _ in range(10):
        X = rng.integers(0, 2, size=(2, C.dim))
        W = generated_subcoalgebra(C, X)
        assert C.is_subcoalgebra(W.basis)
        assert generated_subcoalgebra(C, W) == W
        assert SubspaceInAmbient.span(X, u.F, C.dim) <= W


def test_restrict_and_image():
    a = make_model("Ga", 2, 3)
    C = filtration_coalgebra(a, 3)
    eye = np.eye(C.dim, dtype=np.int64)
    D, sub = image_coalgebra(eye, C, C)
    assert D.dim == C.dim
    sub = SubspaceInAmbient.span(_coords(a, 3, a.one(), a.var("t")), a.F, C.dim)
    assert restrict_coalgebra(C, sub).check()
    with pytest.raises(NotCoalgebraMapError):
        bad = SubspaceInAmbient.span(_coords(a, 3, a.var("t")), a.F, C.dim)
        restrict_coalgebra(C, bad)


def test_phi_star_image_is_unipotent_piece():
    g = make_model("GLN", 2, 2, N=2)
    u = make_model("UN", 2, 2, N=2)
    for d in range(3):
        src, tgt = filtration_coalgebra(g, d), filtration_coalgebra(u, d)
        phi = np.stack([u.coords(phi_star(g, u, b), d) for b in g.basis(d)]).T
        D, sub = image_coalgebra(phi, src, tgt)
        assert D.dim == tgt.dim


def test_quotient_to_frobenius_kernel():
    p = 3
    a = make_model("Ga", p, p - 1)
    src = filtration_coalgebra(a, p - 1)
    tgt = kernel_coalgebra(a, 1)
    phi = np.eye(p, dtype=np.int64)
    D, _ = image_coalgebra(phi, src, tgt)
    assert D.dim == p


def test_json_roundtrip_and_validation():
    C = filtration_coalgebra(make_model("Ga", 3, 4), 4)
    back = FiniteCoalgebra.from_json(C.to_json(), 3)
    assert np.array_equal(back.delta, C.delta)
    with pytest.raises(ValidationError):
        FiniteCoalgebra.from_json({"dim": 1, "delta": [], "counit": ["1"], "x": 0}, 2)


def test_cap_overflow():
    with pytest.raises(CapOverflowError):
        filtration_coalgebra(make_model("Ga", 2, 2), 3)
