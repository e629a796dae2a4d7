import itertools

import numpy as np
import pytest

from filtcomod.checks import _lambda_ops, random_comodule, random_operator_module
from filtcomod.comodule import regular_comodule, trivial_comodule
from filtcomod.errors import UnsupportedModelError, ValidationError
from filtcomod.exactla import as_field, get_field, matmul, rank
from filtcomod.frobsupport import (ElementaryAbelianModule, KernelModule, SupportReport,
                                   from_elementary_abelian, ga_injectivity_verdict, is_free,
                                   mock_injectivity_verdict, pi_point_test,
                                   restrict_to_kernel, support_empty, to_elementary_abelian)
from filtcomod.hopfmodels import make_model
from filtcomod.mockinj import LangGaFamily, RegularFamily, TrivialFamily


def kernel_of(op, r):
    ops = list(op.psi[:r]) + [np.zeros((op.dim, op.dim), dtype=np.int64)] * max(0, r - len(op.psi))
    return KernelModule(op.p, op.dim, r, tuple(ops), op.p ** r).validate()


def brute_free(K):
    """Search for k vectors whose orbits under all monomials in the u_i span the module."""
    F = as_field(K.p)
    if K.dim % K.order:
        return False
    k = K.dim // K.order
    mons = []
    for exps in itertools.product(range(K.p), repeat=K.r):
        P = np.eye(K.dim, dtype=np.int64)
        for a, e in zip(K.u, exps):
            for _ in range(e):
                P = matmul(P, a, F)
        mons.append(P)
    vectors = [np.array(v) for v in itertools.product(range(K.p), repeat=K.dim) if any(v)]
    for gens in itertools.combinations(vectors, k):
        span = np.stack([matmul(P, g.reshape(-1, 1), F).ravel() for g in gens for P in mons])
        if rank(span, F) == K.dim:
            return True
    return False


def regular_lambda(p, r):
    ops = _lambda_ops(p, r)
    return KernelModule(p, p ** r, r, tuple(ops), p ** r).validate()


def test_restriction_examples():
    m = make_model("Ga", 2, 3)
    K = restrict_to_kernel(trivial_comodule(m, 2, 3), 2)
    assert all(not np.any(u) for u in K.u)
    for p, r in ((2, 1), (2, 2), (3, 1)):
        R = regular_comodule(make_model("Ga", p, p ** r - 1), p ** r - 1)
        assert is_free(restrict_to_kernel(R, r)) == {"free": True, "topDim": 1}
    with pytest.raises(UnsupportedModelError):
        restrict_to_kernel(trivial_comodule(make_model("GLN", 2, 1, N=2)), 1)


def test_is_free_examples():
    for p, r in ((2, 1), (2, 2), (3, 1)):
        assert is_free(regular_lambda(p, r)) == {"free": True, "topDim": 1}
    K = KernelModule(2, 1, 1, (np.zeros((1, 1), dtype=np.int64),), 2)
    assert not is_free(K)["free"]
    J = LangGaFamily(2, 1)
    assert is_free(restrict_to_kernel(J.truncation(4), 1))["free"]


def test_unipotent_restriction():
    u = make_model("UN", 2, 3, N=3)
    K = restrict_to_kernel(regular_comodule(u, 3), 1)
    assert K.order == 8 and not K.abelian and len(K.u) == 3
    # 20 is not a multiple of |U_3(1)| = 8
    assert not is_free(K)["free"]
    T = restrict_to_kernel(trivial_comodule(u, 2, 0), 1)
    assert all(not np.any(a) for a in T.u) and is_free(T)["topDim"] == 2


@pytest.mark.parametrize("p,r", [(2, 1), (2, 2), (3, 1)])
def test_is_free_matches_isomorphism_search(p, r, rng):
    for _ in range(40):
        op = random_operator_module(rng, p=p, max_dim=p * p, n_ops=r)
        K = kernel_of(op, r)
        assert is_free(K)["free"] == brute_free(K)


def test_pi_point_at_coordinate_vectors_matches_jordan_type(rng):
    p = 3
    F = as_field(p)
    for _ in range(30):
        op = random_operator_module(rng, p=p, max_dim=6, n_ops=2)
        E = to_elementary_abelian(kernel_of(op, 2))
        for i in range(2):
            u = op.psi[i]
            top = u
            for _ in range(p - 2):
                top = matmul(top, u, F)
            all_blocks_full = p * rank(top, F) == op.dim
            alpha = [0, 0]
            alpha[i] = 1
            assert pi_point_test(E, alpha)["free"] == all_blocks_full


def test_free_modules_have_free_pi_points(rng):
    for p, r in ((2, 2), (3, 2)):
        E = to_elementary_abelian(regular_lambda(p, r))
        for m in (1, 2):
            F = get_field(p, m)
            for _ in range(200):
                alpha = rng.integers(0, F.q, size=r)
                if alpha.any():
                    assert pi_point_test(E, alpha, F)["free"]


def test_pi_point_examples():
    E = to_elementary_abelian(regular_lambda(2, 1))
    assert pi_point_test(E, [1])["free"]
    T = ElementaryAbelianModule(2, 2, 2, (np.eye(2, dtype=np.int64),) * 2)
    for alpha in ([1, 0], [0, 1], [1, 1]):
        assert not pi_point_test(T, alpha)["free"]
    with pytest.raises(ValidationError):
        pi_point_test(T, [0, 0])


def test_elementary_abelian_roundtrip(rng):
    K0 = KernelModule(2, 3, 2, (np.zeros((3, 3), dtype=np.int64),) * 2, 4)
    assert all(np.array_equal(g, np.eye(3, dtype=np.int64)) for g in to_elementary_abelian(K0).g)
    for _ in range(30):
        K = kernel_of(random_operator_module(rng, p=2, max_dim=4, n_ops=2), 2)
        back = from_elementary_abelian(to_elementary_abelian(K))
        assert all(np.array_equal(a, b) for a, b in zip(K.u, back.u))
        assert is_free(back) == is_free(K)


def test_support_empty_examples():
    assert support_empty(to_elementary_abelian(regular_lambda(2, 2)))["empty"]
    T = ElementaryAbelianModule(2, 1, 1, (np.eye(1, dtype=np.int64),))
    out = support_empty(T)
    assert not out["empty"] and out["witnesses"]
    J = LangGaFamily(2, 1)
    for r in (1, 2, 3):
        d = 2 ** r - 1
        K = restrict_to_kernel(J.piece(d), r)
        assert not support_empty(to_elementary_abelian(K))["empty"]


def test_support_grows_with_height(rng):
    model = make_model("Ga", 2, 7)
    for _ in range(40):
        M = random_comodule(rng, model, n_ops=3)
        for r in (1, 2):
            if not is_free(restrict_to_kernel(M, r))["free"]:
                assert not is_free(restrict_to_kernel(M, r + 1))["free"]


def test_verdicts():
    reg = RegularFamily(make_model("Ga", 2, 1))
    assert mock_injectivity_verdict(reg, 3).first_failure() is None
    assert ga_injectivity_verdict(reg, 3).first_failure() is None
    J = LangGaFamily(2, 1)
    assert mock_injectivity_verdict(J, 2).verdict() == "mock-injective up to rMax=2"
    inj = ga_injectivity_verdict(J, 2)
    assert inj.verdict() == "not injective (witness r=1)"
    assert inj.per_height[1]["defect"] == -1
    triv = TrivialFamily(make_model("Ga", 2, 1))
    assert mock_injectivity_verdict(triv, 2).first_failure() == 1
    assert ga_injectivity_verdict(triv, 2).first_failure() == 1


def test_report_json():
    rep = SupportReport("mock", 1, {1: {"free": True, "dim": 2, "topDim": 1, "defect": 0, "witnesses": []}})
    js = rep.to_json()
    assert js["verdict"] == "mock-injective up to rMax=1" and js["witnessHeight"] is None
    assert set(js["perHeight"]) == {"1"}
