"""Restriction to Frobenius kernels, freeness, pi-points and injectivity verdicts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .comodule import Comodule, filtration_piece, operators_from_comodule
from .errors import CapOverflowError, CrossCheckError, UnsupportedModelError, ValidationError
from .exactla import as_field, get_field, matmul, rank


@dataclass(frozen=True, eq=False)
class KernelModule:
    """Action of the generators u_0, ..., on a module for G_{(r)}.

    ``order`` is the dimension of the distribution algebra (p^r for G_a,
    p^{r N'} for U_N).  For G_a the generators commute.
    """

    p: int
    dim: int
    r: int
    u: tuple
    order: int
    abelian: bool = True

    def validate(self):
        F = as_field(self.p)
        for a in self.u:
            P = np.eye(self.dim, dtype=np.int64)
            for _ in range(self.p):
                P = matmul(P, a, F)
            if np.any(P):
                raise ValidationError("u operator is not p-nilpotent")
        if self.abelian:
            for a, b in itertools.combinations(self.u, 2):
                if not np.array_equal(matmul(a, b, F), matmul(b, a, F)):
                    raise ValidationError("u operators do not commute")
        return self


@dataclass(frozen=True, eq=False)
class ElementaryAbelianModule:
    p: int
    dim: int
    r: int
    g: tuple

    def u(self):
        F = as_field(self.p)
        eye = np.eye(self.dim, dtype=np.int64)
        return tuple(F.sub(a, eye) for a in self.g)


def restrict_to_kernel(M: Comodule, r):
    """The G_{(r)}-module underlying M (u_i dual to v^{p^i})."""
    if r < 1:
        raise ValidationError("kernel height r must be >= 1")
    model = M.model
    p = model.p
    if model.kind == "Ga":
        m = M.dim
        ops = []
        for i in range(r):
            j = p ** i
            ops.append(M.rho[:, :, j].T.copy() if j <= M.D else np.zeros((m, m), dtype=np.int64))
        return KernelModule(p, m, r, tuple(ops), p ** r).validate()
    if model.kind == "UN":
        if model.N > 3:
            raise UnsupportedModelError("U_N kernels are implemented for N <= 3")
        idx = model._index(M.D)
        ops = []
        for v in range(model.nv):
            for i in range(r):
                e = [0] * model.nv
                e[v] = p ** i
                j = idx.get((tuple(e), 0))
                ops.append(M.rho[:, :, j].T.copy() if j is not None
                           else np.zeros((M.dim, M.dim), dtype=np.int64))
        return KernelModule(p, M.dim, r, tuple(ops), p ** (r * model.nv), abelian=False).validate()
    raise UnsupportedModelError("Frobenius kernels of GL_N are out of scope")


def top_dimension(M: KernelModule):
    if M.dim == 0:
        return 0
    if not M.u:
        return M.dim
    return M.dim - rank(np.hstack(M.u), M.p)


def is_free(M: KernelModule):
    top = top_dimension(M)
    return {"free": M.dim == top * M.order, "topDim": top}


def to_elementary_abelian(M: KernelModule):
    if not M.abelian:
        raise ValidationError("only commuting generators correspond to an elementary abelian group")
    F = as_field(M.p)
    eye = np.eye(M.dim, dtype=np.int64)
    return ElementaryAbelianModule(M.p, M.dim, M.r, tuple(F.add(eye, a) for a in M.u))


def from_elementary_abelian(E: ElementaryAbelianModule):
    return KernelModule(E.p, E.dim, E.r, E.u(), E.p ** E.r).validate()


def pi_point_operator(E: ElementaryAbelianModule, alpha, F):
    """A = sum alpha_i (g_i - 1) over the field F containing F_p."""
    A = np.zeros((E.dim, E.dim), dtype=np.int64)
    for a, u in zip(alpha, E.u()):
        A = F.add(A, F.mul(int(a), u))
    return A


def pi_point_test(E: ElementaryAbelianModule, alpha, field=None):
    """Restriction along t -> sum alpha_i u_i is free iff rank = dim (p-1)/p."""
    F = as_field(field if field is not None else E.p)
    if F.p != E.p:
        raise ValidationError("alpha must live in an extension of F_p")
    alpha = [F.scalar(a) for a in alpha]
    if len(alpha) != E.r or not any(alpha):
        raise ValidationError("alpha must be a nonzero vector of length r")
    if (E.dim * (E.p - 1)) % E.p:
        return {"free": False, "reason": "dimension not divisible by p"}
    A = pi_point_operator(E, alpha, F)
    return {"free": rank(A, F) == E.dim * (E.p - 1) // E.p}


def _projective_points(p, r):
    for v in itertools.product(range(p), repeat=r):
        nz = [x for x in v if x]
        if nz and nz[0] == 1:
            yield v


def pi_point_sample(E: ElementaryAbelianModule, seed=0, samples=20, extensions=(2, 3)):
    """Non-free pi-points found over F_p (exhaustively) and random ones over extensions."""
    witnesses = []
    for alpha in _projective_points(E.p, E.r):
        if not pi_point_test(E, alpha)["free"]:
            witnesses.append({"field": [E.p, 1], "alpha": list(alpha)})
    rng = np.random.default_rng(seed)
    for m in extensions:
        try:
            F = get_field(E.p, m)
        except ValidationError:
            continue
        for _ in range(samples):
            alpha = rng.integers(0, F.q, size=E.r)
            if not alpha.any():
                continue
            if not pi_point_test(E, alpha, F)["free"]:
                witnesses.append({"field": [E.p, m], "alpha": [int(a) for a in alpha]})
    return witnesses


def support_empty(E: ElementaryAbelianModule, seed=0, samples=20):
    """Exact freeness, cross-checked against sampled pi-points."""
    free = is_free(from_elementary_abelian(E))["free"]
    witnesses = pi_point_sample(E, seed, samples)
    if free and witnesses:
        raise CrossCheckError("free module has a non-free pi-point")
    return {"empty": free, "witnesses": witnesses}


@dataclass
class SupportReport:
    kind: str
    rmax: int
    per_height: dict = field(default_factory=dict)

    def first_failure(self):
        for r in sorted(self.per_height):
            if not self.per_height[r]["free"]:
                return r
        return None

    def verdict(self):
        r = self.first_failure()
        if self.kind == "mock":
            return f"mock-injective up to rMax={self.rmax}" if r is None else f"not mock-injective (fails at r={r})"
        return f"injective up to rMax={self.rmax}" if r is None else f"not injective (witness r={r})"

    def to_json(self):
        return {
            "test": self.kind,
            "rMax": self.rmax,
            "verdict": self.verdict(),
            "witnessHeight": self.first_failure(),
            "perHeight": {str(r): self.per_height[r] for r in sorted(self.per_height)},
        }


def _height_record(K: KernelModule, seed, with_pi=True):
    res = is_free(K)
    rec = {
        "dim": K.dim,
        "free": res["free"],
        "topDim": res["topDim"],
        "defect": K.dim - res["topDim"] * K.order,
        "witnesses": [],
    }
    if with_pi and K.abelian:
        out = support_empty(to_elementary_abelian(K), seed=seed)
        rec["witnesses"] = out["witnesses"]
    return rec


def mock_injectivity_verdict(family, rmax, blocks=2, seed=0):
    """Freeness of block-complete truncations restricted to G_{(r)}, r <= rmax."""
    rep = SupportReport("mock", rmax)
    for r in range(1, rmax + 1):
        piece = family.truncation(blocks * family.model.p ** r)
        rep.per_height[r] = _height_record(restrict_to_kernel(piece, r), seed)
    return rep


def ga_injectivity_verdict(family, rmax, seed=0):
    """Freeness of M_{<=p^r-1} as a (Z/p)^r-module for each r <= rmax."""
    if family.model.kind != "Ga":
        raise UnsupportedModelError("the injectivity criterion is for G_a")
    rep = SupportReport("injective", rmax)
    p = family.model.p
    for r in range(1, rmax + 1):
        d = p ** r - 1
        piece = family.stable_piece(d)
        sub = filtration_piece(piece, d).as_comodule()
        rep.per_height[r] = _height_record(restrict_to_kernel(sub, r), seed)
    return rep
