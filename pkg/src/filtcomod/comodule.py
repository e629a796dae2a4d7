"""Finite-dimensional right comodules over a filtration piece O(G)_{<=D}.

A comodule stores ``rho[a, b, j]`` with Delta_M(m_a) = sum rho[a, b, j] m_b ⊗ c_j,
where c_j runs over ``model.basis(D)``.  Vectors of M are row vectors of
coordinates; operators act on column vectors (``psi @ v``).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from math import factorial

import numpy as np

from .coalgebra import SubspaceInAmbient, filtration_coalgebra, filtration_subspace
from .errors import CapOverflowError, UnsupportedModelError, ValidationError
from .exactla import (annihilator, as_field, as_matrix, complement_pivots, contains,
                      intersect_subspaces, kernel_basis, left_kernel_basis, matmul,
                      pivots_of, row_basis)
from .hopfmodels import make_model


def fdot(A, B, axes, F):
    """Field tensordot."""
    if F.m == 1:
        return np.tensordot(A, B, axes=axes) % F.p
    ax_a, ax_b = axes
    A2 = np.moveaxis(A, ax_a, -1)
    B2 = np.moveaxis(B, ax_b, 0)
    out = np.zeros(A2.shape[:-1] + B2.shape[1:], dtype=np.int64)
    for k in range(A2.shape[-1]):
        out = F.add(out, F.mul(A2[..., k].reshape(A2.shape[:-1] + (1,) * (B2.ndim - 1)), B2[k]))
    return out


@dataclass(frozen=True, eq=False)
class Comodule:
    model: object
    D: int
    rho: np.ndarray

    @property
    def field(self):
        return self.model.F

    @property
    def dim(self):
        return self.rho.shape[0]

    @property
    def ambient_dim(self):
        return self.rho.shape[2]

    def coaction(self, v):
        """Delta_M(v) as an m x n matrix (row b, column j)."""
        v = np.asarray(v, dtype=np.int64)
        if self.dim == 0:
            return np.zeros((0, self.ambient_dim), dtype=np.int64)
        return fdot(v, self.rho, ([0], [0]), self.field)

    def check(self):
        """Counit and coassociativity as exact coefficient equations."""
        F = self.field
        m, n = self.dim, self.ambient_dim
        C = filtration_coalgebra(self.model.with_cap(max(self.model.cap, self.D)), self.D)
        if C.dim != n:
            raise ValidationError("coaction tensor does not match the ambient piece")
        eps = fdot(self.rho, C.counit, ([2], [0]), F) if m else np.zeros((0, 0), dtype=np.int64)
        if not np.array_equal(eps, np.eye(m, dtype=np.int64)):
            raise ValidationError("counit identity fails for the coaction")
        mu = C.delta
        for a in range(m):
            t1 = np.zeros((m, n, n), dtype=np.int64)
            t2 = np.zeros((m, n, n), dtype=np.int64)
            for b, k in zip(*np.nonzero(self.rho[a])):
                c = int(self.rho[a, b, k])
                t1[:, :, k] = F.add(t1[:, :, k], F.mul(c, self.rho[b]))
            for b, j in zip(*np.nonzero(self.rho[a])):
                c = int(self.rho[a, b, j])
                t2[b] = F.add(t2[b], F.mul(c, mu[j]))
            if not np.array_equal(t1, t2):
                raise ValidationError(f"coassociativity fails at m_{a}")
        return True

    def to_json(self):
        a, b, j = np.nonzero(self.rho)
        return {
            "model": self.model.describe(),
            "dim": int(self.dim),
            "ambientDegree": int(self.D),
            "rho": [[int(x), int(y), int(z), str(int(self.rho[x, y, z]))] for x, y, z in zip(a, b, j)],
        }


def comodule_from_json(obj):
    from .hopfmodels import make_model as _mk
    if isinstance(obj, str):
        obj = json.loads(obj)
    allowed = {"model", "dim", "rho", "ambientDegree"}
    if not isinstance(obj, dict) or set(obj) - allowed or not {"model", "dim", "rho"} <= set(obj):
        raise ValidationError("comodule JSON needs model, dim, rho (and optional ambientDegree)")
    md = obj["model"]
    if set(md) - {"kind", "p", "N", "cap", "field_ext"}:
        raise ValidationError("unknown model fields")
    from .exactla import get_field
    F = get_field(md["p"], md.get("field_ext", 1))
    m = obj["dim"]
    entries = obj["rho"]
    D = obj.get("ambientDegree")
    kind = md["kind"]
    if D is None:
        if kind != "Ga":
            raise ValidationError("ambientDegree is required outside G_a")
        D = max((e[2] for e in entries), default=0)
    model = _mk(kind, F, max(md.get("cap", D), D), md.get("N"))
    n = model.dim(D)
    rho = np.zeros((m, m, n), dtype=np.int64)
    for e in entries:
        a, b, j, c = e
        if not (0 <= a < m and 0 <= b < m and 0 <= j < n):
            raise ValidationError(f"rho index out of range: {e}")
        rho[a, b, j] = F.scalar(c)
    M = Comodule(model, D, rho)
    M.check()
    return M


@dataclass(frozen=True, eq=False)
class Submodule:
    parent: Comodule
    basis: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def pivots(self):
        return pivots_of(self.basis)

    def as_comodule(self):
        return restrict(self.parent, self.basis)

    def __eq__(self, other):
        return isinstance(other, Submodule) and np.array_equal(self.basis, other.basis)

    def __hash__(self):
        return hash(self.basis.tobytes())


def regular_comodule(model, D):
    """The right regular comodule O(G)_{<=D} (coaction = coproduct)."""
    C = filtration_coalgebra(model.with_cap(max(model.cap, D)), D)
    return Comodule(model.with_cap(max(model.cap, D)), D, C.delta)


def trivial_comodule(model, dim=1, D=0):
    n = model.dim(D)
    rho = np.zeros((dim, dim, n), dtype=np.int64)
    one = model.coords(model.one(), D)
    for a in range(dim):
        rho[a, a] = one
    return Comodule(model.with_cap(max(model.cap, D)), D, rho)


def is_stable(M: Comodule, basis):
    """Whether span(basis) is a subcomodule."""
    W = row_basis(basis, M.field, M.dim)
    for w in W:
        if not contains(W, M.coaction(w).T, M.field):
            return False
    return True


def restrict(M: Comodule, basis):
    """The subcomodule spanned by ``basis`` (any spanning set) as a comodule."""
    F = M.field
    W = row_basis(basis, F, M.dim)
    piv = pivots_of(W)
    k = W.shape[0]
    rho = np.zeros((k, k, M.ambient_dim), dtype=np.int64)
    for i, w in enumerate(W):
        R = M.coaction(w)
        coeffs = R[piv, :]
        if not np.array_equal(matmul(W.T, coeffs, F) if k else np.zeros_like(R), R):
            raise ValidationError("span is not stable under the coaction")
        rho[i] = coeffs
    return Comodule(M.model, M.D, rho)


def _coaction_constraints(M: Comodule, AV, AX):
    """Matrix whose left kernel is {v : AV R(v) = 0 and R(v) AX^T = 0}."""
    F = M.field
    m = M.dim
    blocks = []
    if AV.shape[0]:
        C1 = fdot(M.rho, AV, ([1], [1]), F)  # (a, j, s)
        blocks.append(C1.reshape(m, -1))
    if AX.shape[0]:
        C2 = fdot(M.rho, AX, ([2], [1]), F)  # (a, b, t)
        blocks.append(C2.reshape(m, -1))
    if not blocks:
        return np.zeros((m, 0), dtype=np.int64)
    return np.hstack(blocks)


def largest_subcomodule(M: Comodule, X=None, within=None):
    """Greatest fixed point of V -> {v in V : Delta_M(v) ∈ V ⊗ X}.

    ``X=None`` means all of O(G)_{<=D}; ``within`` restricts the starting space,
    so ``largest_subcomodule(M, within=V)`` is the largest subcomodule inside V.
    """
    F = M.field
    n = M.ambient_dim
    if X is None:
        AX = np.zeros((0, n), dtype=np.int64)
    else:
        Xb = X.basis if isinstance(X, SubspaceInAmbient) else row_basis(as_matrix(X, n), F, n)
        AX = annihilator(Xb, F, n)
    V = np.eye(M.dim, dtype=np.int64) if within is None else row_basis(as_matrix(within, M.dim), F, M.dim)
    while True:
        AV = annihilator(V, F, M.dim) if V.shape[0] < M.dim else np.zeros((0, M.dim), dtype=np.int64)
        C = _coaction_constraints(M, AV, AX)
        if V.shape[0] == 0:
            return Submodule(M, V)
        Y = left_kernel_basis(matmul(V, C, F), F) if C.shape[1] else np.eye(V.shape[0], dtype=np.int64)
        W = row_basis(matmul(Y, V, F), F, M.dim) if Y.shape[0] else np.zeros((0, M.dim), dtype=np.int64)
        if W.shape[0] == V.shape[0]:
            return Submodule(M, W)
        V = W


def filtration_piece(M: Comodule, d):
    """M_{<=d} = {v : Delta_M(v) ∈ M ⊗ O(G)_{<=d}}; one step since O(G)_{<=d} is a subcoalgebra."""
    if d < 0:
        return Submodule(M, np.zeros((0, M.dim), dtype=np.int64))
    if d >= M.D:
        return Submodule(M, np.eye(M.dim, dtype=np.int64))
    F = M.field
    X = filtration_subspace(M.model.with_cap(max(M.model.cap, M.D)), d, M.D)
    AX = annihilator(X.basis, F, M.ambient_dim)
    C = _coaction_constraints(M, np.zeros((0, M.dim), dtype=np.int64), AX)
    K = left_kernel_basis(C, F)
    return Submodule(M, row_basis(K, F, M.dim) if K.shape[0] else np.zeros((0, M.dim), dtype=np.int64))


def socle_invariants(M: Comodule):
    if not M.model.unipotent:
        raise UnsupportedModelError("socle equals invariants only for unipotent groups")
    return filtration_piece(M, 0)


def _product_table(model, D1, D2, D):
    """P[j, k] = coordinates of c_j * c_k in basis(D)."""
    b1 = model.basis(D1)
    b2 = model.basis(D2)
    n = model.dim(D)
    P = np.zeros((len(b1), len(b2), n), dtype=np.int64)
    for j, x in enumerate(b1):
        for k, y in enumerate(b2):
            P[j, k] = model.coords(model.element(model._mul_terms(x.terms, y.terms)), D)
    return P


def tensor(M: Comodule, N: Comodule):
    if not M.model.same_algebra(N.model):
        raise ValidationError("tensor needs comodules over the same model")
    D = M.D + N.D
    cap = max(M.model.cap, N.model.cap)
    if D > cap:
        raise CapOverflowError(f"tensor needs degree {D} > cap {cap}")
    model = M.model.with_cap(cap)
    F = M.field
    P = _product_table(model, M.D, N.D, D)
    # rho[(a,c),(b,d),J] = sum_{j,k} rhoM[a,b,j] rhoN[c,d,k] P[j,k,J]
    t = fdot(N.rho, P, ([2], [1]), F)          # (c, d, j, J)
    t = fdot(M.rho, t, ([2], [2]), F)          # (a, b, c, d, J)
    t = np.transpose(t, (0, 2, 1, 3, 4))
    m = M.dim * N.dim
    return Comodule(model, D, t.reshape(m, m, -1))


def frobenius_twist(M: Comodule, r):
    q = M.model.p ** r
    D = q * M.D
    if D > M.model.cap:
        raise CapOverflowError(f"Frobenius twist needs degree {D} > cap {M.model.cap}")
    model = M.model
    T = np.stack([model.coords(model.frobenius_pullback(r, c), D) for c in model.basis(M.D)])
    return Comodule(model, D, fdot(M.rho, T, ([2], [0]), M.field))


def _embedding(model, d, D):
    """Matrix sending basis(d) coordinates to basis(D) coordinates."""
    return np.stack([model.coords(c, D) for c in model.basis(d)]) if model.dim(d) else \
        np.zeros((0, model.dim(D)), dtype=np.int64)


def raise_degree(M: Comodule, D):
    """The same comodule with coaction viewed inside O(G)_{<=D}, D >= M.D."""
    if D == M.D:
        return M
    if D < M.D:
        raise ValidationError("can only enlarge the ambient piece")
    model = M.model.with_cap(max(M.model.cap, D))
    E = _embedding(model, M.D, D)
    return Comodule(model, D, fdot(M.rho, E, ([2], [0]), M.field))


def hom_space(M: Comodule, N: Comodule):
    """Basis of comodule maps M -> N as dim(N) x dim(M) matrices (echelon in vec form)."""
    if not M.model.same_algebra(N.model):
        raise ValidationError("hom_space needs comodules over the same model")
    D = max(M.D, N.D)
    M = raise_degree(M, D)
    N = raise_degree(N, D)
    F = M.field
    m, k, n = M.dim, N.dim, M.ambient_dim
    if m == 0 or k == 0:
        return np.zeros((0, k, m), dtype=np.int64)
    # unknown f[c, b]; equations indexed (a, c, j)
    E1 = np.einsum("abj,cd->acjdb", M.rho, np.eye(k, dtype=np.int64))
    E2 = np.einsum("bcj,ae->acjbe", N.rho, np.eye(m, dtype=np.int64))
    A = F.sub(E1.reshape(m * k * n, k * m), E2.reshape(m * k * n, k * m))
    K = kernel_basis(A, F)
    K = row_basis(K, F, k * m) if K.shape[0] else K
    return K.reshape(-1, k, m)


def quotient(M: Comodule, S):
    """M / S on the complement of S's echelon pivots."""
    F = M.field
    W = S.basis if isinstance(S, Submodule) else row_basis(S, F, M.dim)
    if not is_stable(M, W):
        raise ValidationError("S is not a subcomodule")
    piv = pivots_of(W)
    comp = complement_pivots(piv, M.dim)
    k = len(comp)
    rho = np.zeros((k, k, M.ambient_dim), dtype=np.int64)
    for i, a in enumerate(comp):
        R = M.rho[a]  # (b, j)
        if W.shape[0]:
            R = F.sub(R, matmul(W.T, R[piv, :], F))
        rho[i] = R[comp, :]
    return Comodule(M.model, M.D, rho), comp


def quotient_map(M: Comodule, S, v):
    """Image of the vector v in quotient(M, S) coordinates."""
    F = M.field
    W = S.basis if isinstance(S, Submodule) else row_basis(S, F, M.dim)
    piv = pivots_of(W)
    comp = complement_pivots(piv, M.dim)
    v = np.asarray(v, dtype=np.int64)
    if W.shape[0]:
        v = F.sub(v, matmul(v[piv].reshape(1, -1), W, F).ravel())
    return v[comp]


# G_a operator modules ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaOperatorModule:
    p: int
    dim: int
    psi: tuple

    @classmethod
    def of(cls, p, psi, dim=None):
        psi = tuple(np.asarray(a, dtype=np.int64) % p for a in psi)
        if dim is None:
            if not psi:
                raise ValidationError("dim is required when there are no operators")
            dim = psi[0].shape[0]
        return cls(p, dim, psi).validate()

    def validate(self):
        F = as_field(self.p)
        for i, a in enumerate(self.psi):
            if a.shape != (self.dim, self.dim):
                raise ValidationError("operators must be square of equal size")
            P = np.eye(self.dim, dtype=np.int64)
            for _ in range(self.p):
                P = matmul(P, a, F)
            if np.any(P):
                raise ValidationError(f"psi_{i} is not p-nilpotent")
        for a, b in itertools.combinations(self.psi, 2):
            if not np.array_equal(matmul(a, b, F), matmul(b, a, F)):
                raise ValidationError("operators do not commute")
        return self

    def to_json(self):
        out = {"p": self.p, "psi": [a.tolist() for a in self.psi]}
        if not self.psi:
            out["dim"] = self.dim
        return out

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or not {"p", "psi"} <= set(obj) or set(obj) - {"p", "psi", "dim"}:
            raise ValidationError("operator module JSON needs p and psi (and dim if psi is empty)")
        return cls.of(obj["p"], obj["psi"], obj.get("dim"))


def _divided_power_ops(op: GaOperatorModule):
    """(n, Psi_n) for every nonzero Psi_n = prod psi_i^{n_i} / n_i!."""
    F = as_field(op.p)
    p = op.p
    m = op.dim
    powers = []
    for a in op.psi:
        pw = [np.eye(m, dtype=np.int64)]
        for _ in range(p - 1):
            pw.append(matmul(pw[-1], a, F))
        powers.append(pw)
    out = []
    for digits in itertools.product(range(p), repeat=len(op.psi)):
        P = np.eye(m, dtype=np.int64)
        denom = 1
        for i, k in enumerate(digits):
            if k:
                P = matmul(P, powers[i][k], F)
                denom = denom * factorial(k) % p
        if np.any(P):
            P = (P * pow(denom, p - 2, p)) % p
            out.append((sum(k * p ** i for i, k in enumerate(digits)), P))
    return out


def comodule_from_operators(op: GaOperatorModule, D, model=None):
    op.validate()
    model = model or make_model("Ga", op.p, D)
    if model.kind != "Ga" or model.p != op.p:
        raise ValidationError("operator modules live over G_a in the same characteristic")
    m = op.dim
    rho = np.zeros((m, m, D + 1), dtype=np.int64)
    for n, P in _divided_power_ops(op):
        if n > D:
            raise CapOverflowError(f"coaction has a t^{n} term beyond D={D}")
        rho[:, :, n] = P.T
    return Comodule(model.with_cap(max(model.cap, D)), D, rho)


def operators_from_comodule(M: Comodule):
    if M.model.kind != "Ga":
        raise UnsupportedModelError("operator extraction is for G_a comodules")
    p = M.model.p
    ops = []
    i = 0
    while p ** i <= M.D:
        ops.append(M.rho[:, :, p ** i].T.copy())
        i += 1
    op = GaOperatorModule.of(p, ops, M.dim)
    back = comodule_from_operators(op, M.D, M.model)
    if not np.array_equal(back.rho, M.rho):
        raise ValidationError("coaction is not determined by its divided-power operators")
    return op
