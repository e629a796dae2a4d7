"""Finite-dimensional coalgebras cut out of filtration pieces."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CrossCheckError, NotCoalgebraMapError, ValidationError
from .exactla import Field, as_field, as_matrix, contains, matmul, pivots_of, row_basis


def contract(v, T, F):
    """sum_i v_i T[i] over the field (T has the summed index first)."""
    v = np.asarray(v, dtype=np.int64)
    if F.m == 1:
        return np.tensordot(v, T, axes=1) % F.p
    out = np.zeros(T.shape[1:], dtype=np.int64)
    for i in np.flatnonzero(v):
        out = F.add(out, F.mul(int(v[i]), T[i]))
    return out


@dataclass(frozen=True, eq=False)
class FiniteCoalgebra:
    """Delta(c_i) = sum_{j,k} delta[i, j, k] c_j ⊗ c_k and eps(c_i) = counit[i]."""

    field: Field
    delta: np.ndarray
    counit: np.ndarray
    labels: tuple = ()

    @property
    def dim(self):
        return self.delta.shape[0]

    def coproduct_matrix(self, v):
        return contract(v, self.delta, self.field)

    def check(self):
        """Verify counit and coassociativity exactly; raises CrossCheckError."""
        F = self.field
        n = self.dim
        eye = np.eye(n, dtype=np.int64)
        left = contract(self.counit, np.transpose(self.delta, (1, 0, 2)), F)
        right = contract(self.counit, np.transpose(self.delta, (2, 0, 1)), F)
        if not (np.array_equal(left, eye) and np.array_equal(right, eye)):
            raise CrossCheckError("counit identity fails")
        mu = self.delta
        for i in range(n):
            t1 = np.zeros((n, n, n), dtype=np.int64)
            t2 = np.zeros((n, n, n), dtype=np.int64)
            for j, k in zip(*np.nonzero(mu[i])):
                c = int(mu[i, j, k])
                t1[:, :, k] = F.add(t1[:, :, k], F.mul(c, mu[j]))
                t2[j, :, :] = F.add(t2[j, :, :], F.mul(c, mu[k]))
            if not np.array_equal(t1, t2):
                raise CrossCheckError(f"coassociativity fails at basis element {i}")
        return True

    def is_subcoalgebra(self, basis):
        """Whether span(basis) is closed under Delta."""
        W = row_basis(basis, self.field, self.dim)
        for w in W:
            M = self.coproduct_matrix(w)
            if not (contains(W, M.T, self.field) and contains(W, M, self.field)):
                return False
        return True

    def to_json(self):
        i, j, k = np.nonzero(self.delta)
        return {
            "dim": int(self.dim),
            "delta": [[int(a), int(b), int(c), str(int(self.delta[a, b, c]))] for a, b, c in zip(i, j, k)],
            "counit": [str(int(x)) for x in self.counit],
        }

    @classmethod
    def from_json(cls, obj, field):
        if isinstance(obj, str):
            obj = json.loads(obj)
        F = as_field(field)
        if set(obj) != {"dim", "delta", "counit"}:
            raise ValidationError("coalgebra JSON needs exactly dim, delta, counit")
        n = obj["dim"]
        if not isinstance(n, int) or n < 0 or len(obj["counit"]) != n:
            raise ValidationError("malformed coalgebra dimensions")
        delta = np.zeros((n, n, n), dtype=np.int64)
        for entry in obj["delta"]:
            a, b, c, v = entry
            if not all(isinstance(x, int) and 0 <= x < n for x in (a, b, c)):
                raise ValidationError(f"index out of range in {entry}")
            delta[a, b, c] = F.scalar(v)
        counit = np.array([F.scalar(x) for x in obj["counit"]], dtype=np.int64)
        C = cls(F, delta, counit)
        C.check()
        return C


@dataclass(frozen=True, eq=False)
class SubspaceInAmbient:
    """A subspace of k^n held in reduced echelon form."""

    field: Field
    n: int
    basis: np.ndarray

    @classmethod
    def span(cls, vectors, field, n):
        F = as_field(field)
        return cls(F, n, row_basis(as_matrix(vectors, n), F, n))

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def pivots(self):
        return pivots_of(self.basis)

    def __eq__(self, other):
        return isinstance(other, SubspaceInAmbient) and self.n == other.n \
            and np.array_equal(self.basis, other.basis)

    def __hash__(self):
        return hash((self.n, self.basis.tobytes()))

    def __le__(self, other):
        return contains(other.basis, self.basis, self.field)


def _check_cap(model, d):
    if d > model.cap:
        from .errors import CapOverflowError
        raise CapOverflowError(f"requested degree {d} exceeds model cap {model.cap}")


@lru_cache(maxsize=64)
def filtration_coalgebra(model, d):
    """The coalgebra O(G)_{<=d} in the model's basis order."""
    _check_cap(model, d)
    keys = model.basis_keys(d)
    idx = model._index(d)
    n = len(keys)
    F = model.F
    delta = np.zeros((n, n, n), dtype=np.int64)
    for i, key in enumerate(keys):
        for (a, b), c in model._monomial_coproduct(key).items():
            ja = idx.get(a)
            jb = idx.get(b)
            if ja is None or jb is None:
                raise CrossCheckError(f"coproduct of a degree-{d} basis element leaves the piece")
            delta[i, ja, jb] = c
    counit = np.array([model.counit_key(k) for k in keys], dtype=np.int64)
    return FiniteCoalgebra(F, delta, counit, tuple(keys))


@lru_cache(maxsize=32)
def kernel_coalgebra(model, r):
    """O(G_{(r)}) = O(G)/(v^{p^r}) for G_a and U_N, on truncated monomials."""
    if model.kind == "GLN":
        from .errors import UnsupportedModelError
        raise UnsupportedModelError("Frobenius kernels of GL_N are out of scope")
    q = model.p ** r
    d = (q - 1) * model.nv
    big = model.with_cap(max(model.cap, d))
    keys = [k for k in big.basis_keys(d) if all(a < q for a in k[0])]
    idx = {k: i for i, k in enumerate(keys)}
    n = len(keys)
    delta = np.zeros((n, n, n), dtype=np.int64)
    for i, key in enumerate(keys):
        for (a, b), c in big._monomial_coproduct(key).items():
            if a in idx and b in idx:
                delta[i, idx[a], idx[b]] = c
    counit = np.array([big.counit_key(k) for k in keys], dtype=np.int64)
    return FiniteCoalgebra(model.F, delta, counit, tuple(keys))


def filtration_subspace(model, d, D):
    """O(G)_{<=d} as a subspace of the coordinates of O(G)_{<=D}."""
    if d > D:
        raise ValidationError("need d <= D")
    n = model.dim(D)
    if model.kind != "GLN":
        B = np.zeros((model.dim(d), n), dtype=np.int64)
        B[np.arange(B.shape[0]), np.arange(B.shape[0])] = 1
        return SubspaceInAmbient(model.F, n, B)
    rows = [model.coords(f, D) for f in model.basis(d)]
    return SubspaceInAmbient.span(rows, model.F, n)


def generated_subcoalgebra(ambient: FiniteCoalgebra, X):
    """Smallest subcoalgebra containing span(X): close under both Sweedler slots."""
    F = ambient.field
    n = ambient.dim
    vecs = X.basis if isinstance(X, SubspaceInAmbient) else as_matrix(X, n)
    V = row_basis(vecs, F, n)
    while True:
        pieces = [V]
        for v in V:
            M = ambient.coproduct_matrix(v)
            pieces.append(M.T)
            pieces.append(M)
        W = row_basis(np.vstack(pieces), F, n)
        if W.shape[0] == V.shape[0]:
            return SubspaceInAmbient(F, n, W)
        V = W


def restrict_coalgebra(ambient: FiniteCoalgebra, sub: SubspaceInAmbient):
    """Structure constants of a subcoalgebra in its echelon basis."""
    F = ambient.field
    W = sub.basis
    piv = sub.pivots
    m = W.shape[0]
    delta = np.zeros((m, m, m), dtype=np.int64)
    for i, w in enumerate(W):
        M = ambient.coproduct_matrix(w)
        C = M[np.ix_(piv, piv)]
        if not np.array_equal(matmul(matmul(W.T, C, F), W, F), M):
            raise NotCoalgebraMapError("subspace is not a subcoalgebra")
        delta[i] = C
    counit = matmul(W, ambient.counit.reshape(-1, 1), F).ravel()
    return FiniteCoalgebra(F, delta, counit)


def image_coalgebra(phi, source: FiniteCoalgebra, target: FiniteCoalgebra):
    """Image of a coalgebra map phi (columns = images of source basis) with inherited structure."""
    F = source.field
    phi = as_matrix(phi)
    if phi.shape != (target.dim, source.dim):
        raise ValidationError("phi must be a target_dim x source_dim matrix")
    for i in range(source.dim):
        lhs = matmul(matmul(phi, source.delta[i], F), phi.T, F)
        rhs = target.coproduct_matrix(phi[:, i])
        if not np.array_equal(lhs, rhs):
            raise NotCoalgebraMapError(f"phi does not intertwine coproducts on basis element {i}")
    if not np.array_equal(matmul(target.counit.reshape(1, -1), phi, F).ravel(), source.counit % F.q):
        raise NotCoalgebraMapError("phi does not preserve the counit")
    sub = SubspaceInAmbient.span(phi.T, F, target.dim)
    C = restrict_coalgebra(target, sub)
    C.check()
    return C, sub
