"""Exact linear algebra over prime fields and their small extensions.

Field elements are encoded as integers in ``range(q)``.  For ``m == 1`` the
code is the residue itself; for ``m > 1`` it is the base-``p`` number whose
digits are the coefficients (lowest degree first) of the polynomial
representative modulo the chosen irreducible modulus.

Matrices are plain ``numpy`` integer arrays of codes.  All spans are kept in
reduced row echelon form, so equal subspaces have equal bases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ValidationError

Rational = Fraction

# Conway polynomials, coefficients lowest degree first (monic).
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (5, 4): (2, 4, 4, 0, 1),
    (7, 2): (3, 6, 1),
    (7, 3): (4, 0, 6, 1),
    (7, 4): (3, 4, 5, 0, 1),
}


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _poly_mod(a, b, p):
    """Remainder of ``a`` by monic ``b`` over F_p, lists lowest degree first."""
    a = list(a)
    db = len(b) - 1
    while len(a) - 1 >= db and any(a):
        while a and a[-1] % p == 0:
            a.pop()
        if len(a) - 1 < db:
            break
        c = a[-1] % p
        shift = len(a) - 1 - db
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a.pop()
    return [x % p for x in a]


def is_irreducible(modulus, p):
    """Trial factorization by every monic polynomial of degree <= m/2."""
    m = len(modulus) - 1
    if m < 1 or modulus[-1] % p != 1:
        return False
    for deg in range(1, m // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if not any(_poly_mod(modulus, list(low) + [1], p)):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The finite field F_{p^m}; ``modulus`` lists coefficients lowest first."""

    p: int
    m: int = 1
    modulus: tuple = dc_field(default=())

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValidationError(f"p={self.p!r} is not prime")
        if not isinstance(self.m, int) or self.m < 1:
            raise ValidationError(f"extension degree m={self.m!r} must be >= 1")
        if self.m == 1:
            if self.modulus:
                raise ValidationError("a prime field takes no modulus")
            return
        mod = tuple(int(c) % self.p for c in self.modulus)
        if not mod:
            if (self.p, self.m) not in DEFAULT_MODULI:
                raise ValidationError(f"no default modulus for F_{self.p}^{self.m}; pass one")
            mod = DEFAULT_MODULI[(self.p, self.m)]
        if len(mod) != self.m + 1 or not is_irreducible(mod, self.p):
            raise ValidationError(f"modulus {mod} is not a monic irreducible of degree {self.m}")
        object.__setattr__(self, "modulus", mod)

    @property
    def q(self):
        return self.p ** self.m


class Field:
    """Vectorized arithmetic on integer codes of F_{p^m}."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.p = spec.p
        self.m = spec.m
        self.q = spec.q
        if self.m > 1:
            self._build_tables()

    def __repr__(self):
        return f"Field(F_{self.p}" + (f"^{self.m})" if self.m > 1 else ")")

    def __eq__(self, other):
        return isinstance(other, Field) and other.spec == self.spec

    def __hash__(self):
        return hash(self.spec)

    def _build_tables(self):
        p, m, q = self.p, self.m, self.q
        codes = np.arange(q)
        self._pw = p ** np.arange(m)
        self._digits = (codes[:, None] // self._pw[None, :]) % p
        mod = self.spec.modulus

        def mulpoly(a, b):
            prod = [0] * (2 * m - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        prod[i + j] = (prod[i + j] + x * y) % p
            r = _poly_mod(prod, mod, p)
            return r + [0] * (m - len(r))

        def code(poly):
            return int(sum(c * p ** i for i, c in enumerate(poly)))

        for g in range(2, q):
            gpoly = [int(x) for x in self._digits[g]]
            exp = [1]
            cur = [1] + [0] * (m - 1)
            for _ in range(q - 2):
                cur = mulpoly(cur, gpoly)
                c = code(cur)
                if c == 1:
                    break
                exp.append(c)
            if len(exp) == q - 1:
                break
        else:  # pragma: no cover - a finite field always has a generator
            raise ValidationError("no multiplicative generator found")
        self._exp = np.array(exp + exp, dtype=np.int64)
        self._log = np.zeros(q, dtype=np.int64)
        self._log[np.array(exp)] = np.arange(q - 1)

    # scalar and array arithmetic -------------------------------------------------
    def add(self, a, b):
        if self.m == 1:
            return (np.asarray(a) + b) % self.p
        s = (self._digits[np.asarray(a)] + self._digits[np.asarray(b)]) % self.p
        return s @ self._pw

    def neg(self, a):
        if self.m == 1:
            return (-np.asarray(a)) % self.p
        return ((-self._digits[np.asarray(a)]) % self.p) @ self._pw

    def sub(self, a, b):
        if self.m == 1:
            return (np.asarray(a) - b) % self.p
        s = (self._digits[np.asarray(a)] - self._digits[np.asarray(b)]) % self.p
        return s @ self._pw

    def mul(self, a, b):
        if self.m == 1:
            return (np.asarray(a) * b) % self.p
        a = np.asarray(a)
        b = np.asarray(b)
        out = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        if self.m == 1:
            return np.asarray(pow_mod_array(a, self.p - 2, self.p))
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def pow(self, a, n):
        a = int(a)
        if n == 0:
            return 1
        if a == 0:
            return 0
        if self.m == 1:
            return pow(a, n, self.p)
        return int(self._exp[(int(self._log[a]) * n) % (self.q - 1)])

    def from_int(self, n):
        """Image of the integer ``n`` under Z -> F_p inside this field."""
        return int(n) % self.p

    def scalar(self, x):
        """Coerce ``x`` (int code or string) into a valid code."""
        if isinstance(x, str):
            x = int(x)
        x = int(x)
        if self.m == 1:
            return x % self.p
        if not 0 <= x < self.q:
            raise ValidationError(f"{x} is not a code of {self!r}")
        return x

    def frobenius(self, a):
        """a -> a^p, the arithmetic Frobenius."""
        if self.m == 1:
            return np.asarray(a) % self.p
        a = np.asarray(a)
        return np.where(a == 0, 0, self._exp[(self._log[a] * self.p) % (self.q - 1)])

    # python-int fast paths used by the sparse polynomial code
    def sadd(self, a, b):
        if self.m == 1:
            return (a + b) % self.p
        return int(self.add(a, b))

    def ssub(self, a, b):
        if self.m == 1:
            return (a - b) % self.p
        return int(self.sub(a, b))

    def smul(self, a, b):
        if self.m == 1:
            return (a * b) % self.p
        if a == 0 or b == 0:
            return 0
        return int(self._exp[self._log[a] + self._log[b]])

    def sneg(self, a):
        if self.m == 1:
            return (-a) % self.p
        return int(self.neg(a))

    def sinv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.m == 1:
            return pow(a, self.p - 2, self.p)
        return int(self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)])

    def elements(self):
        return range(self.q)

    def subfield_codes(self):
        """Codes of the prime field F_p inside this field."""
        return list(range(self.p))


def pow_mod_array(a, e, p):
    out = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            out = (out * base) % p
        base = (base * base) % p
        e >>= 1
    return out


@lru_cache(maxsize=None)
def get_field(p, m=1, modulus=()):
    return Field(FieldSpec(p, m, tuple(modulus)))


def as_field(f):
    if isinstance(f, Field):
        return f
    if isinstance(f, FieldSpec):
        return get_field(f.p, f.m, f.modulus if f.m > 1 else ())
    if isinstance(f, int):
        return get_field(f)
    raise ValidationError(f"cannot interpret {f!r} as a field")


# matrices ---------------------------------------------------------------------

def as_matrix(A, cols=None):
    A = np.asarray(A, dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else np.zeros((0, cols or 0), dtype=np.int64)
    if A.ndim != 2:
        raise ValidationError("expected a 2-dimensional array")
    return A


def _rref_gf2(A):
    rows, cols = A.shape
    if rows == 0 or cols == 0:
        return A.copy(), []
    words = (cols + 63) // 64
    packed = np.packbits(A.astype(np.uint8), axis=1, bitorder="little")
    buf = np.zeros((rows, words * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    M = buf.view(np.uint64).copy()
    one = np.uint64(1)
    r = 0
    pivots = []
    for c in range(cols):
        w = c // 64
        b = np.uint64(c % 64)
        colbits = (M[r:, w] >> b) & one
        nz = np.flatnonzero(colbits)
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            M[[r, i]] = M[[i, r]]
        hit = ((M[:, w] >> b) & one).astype(bool)
        hit[r] = False
        if hit.any():
            M[hit] ^= M[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    out = np.unpackbits(M.view(np.uint8), axis=1, bitorder="little")[:, :cols]
    return out.astype(np.int64), pivots


def rref(A, F):
    """Reduced row echelon form.  Returns ``(R, pivots)``; ``R`` keeps all rows."""
    F = as_field(F)
    A = as_matrix(A)
    if F.q == 2:
        return _rref_gf2(A % 2)
    R = A.copy()
    rows, cols = R.shape
    r = 0
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            R[[r, i]] = R[[i, r]]
        piv = R[r, c]
        if piv != 1:
            R[r] = F.mul(R[r], F.inv(piv))
        colv = R[:, c].copy()
        colv[r] = 0
        hit = np.flatnonzero(colv)
        if hit.size:
            if F.m == 1:
                R[hit] = (R[hit] - np.outer(colv[hit], R[r])) % F.p
            else:
                R[hit] = F.sub(R[hit], F.mul(colv[hit][:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A, F):
    A = as_matrix(A)
    if A.size == 0:
        return 0
    return len(rref(A, F)[1])


def row_basis(vectors, F, cols=None):
    """Reduced echelon basis (nonzero rows only) of the span of ``vectors``."""
    A = as_matrix(vectors, cols)
    if A.shape[0] == 0:
        return np.zeros((0, A.shape[1] if cols is None else cols), dtype=np.int64)
    R, piv = rref(A, F)
    return R[: len(piv)]


def pivots_of(basis):
    """Pivot columns of a matrix already in reduced echelon form."""
    out = []
    for row in np.asarray(basis):
        nz = np.flatnonzero(row)
        out.append(int(nz[0]))
    return out


def kernel_basis(A, F):
    """Basis of the right null space {v : A v = 0}, one vector per row."""
    F = as_field(F)
    A = as_matrix(A)
    rows, cols = A.shape
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    R, piv = rref(A, F)
    pivset = set(piv)
    free = [c for c in range(cols) if c not in pivset]
    K = np.zeros((len(free), cols), dtype=np.int64)
    for k, fc in enumerate(free):
        K[k, fc] = 1
        for i, pc in enumerate(piv):
            K[k, pc] = F.neg(R[i, fc])
    return K


def left_kernel_basis(A, F):
    """Basis of {w : w A = 0}."""
    return kernel_basis(as_matrix(A).T, F)


def matmul(A, B, F):
    F = as_field(F)
    A = as_matrix(A)
    B = as_matrix(B)
    if F.m == 1:
        return (A @ B) % F.p
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for k in range(A.shape[1]):
        out = F.add(out, F.mul(A[:, k][:, None], B[k][None, :]))
    return out


def annihilator(basis, F, n):
    """Rows spanning the annihilator of span(basis) in the dual of k^n."""
    B = as_matrix(basis, n)
    if B.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    return kernel_basis(B, F)


def intersect_subspaces(U, V, F, n=None):
    """Reduced echelon basis of span(U) ∩ span(V)."""
    F = as_field(F)
    U = as_matrix(U, n)
    V = as_matrix(V, n)
    if U.shape[0] and V.shape[0] and U.shape[1] != V.shape[1]:
        raise ValidationError("subspaces live in spaces of different dimension")
    width = U.shape[1] if U.shape[0] else V.shape[1]
    if U.shape[0] == 0 or V.shape[0] == 0:
        return np.zeros((0, width), dtype=np.int64)
    # solve a U = b V; the intersection is spanned by a U
    stacked = np.vstack([U, F.neg(V)])
    coeffs = left_kernel_basis(stacked, F)
    if coeffs.shape[0] == 0:
        return np.zeros((0, width), dtype=np.int64)
    vecs = matmul(coeffs[:, : U.shape[0]], U, F)
    return row_basis(vecs, F, width)


def in_span(basis, v, F):
    basis = as_matrix(basis, len(v))
    if basis.shape[0] == 0:
        return not np.any(np.asarray(v))
    return rank(np.vstack([basis, v]), F) == rank(basis, F)


def contains(big, small, F):
    """Whether span(small) ⊆ span(big)."""
    small = as_matrix(small)
    if small.shape[0] == 0:
        return True
    big = as_matrix(big, small.shape[1])
    if big.shape[0] == 0:
        return not np.any(small)
    return rank(np.vstack([big, small]), F) == rank(big, F)


def coords_in_echelon(basis, pivots, v, F):
    """Coordinates of ``v`` in a reduced echelon basis; raises if ``v`` is outside."""
    F = as_field(F)
    v = np.asarray(v, dtype=np.int64)
    c = v[..., pivots] if len(pivots) else np.zeros(v.shape[:-1] + (0,), dtype=np.int64)
    recon = matmul(c.reshape(-1, len(pivots)), basis, F).reshape(v.shape) if len(pivots) else np.zeros_like(v)
    if np.any(recon != v):
        raise ValidationError("vector does not lie in the given span")
    return c


def solve_in_basis(rows, V, F):
    """C with C @ rows = V for linearly independent ``rows``; raises if V leaves the span."""
    F = as_field(F)
    rows = as_matrix(rows)
    V = as_matrix(V, rows.shape[1])
    k = rows.shape[0]
    if k == 0:
        if np.any(V):
            raise ValidationError("vector does not lie in the given span")
        return np.zeros((V.shape[0], 0), dtype=np.int64)
    R, piv = rref(np.hstack([rows.T, V.T]), F)
    if piv[:k] != list(range(k)) or (len(piv) > k):
        raise ValidationError("vector does not lie in the given span (or rows are dependent)")
    return R[:k, k:].T.copy()


def same_span(U, V, F, n=None):
    return np.array_equal(row_basis(U, F, n), row_basis(V, F, n))


def complement_pivots(pivots, n):
    s = set(pivots)
    return [c for c in range(n) if c not in s]


@dataclass(frozen=True)
class Matrix:
    """Dense matrix over a finite field with the elimination routines attached."""

    field: Field
    entries: np.ndarray

    @classmethod
    def of(cls, rows, field):
        F = as_field(field)
        A = as_matrix(rows)
        if F.m == 1:
            A = A % F.p
        elif A.size and (A.min() < 0 or A.max() >= F.q):
            raise ValidationError("entries must be field codes")
        A.setflags(write=False)
        return cls(F, A)

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    def rank(self):
        return rank(self.entries, self.field)

    def kernel_basis(self):
        return [tuple(int(x) for x in v) for v in kernel_basis(self.entries, self.field)]

    def rref(self):
        R, piv = rref(self.entries, self.field)
        return Matrix.of(R, self.field), piv

    def __matmul__(self, other):
        return Matrix.of(matmul(self.entries, other.entries, self.field), self.field)

    def tolist(self):
        return self.entries.tolist()
