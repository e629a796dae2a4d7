"""Filtered coordinate Hopf algebras of G_a, U_N and GL_N.

A monomial is a pair ``(exps, det)`` where ``exps`` is a tuple of exponents
over the model's ordered variables and ``det <= 0`` is the power of the
determinant (always 0 outside GL_N).  An element is a dict from monomials to
nonzero field codes.

For GL_N the algebra is graded by ``deg(exps) + det*N`` and the degree
filtration respects the grading, so canonical form is computed one graded
component at a time: bring the component to a common denominator
``det^e`` and divide by ``det`` while possible.  The filtration degree of a
homogeneous component ``f det^{-e}`` is then ``deg f + e N``.
"""

from __future__ import annotations

import itertools
import json
from functools import lru_cache
from math import comb

import numpy as np

from .errors import CapOverflowError, UnsupportedModelError, ValidationError
from .exactla import Field, as_field

KINDS = ("Ga", "UN", "GLN")
MAX_PIECE_DIM = 200_000


def binom_mod(n, k, p):
    """C(n, k) mod p by Lucas' theorem."""
    if k < 0 or k > n:
        return 0
    out = 1
    while n or k:
        a, b = n % p, k % p
        if b > a:
            return 0
        out = out * comb(a, b) % p
        n //= p
        k //= p
    return out


def p_digits(n, p):
    out = []
    while n:
        out.append(n % p)
        n //= p
    return out


def count_monomials(nvars, d):
    """Number of monomials of total degree <= d in ``nvars`` variables."""
    return comb(nvars + d, nvars)


def monomials_of_degree(nvars, n):
    if nvars == 0:
        return [()] if n == 0 else []
    out = []
    for split in itertools.combinations(range(n + nvars - 1), nvars - 1):
        prev = -1
        e = []
        for s in split:
            e.append(s - prev - 1)
            prev = s
        e.append(n + nvars - 1 - prev - 1)
        out.append(tuple(e))
    out.sort(reverse=True)
    return out


# sparse polynomial helpers on {exps: coeff} ----------------------------------

def _poly_mul(a, b, F):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = F.sadd(out.get(e, 0), F.smul(ca, cb))
            if c:
                out[e] = c
            else:
                out.pop(e, None)
    return out


def _poly_add_into(out, a, F, scale=1):
    for e, c in a.items():
        v = F.sadd(out.get(e, 0), F.smul(c, scale))
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _poly_pow(a, k, F, nv):
    out = {(0,) * nv: 1}
    base = a
    while k:
        if k & 1:
            out = _poly_mul(out, base, F)
        k >>= 1
        if k:
            base = _poly_mul(base, base, F)
    return out


class HopfElement:
    """An element of a model's Hopf algebra.  Treat as immutable."""

    __slots__ = ("model", "terms", "_hash")

    def __init__(self, model, terms):
        self.model = model
        self.terms = terms
        self._hash = None

    def __eq__(self, other):
        if isinstance(other, HopfElement):
            return (self.model is other.model or self.model.same_algebra(other.model)) \
                and self.terms == other.terms
        if isinstance(other, int):
            return self == self.model.constant(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        return self.model.add(self, self.model.coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.model.add(self, self.model.negate(self.model.coerce(other)))

    def __rsub__(self, other):
        return self.model.add(self.model.coerce(other), self.model.negate(self))

    def __neg__(self):
        return self.model.negate(self)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.model.scale(self, self.model.F.from_int(other))
        return self.model.product(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k):
        out = self.model.one()
        for _ in range(k):
            out = self.model.product(out, self)
        return out

    def __repr__(self):
        return f"HopfElement({self.model.format(self)})"

    def __str__(self):
        return self.model.format(self)


class FilteredHopfModel:
    """O(G) for G in {G_a, U_N, GL_N} with its degree filtration."""

    def __init__(self, kind, field, cap, N=None):
        if kind not in KINDS:
            raise UnsupportedModelError(f"unknown model kind {kind!r}; expected one of {KINDS}")
        if not isinstance(cap, int) or cap < 0:
            raise ValidationError("cap must be a nonnegative integer")
        self.kind = kind
        self.F: Field = as_field(field)
        self.p = self.F.p
        self.cap = cap
        if kind == "Ga":
            if N not in (None, 1):
                raise ValidationError("G_a takes no N")
            self.N = 1
            self.vars = ["t"]
        else:
            if not isinstance(N, int) or N < 2:
                raise ValidationError("U_N and GL_N need N >= 2")
            self.N = N
            if kind == "UN":
                self.vars = [f"y_{i}_{j}" for i in range(1, N + 1) for j in range(i + 1, N + 1)]
            else:
                self.vars = [f"x_{i}_{j}" for i in range(1, N + 1) for j in range(1, N + 1)]
        self.nv = len(self.vars)
        self.var_index = {v: i for i, v in enumerate(self.vars)}
        self._zero_exps = (0,) * self.nv
        if kind == "GLN":
            self._det_poly = self._build_det()
            self._det_lead = max(self._det_poly)
        if self.dim(cap) > MAX_PIECE_DIM:
            raise ValidationError(f"cap {cap} exceeds the memory budget for {self.name}")
        self._delta_cache = {}

    # identity --------------------------------------------------------------
    @property
    def name(self):
        return "Ga" if self.kind == "Ga" else f"{self.kind[:-1]}{self.N}" if self.kind == "UN" else f"GL{self.N}"

    @property
    def unipotent(self):
        return self.kind in ("Ga", "UN")

    def describe(self):
        d = {"kind": self.kind, "p": self.p, "cap": self.cap}
        if self.kind != "Ga":
            d["N"] = self.N
        if self.F.m > 1:
            d["field_ext"] = self.F.m
        return d

    def with_cap(self, cap):
        return make_model(self.kind, self.F, cap, None if self.kind == "Ga" else self.N)

    def same_algebra(self, other):
        return self.kind == other.kind and self.N == other.N and self.F == other.F

    # element construction --------------------------------------------------------
    def element(self, terms):
        return HopfElement(self, self._canonical(dict(terms)))

    def zero(self):
        return HopfElement(self, {})

    def one(self):
        return HopfElement(self, {(self._zero_exps, 0): 1})

    def constant(self, c):
        c = self.F.scalar(c)
        return HopfElement(self, {(self._zero_exps, 0): c} if c else {})

    def coerce(self, x):
        if isinstance(x, HopfElement):
            if x.model is not self and not (x.model.same_algebra(self)):
                raise ValidationError("elements from different models")
            return x if x.model is self else HopfElement(self, x.terms)
        if isinstance(x, int):
            c = self.F.from_int(x)
            return HopfElement(self, {(self._zero_exps, 0): c} if c else {})
        raise ValidationError(f"cannot coerce {x!r}")

    def var(self, name, power=1):
        if isinstance(name, tuple):
            name = ("x" if self.kind == "GLN" else "y") + "_%d_%d" % name
        if name not in self.var_index:
            raise ValidationError(f"{name!r} is not a variable of {self.name}")
        e = [0] * self.nv
        e[self.var_index[name]] = power
        return HopfElement(self, {(tuple(e), 0): 1})

    def monomial(self, exps, det=0):
        return HopfElement(self, self._canonical({(tuple(exps), det): 1}))

    def det(self):
        self._need_gl()
        return HopfElement(self, {(k, 0): v for k, v in self._det_poly.items()})

    def det_inverse(self, e=1):
        self._need_gl()
        return HopfElement(self, {(self._zero_exps, -e): 1})

    def _need_gl(self):
        if self.kind != "GLN":
            raise UnsupportedModelError("det is only defined for GL_N")

    def _build_det(self):
        N = self.N
        out = {}
        for perm in itertools.permutations(range(N)):
            sign = 1
            for i in range(N):
                for j in range(i + 1, N):
                    if perm[i] > perm[j]:
                        sign = -sign
            e = [0] * self.nv
            for i in range(N):
                e[i * N + perm[i]] += 1
            out[tuple(e)] = self.F.from_int(sign)
        return out

    # canonical form (GL_N) ----------------------------------------------------------
    def _grading(self, key):
        exps, det = key
        return sum(exps) + det * self.N

    def _divide_det(self, P):
        """Exact quotient P / det, or None if det does not divide P."""
        F = self.F
        P = dict(P)
        Q = {}
        lead = self._det_lead
        lc_inv = F.sinv(self._det_poly[lead])
        while P:
            top = max(P)
            if any(a < b for a, b in zip(top, lead)):
                return None
            qe = tuple(a - b for a, b in zip(top, lead))
            qc = F.smul(P[top], lc_inv)
            Q[qe] = qc
            for de, dc in self._det_poly.items():
                e = tuple(a + b for a, b in zip(qe, de))
                v = F.ssub(P.get(e, 0), F.smul(qc, dc))
                if v:
                    P[e] = v
                else:
                    P.pop(e, None)
        return Q

    def _canonical(self, terms):
        terms = {k: c for k, c in terms.items() if c}
        if self.kind != "GLN" or not terms:
            return terms
        groups = {}
        for key, c in terms.items():
            groups.setdefault(self._grading(key), {})[key] = c
        out = {}
        for g, grp in groups.items():
            e = -min(k[1] for k in grp)
            if e == 0:
                out.update(grp)
                continue
            P = {}
            for (exps, det), c in grp.items():
                shift = e + det
                if shift == 0:
                    _poly_add_into(P, {exps: c}, self.F)
                else:
                    _poly_add_into(P, _poly_mul({exps: c}, self._det_power(shift), self.F), self.F)
            while e > 0 and P:
                Q = self._divide_det(P)
                if Q is None:
                    break
                P = Q
                e -= 1
            for exps, c in P.items():
                out[(exps, -e)] = c
        return out

    @lru_cache(maxsize=64)
    def _det_power(self, k):
        return _poly_pow(self._det_poly, k, self.F, self.nv)

    # ring operations ---------------------------------------------------------------------
    def add(self, f, g):
        out = dict(f.terms)
        F = self.F
        for k, c in g.terms.items():
            v = F.sadd(out.get(k, 0), c)
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        if self.kind == "GLN":
            out = self._canonical(out)
        return HopfElement(self, out)

    def negate(self, f):
        return HopfElement(self, {k: self.F.sneg(v) for k, v in f.terms.items()})

    def scale(self, f, c):
        """Multiply by the field element with code ``c``."""
        c = self.F.scalar(c)
        if c == 0:
            return self.zero()
        return HopfElement(self, {k: self.F.smul(v, c) for k, v in f.terms.items()})

    def _mul_terms(self, a, b):
        F = self.F
        out = {}
        for (ea, da), ca in a.items():
            for (eb, db), cb in b.items():
                k = (tuple(x + y for x, y in zip(ea, eb)), da + db)
                v = F.sadd(out.get(k, 0), F.smul(ca, cb))
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return self._canonical(out) if self.kind == "GLN" else out

    def product(self, f, g):
        f, g = self.coerce(f), self.coerce(g)
        if f and g and self.degree(f) + self.degree(g) > self.cap:
            raise CapOverflowError(
                f"product of degrees {self.degree(f)}+{self.degree(g)} exceeds cap {self.cap}")
        return HopfElement(self, self._mul_terms(f.terms, g.terms))

    def _check_cap(self, f, what):
        if f and self.degree(f) > self.cap:
            raise CapOverflowError(f"{what} has degree {self.degree(f)} > cap {self.cap}")
        return f

    # filtration ----------------------------------------------------------------------------
    def key_degree(self, key):
        exps, det = key
        return sum(exps) - det * self.N

    def degree(self, f):
        if not f.terms:
            raise ValidationError("the zero element has no degree")
        return max(self.key_degree(k) for k in f.terms)

    def dim(self, d):
        """dim O(G)_{<=d}."""
        if d < 0:
            return 0
        if self.kind == "Ga":
            return d + 1
        if self.kind == "UN":
            return count_monomials(self.nv, d)
        return sum(count_monomials(self.nv - 1, n) for n, _ in self._gl_components(d)) if self.nv > 1 else 0

    def _gl_components(self, d):
        """Pairs (n, I): the grading-(n - I N) part of the piece is det^{-I} Poly_n."""
        N = self.N
        out = []
        # n = g + I N <= (g + d) / 2, so components with g < -d are empty
        for g in range(d, -d - 1, -1):
            I = (d - g) // (2 * N)
            n = g + I * N
            if n >= 0:
                out.append((n, I))
        return out

    @lru_cache(maxsize=None)
    def basis_keys(self, d):
        if d < 0:
            return ()
        if self.kind == "Ga":
            return tuple(((i,), 0) for i in range(d + 1))
        if self.kind == "UN":
            out = []
            for n in range(d + 1):
                out.extend((e, 0) for e in monomials_of_degree(self.nv, n))
            return tuple(out)
        out = []
        comps = sorted(self._gl_components(d), key=lambda nI: (nI[0] + nI[1] * self.N, nI[0] - nI[1] * self.N))
        for n, I in comps:
            out.extend((e, -I) for e in monomials_of_degree(self.nv, n))
        return tuple(out)

    def basis(self, d):
        return [HopfElement(self, {k: 1}) for k in self.basis_keys(d)]

    @lru_cache(maxsize=None)
    def _index(self, d):
        return {k: i for i, k in enumerate(self.basis_keys(d))}

    def coords(self, f, d):
        """Coordinate vector of ``f`` in ``basis(d)``; CapOverflowError if f is not in the piece."""
        idx = self._index(d)
        v = np.zeros(len(idx), dtype=np.int64)
        terms = f.terms if isinstance(f, HopfElement) else self._canonical(dict(f))
        if self.kind != "GLN":
            for k, c in terms.items():
                i = idx.get(k)
                if i is None:
                    raise CapOverflowError(f"element of degree {self.key_degree(k)} is outside O(G)_<={d}")
                v[i] = c
            return v
        for key, c in self._lift_terms(terms, d).items():
            i = idx.get(key)
            if i is None:
                raise CapOverflowError("element is outside the requested filtration piece")
            v[i] = self.F.sadd(int(v[i]), c)
        return v

    def _lift_terms(self, terms, d):
        """Rewrite canonical GL terms over the piece's denominators det^{-I(g)}."""
        N = self.N
        out = {}
        for (exps, det), c in terms.items():
            g = sum(exps) + det * N
            if g > d:
                raise CapOverflowError("element is outside the requested filtration piece")
            I = (d - g) // (2 * N)
            shift = I + det
            if shift < 0:
                raise CapOverflowError("element is outside the requested filtration piece")
            if shift == 0:
                out[(exps, -I)] = self.F.sadd(out.get((exps, -I), 0), c)
                continue
            for e, dc in _poly_mul({exps: c}, self._det_power(shift), self.F).items():
                k = (e, -I)
                out[k] = self.F.sadd(out.get(k, 0), dc)
        return {k: c for k, c in out.items() if c}

    def contains(self, f, d):
        try:
            self.coords(f, d)
        except CapOverflowError:
            return False
        return True

    def from_coords(self, v, d):
        keys = self.basis_keys(d)
        return self.element({keys[i]: int(c) for i, c in enumerate(v) if c})

    # Hopf structure ----------------------------------------------------------------------------
    def _var_coproduct(self, i):
        """Δ of the i-th variable as {(keyA, keyB): coeff}."""
        z = self._zero_exps
        F = self.F

        def unit(j):
            e = [0] * self.nv
            e[j] = 1
            return (tuple(e), 0)

        one = (z, 0)
        if self.kind == "Ga":
            return {(unit(0), one): 1, (one, unit(0)): 1}
        name = self.vars[i]
        _, a, b = name.split("_")
        a, b = int(a), int(b)
        if self.kind == "UN":
            out = {(unit(i), one): 1, (one, unit(i)): 1}
            for s in range(a + 1, b):
                out[(unit(self.var_index[f"y_{a}_{s}"]), unit(self.var_index[f"y_{s}_{b}"]))] = 1
            return out
        out = {}
        for s in range(1, self.N + 1):
            out[(unit(self.var_index[f"x_{a}_{s}"]), unit(self.var_index[f"x_{s}_{b}"]))] = F.from_int(1)
        return out

    def _tensor_mul(self, A, B):
        F = self.F
        out = {}
        for (a1, a2), ca in A.items():
            for (b1, b2), cb in B.items():
                k = ((tuple(x + y for x, y in zip(a1[0], b1[0])), a1[1] + b1[1]),
                     (tuple(x + y for x, y in zip(a2[0], b2[0])), a2[1] + b2[1]))
                v = F.sadd(out.get(k, 0), F.smul(ca, cb))
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return out

    def _monomial_coproduct(self, key):
        if key in self._delta_cache:
            return self._delta_cache[key]
        exps, det = key
        z = self._zero_exps
        if self.kind == "Ga":
            n = exps[0]
            out = {}
            for i in range(n + 1):
                c = binom_mod(n, i, self.p)
                if c:
                    out[(((i,), 0), ((n - i,), 0))] = c
        else:
            out = {((z, det), (z, det)): 1}
            # multiply variable by variable, reusing the cache for the prefix
            nz = [i for i, a in enumerate(exps) if a]
            if nz:
                j = nz[-1]
                prev = list(exps)
                prev[j] -= 1
                out = self._tensor_mul(self._monomial_coproduct((tuple(prev), det)), self._var_coproduct(j))
        if len(self._delta_cache) < 200_000:
            self._delta_cache[key] = out
        return out

    def coproduct_terms(self, f):
        F = self.F
        out = {}
        for key, c in f.terms.items():
            for k, v in self._monomial_coproduct(key).items():
                w = F.sadd(out.get(k, 0), F.smul(c, v))
                if w:
                    out[k] = w
                else:
                    out.pop(k, None)
        return out

    def coproduct(self, f):
        f = self.coerce(f)
        self._check_cap(f, "coproduct argument")
        return [(HopfElement(self, {a: c}), HopfElement(self, {b: 1}))
                for (a, b), c in sorted(self.coproduct_terms(f).items())]

    def counit(self, f):
        f = self.coerce(f)
        F = self.F
        out = 0
        for (exps, det), c in f.terms.items():
            if self.kind == "GLN":
                N = self.N
                if all(a == 0 for idx, a in enumerate(exps) if idx // N != idx % N):
                    out = F.sadd(out, c)
            elif not any(exps):
                out = F.sadd(out, c)
        return out

    def counit_key(self, key):
        return self.counit(HopfElement(self, {key: 1}))

    @lru_cache(maxsize=None)
    def _var_antipode(self, i):
        F = self.F
        if self.kind == "Ga":
            return {((1,), 0): F.from_int(-1)}
        N = self.N
        if self.kind == "UN":
            # entries of Y^{-1} = sum_k (-(Y - I))^k
            _, a, b = self.vars[i].split("_")
            a, b = int(a), int(b)
            out = {}
            for path_len in range(1, b - a + 1):
                for mids in itertools.combinations(range(a + 1, b), path_len - 1):
                    chain = (a,) + mids + (b,)
                    e = [0] * self.nv
                    for s, t in zip(chain, chain[1:]):
                        e[self.var_index[f"y_{s}_{t}"]] += 1
                    k = (tuple(e), 0)
                    out[k] = F.sadd(out.get(k, 0), F.from_int((-1) ** path_len))
            return {k: c for k, c in out.items() if c}
        _, a, b = self.vars[i].split("_")
        a, b = int(a) - 1, int(b) - 1
        # cofactor: (-1)^{a+b} det(minor deleting row b, column a) * det^{-1}
        rows = [r for r in range(N) if r != b]
        cols = [c for c in range(N) if c != a]
        out = {}
        for perm in itertools.permutations(range(N - 1)):
            sign = 1
            for x in range(N - 1):
                for y in range(x + 1, N - 1):
                    if perm[x] > perm[y]:
                        sign = -sign
            e = [0] * self.nv
            for x in range(N - 1):
                e[rows[x] * N + cols[perm[x]]] += 1
            k = (tuple(e), -1)
            out[k] = F.sadd(out.get(k, 0), F.from_int(sign * (-1) ** (a + b)))
        return self._canonical(out)

    def antipode(self, f):
        f = self.coerce(f)
        out = {}
        for (exps, det), c in f.terms.items():
            term = {(self._zero_exps, 0): c}
            if det:
                term = self._mul_terms(term, {(k, 0): v for k, v in self._det_power(-det).items()})
            for i, a in enumerate(exps):
                for _ in range(a):
                    term = self._mul_terms(term, self._var_antipode(i))
            for k, v in term.items():
                w = self.F.sadd(out.get(k, 0), v)
                if w:
                    out[k] = w
                else:
                    out.pop(k, None)
        return self._check_cap(HopfElement(self, self._canonical(out)), "antipode")

    # Frobenius ----------------------------------------------------------------------------
    def frobenius_quotient(self, r, f):
        if self.kind == "GLN":
            raise UnsupportedModelError("Frobenius kernels of GL_N are out of scope")
        if r < 1:
            raise ValidationError("r must be >= 1")
        q = self.p ** r
        f = self.coerce(f)
        return HopfElement(self, {k: c for k, c in f.terms.items() if all(a < q for a in k[0])})

    def frobenius_pullback(self, r, f):
        """(F^r)^*: every coordinate (and det) raised to the p^r-th power."""
        q = self.p ** r
        f = self.coerce(f)
        out = {}
        for (exps, det), c in f.terms.items():
            out[(tuple(a * q for a in exps), det * q)] = c
        return self._check_cap(HopfElement(self, self._canonical(out)), "Frobenius pullback")

    def lang_pullback(self, r, f):
        """mu o (sigma ⊗ (F^r)^*) o Delta applied to f."""
        if self.kind == "GLN":
            raise UnsupportedModelError("the Lang map is only built for G_a and U_N")
        f = self.coerce(f)
        return self._check_cap(HopfElement(self, self._lang_terms(r, f)), "Lang pullback")

    def _lang_terms(self, r, f):
        q = self.p ** r
        out = {}
        for (a, b), c in self.coproduct_terms(f).items():
            sa = self._antipode_terms(a)
            fb = {(tuple(x * q for x in b[0]), 0): 1}
            for k, v in self._mul_terms(sa, fb).items():
                w = self.F.sadd(out.get(k, 0), self.F.smul(c, v))
                if w:
                    out[k] = w
                else:
                    out.pop(k, None)
        return out

    def _antipode_terms(self, key):
        exps, _ = key
        term = {(self._zero_exps, 0): 1}
        for i, a in enumerate(exps):
            for _ in range(a):
                term = self._mul_terms(term, self._var_antipode(i))
        return term

    @lru_cache(maxsize=None)
    def lang_generator_images(self, r):
        """L*(v) for each coordinate v, as polynomial dicts {exps: coeff}."""
        if self.kind == "GLN":
            raise UnsupportedModelError("the Lang map is only built for G_a and U_N")
        out = []
        for i in range(self.nv):
            e = [0] * self.nv
            e[i] = 1
            img = self._lang_terms(r, HopfElement(self, {(tuple(e), 0): 1}))
            out.append({k[0]: c for k, c in img.items()})
        return tuple(out)

    # serialization ----------------------------------------------------------------------------
    def format(self, f):
        if not f.terms:
            return "0"
        parts = []
        for (exps, det), c in sorted(f.terms.items(), key=lambda kc: (-self.key_degree(kc[0]), kc[0])):
            mon = "*".join(f"{v}^{a}" if a > 1 else v for v, a in zip(self.vars, exps) if a)
            if det:
                mon = (mon + "*" if mon else "") + f"det^{det}"
            if not mon:
                parts.append(str(c))
            else:
                parts.append(mon if c == 1 else f"{c}*{mon}")
        return " + ".join(parts)

    def to_json(self, f):
        terms = []
        for (exps, det), c in sorted(f.terms.items()):
            terms.append({
                "exps": {v: a for v, a in zip(self.vars, exps) if a},
                "det": det,
                "coeff": str(c),
            })
        return {"terms": terms}

    def from_json(self, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or set(obj) != {"terms"}:
            raise ValidationError("element JSON must be an object with exactly the key 'terms'")
        out = {}
        for t in obj["terms"]:
            if set(t) - {"exps", "det", "coeff"}:
                raise ValidationError(f"unknown fields in term {t}")
            e = [0] * self.nv
            for v, a in t.get("exps", {}).items():
                if v not in self.var_index:
                    raise ValidationError(f"unknown variable {v!r} for {self.name}")
                if not isinstance(a, int) or a < 0:
                    raise ValidationError("exponents must be nonnegative integers")
                e[self.var_index[v]] = a
            det = t.get("det", 0)
            if not isinstance(det, int) or det > 0 or (det and self.kind != "GLN"):
                raise ValidationError("det power must be a nonpositive integer (GL_N only)")
            c = self.F.scalar(t.get("coeff", "1"))
            k = (tuple(e), det)
            out[k] = self.F.sadd(out.get(k, 0), c)
        return self.element(out)


@lru_cache(maxsize=None)
def _cached_model(kind, spec, cap, N):
    return FilteredHopfModel(kind, spec, cap, N)


def make_model(kind, field, cap, N=None):
    """Build (or reuse) the filtered Hopf model of the given kind."""
    F = as_field(field)
    if kind in ("UN", "GLN") and not isinstance(N, int):
        raise ValidationError(f"{kind} requires an integer N >= 2")
    return _cached_model(kind, F.spec, cap, None if kind == "Ga" else N)


def phi_star(source, target, f):
    """Restriction O(GL_N) -> O(U_N) (or O(G_a) when N = 2) along the unitriangular embedding."""
    if source.kind != "GLN":
        raise ValidationError("phi_star starts from a GL_N model")
    N = source.N
    if target.kind == "Ga":
        if N != 2:
            raise ValidationError("G_a sits in GL_2")
        names = {"x_1_2": "t"}
    elif target.kind == "UN" and target.N == N:
        names = {f"x_{i}_{j}": f"y_{i}_{j}" for i in range(1, N + 1) for j in range(i + 1, N + 1)}
    else:
        raise ValidationError("target must be U_N (same N) or G_a")
    F = target.F
    out = {}
    for (exps, det), c in f.terms.items():
        e = [0] * target.nv
        dead = False
        for v, a in zip(source.vars, exps):
            if not a:
                continue
            _, i, j = v.split("_")
            if int(i) > int(j):
                dead = True
                break
            if v in names:
                e[target.var_index[names[v]]] += a
        if dead:
            continue
        k = (tuple(e), 0)
        out[k] = F.sadd(out.get(k, 0), c)
    return target.element(out)
