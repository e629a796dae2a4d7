"""Families of filtered comodules: regular, Lang images J_d, quotients and a few controls.

A family hands out finite pieces.  ``piece(D)`` is a comodule over O(G)_{<=D}; for
families living inside k[G] it is M ∩ O(G)_{<=D}, which is exactly the filtration
piece M_{<=D}.  ``truncation(n)`` is the block-complete truncation with n generators
used for Frobenius-kernel restrictions.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial

import numpy as np

from .comodule import (Comodule, filtration_piece, frobenius_twist, hom_space,
                       largest_subcomodule, quotient, regular_comodule, trivial_comodule)
from .errors import CapOverflowError, UnsupportedModelError, ValidationError
from .exactla import (as_field, contains, get_field, left_kernel_basis, matmul, rank,
                      row_basis, rref, solve_in_basis)
from .hopfmodels import binom_mod, make_model


def sub_comodule(model, D, rows):
    """Comodule structure on span(rows) ⊂ O(G)_{<=D} in the given (independent) basis."""
    M = regular_comodule(model, D)
    F = M.field
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, M.dim)
    k, n = rows.shape[0], M.ambient_dim
    if k == 0:
        return Comodule(M.model, D, np.zeros((0, 0, n), dtype=np.int64))
    R = np.stack([M.coaction(w) for w in rows])           # (i, b, j)
    V = np.transpose(R, (0, 2, 1)).reshape(k * n, M.dim)  # columns of each R
    X = solve_in_basis(rows, V, F)                        # (i*j, a)
    rho = np.transpose(X.reshape(k, n, k), (0, 2, 1))
    return Comodule(M.model, D, np.ascontiguousarray(rho))


def reverse_echelon(rows, F, n):
    """Reduced echelon basis with pivots taken from the highest coordinate down.

    Rows are returned sorted by their top coordinate, so the rows supported in a
    prefix of the coordinates span the intersection with that prefix.
    """
    B = row_basis(rows, F, n)
    if B.shape[0] == 0:
        return B
    R, piv = rref(B[:, ::-1], F)
    R = R[: len(piv), ::-1]
    tops = [n - 1 - c for c in piv]
    return R[np.argsort(tops, kind="stable")]


def _top_index(row):
    nz = np.flatnonzero(row)
    return int(nz[-1]) if nz.size else -1


class ModuleFamily:
    """Base class.  Subclasses inside k[G] implement ``rows(D)``."""

    kind = "family"
    inside_regular = True

    def __init__(self, model):
        self.model = model

    @property
    def p(self):
        return self.model.p

    def rows(self, D):
        raise NotImplementedError

    def piece(self, D):
        m = self.model.with_cap(max(self.model.cap, D))
        return sub_comodule(m, D, self.rows(D))

    def stable_piece(self, d):
        """A finite piece whose filtration piece at d equals M_{<=d}."""
        return self.piece(d)

    def piece_dim(self, d):
        if self.inside_regular:
            return int(self.rows(d).shape[0])
        return filtration_piece(self.stable_piece(d), d).dim

    def dims(self, dmax):
        return [self.piece_dim(d) for d in range(dmax + 1)]

    def truncation(self, n):
        raise UnsupportedModelError(f"{self.kind} has no block-complete truncation")

    def cap_step(self):
        return 1

    def to_json(self):
        return {"kind": self.kind, **self.params()}

    def params(self):
        out = {"model": self.model.kind, "p": self.p}
        if self.model.kind != "Ga":
            out["N"] = self.model.N
        if self.model.F.m > 1:
            out["field"] = [self.p, self.model.F.m]
        return out


class RegularFamily(ModuleFamily):
    kind = "regular"

    def rows(self, D):
        return np.eye(self.model.dim(D), dtype=np.int64)

    def piece(self, D):
        return regular_comodule(self.model, D)

    def piece_dim(self, d):
        return self.model.dim(d)

    def truncation(self, n):
        if self.model.kind != "Ga":
            raise UnsupportedModelError("block-complete truncations are built for G_a families")
        return regular_comodule(self.model, n - 1)


def _ga_power_rows(model, base, kmax, D):
    """Coordinates of base^k, k = 0..kmax, in O(G_a)_{<=D}."""
    F = model.F
    out = np.zeros((kmax + 1, D + 1), dtype=np.int64)
    cur = {0: 1}
    b = {e[0][0]: c for e, c in base.items()}
    for k in range(kmax + 1):
        for e, c in cur.items():
            out[k, e] = c
        if k < kmax:
            nxt = {}
            for e1, c1 in cur.items():
                for e2, c2 in b.items():
                    v = F.sadd(nxt.get(e1 + e2, 0), F.smul(c1, c2))
                    if v:
                        nxt[e1 + e2] = v
                    else:
                        nxt.pop(e1 + e2, None)
            cur = nxt
    return out


class LangGaFamily(ModuleFamily):
    """J_d: polynomials in s = t^q - t, q = p^d (primitive, so Delta(s^k) is binomial)."""

    kind = "lang_ga"

    def __init__(self, p, d, field=None):
        if d < 1:
            raise ValidationError("J_d needs d >= 1")
        F = as_field(field if field is not None else p)
        super().__init__(make_model("Ga", F, 1))
        self.d = d
        self.q = F.p ** d

    def params(self):
        return {"p": self.p, "d": self.d}

    def _s(self):
        F = self.model.F
        return {((self.q,), 0): 1, ((1,), 0): F.sneg(1)}

    def rows(self, D):
        return _ga_power_rows(self.model, self._s(), D // self.q, D)

    def _piece_from_count(self, count, D):
        """Closed-form coaction on s^0..s^{count-1}: s^a -> sum C(a,b) s^b ⊗ s^{a-b}."""
        S = _ga_power_rows(self.model, self._s(), count - 1, D)
        rho = np.zeros((count, count, D + 1), dtype=np.int64)
        F = self.model.F
        for a in range(count):
            for b in range(a + 1):
                c = binom_mod(a, b, F.p)
                if c:
                    rho[a, b] = F.mul(F.from_int(c), S[a - b])
        return Comodule(self.model.with_cap(max(self.model.cap, D)), D, rho)

    def piece(self, D):
        return self._piece_from_count(D // self.q + 1, D)

    def truncation(self, n):
        return self._piece_from_count(n, (n - 1) * self.q)

    def piece_dim(self, d):
        return d // self.q + 1

    def lang_image_rows(self, D):
        """Oracle: L*(t^k) for kq <= D via the Lang pullback of the model."""
        m = self.model.with_cap(max(self.model.cap, D))
        t = m.var("t")
        return np.stack([m.coords(m.lang_pullback(self.d, t ** k), D) for k in range(D // self.q + 1)])

    def cap_step(self):
        return self.q


class PrimitivesFamily(ModuleFamily):
    """P = span{1, t^{p^i}}."""

    kind = "primitives"

    def __init__(self, p):
        super().__init__(make_model("Ga", p, 1))

    def params(self):
        return {"p": self.p}

    def exponents(self, D):
        out = [0]
        e = 1
        while e <= D:
            out.append(e)
            e *= self.p
        return out

    def rows(self, D):
        ex = self.exponents(D)
        R = np.zeros((len(ex), D + 1), dtype=np.int64)
        R[np.arange(len(ex)), ex] = 1
        return R


class TrivialFamily(ModuleFamily):
    """The one-dimensional trivial module k ⊂ k[G] (the constants)."""

    kind = "trivial"

    def rows(self, D):
        R = np.zeros((1, self.model.dim(D)), dtype=np.int64)
        R[0] = self.model.coords(self.model.one(), D)
        return R

    def piece(self, D):
        return trivial_comodule(self.model.with_cap(max(self.model.cap, D)), 1, D)

    def truncation(self, n):
        return trivial_comodule(self.model, 1, 0)


class CountableTrivialFamily(ModuleFamily):
    """Trivial module of countable rank; the piece at cap D keeps the first D+1 basis vectors."""

    kind = "countable_trivial"
    inside_regular = False

    def piece(self, D):
        return trivial_comodule(self.model.with_cap(max(self.model.cap, D)), D + 1, D)

    def stable_piece(self, d):
        return stable_cap_piece(self, d)[0]


class QuotientFamily(ModuleFamily):
    """big / small for families inside k[G] with small ⊆ big; pieces at cap D are
    big_{<=D} / small_{<=D}, which embed into the quotient module."""

    kind = "quotient"
    inside_regular = False

    def __init__(self, big: ModuleFamily, small: ModuleFamily):
        if not (big.inside_regular and small.inside_regular):
            raise ValidationError("quotient families need both families inside k[G]")
        if not big.model.same_algebra(small.model):
            raise ValidationError("quotient families need a common model")
        super().__init__(big.model)
        self.big = big
        self.small = small

    def params(self):
        return {"of": self.big.to_json(), "by": self.small.to_json()}

    def piece(self, D):
        F = self.model.F
        B = self.big.rows(D)
        S = self.small.rows(D)
        if not contains(B, S, F):
            raise ValidationError(f"{self.small.kind} piece is not inside {self.big.kind} piece at cap {D}")
        M = self.big.piece(D)
        Sc = solve_in_basis(B, S, F) if S.shape[0] else np.zeros((0, B.shape[0]), dtype=np.int64)
        return quotient(M, Sc)[0]

    def stable_piece(self, d):
        return stable_cap_piece(self, d)[0]

    def cap_step(self):
        return max(self.big.cap_step(), self.small.cap_step())


def cap_sequence(family, d, count=6):
    """Caps d + step (2^k - 1): geometric spacing so slow growth cannot pose as stable."""
    step = family.cap_step()
    return [d + step * (2 ** k - 1) for k in range(count)]


def stable_cap_piece(family, d, count=6, window=3):
    """First cap from which dim M_{<=d} is constant on ``window`` consecutive caps.

    Returns ``(piece, caps, dims)``; raises CapOverflowError with the witness caps
    when no stabilization is seen.
    """
    caps = cap_sequence(family, d, count)
    dims = []
    pieces = []
    for D in caps:
        P = family.piece(D)
        dims.append(filtration_piece(P, d).dim)
        pieces.append(P)
        if len(dims) >= window and len(set(dims[-window:])) == 1:
            return pieces[-window], caps[: len(dims)], dims
    raise CapOverflowError(f"dimension of the degree-{d} piece does not stabilize on caps {caps}: {dims}")


def lang_module_ga(p, d, cap=None):
    fam = LangGaFamily(p, d)
    if cap is not None and cap < fam.q:
        raise CapOverflowError(f"cap {cap} is below p^d = {fam.q}")
    return fam


def quotient_family(regular: ModuleFamily, J: ModuleFamily):
    return QuotientFamily(regular, J)


# U_N Lang images ---------------------------------------------------------------------

def _weights(model):
    out = []
    for v in model.vars:
        _, i, j = v.split("_")
        out.append(int(j) - int(i))
    return out


def _dict_mul(a, b, F):
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            v = F.sadd(out.get(e, 0), F.smul(c1, c2))
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


class LangUNFamily(ModuleFamily):
    """Image of the Lang pullback L* = mu (sigma ⊗ F^{r*}) Delta on k[U_N].

    The piece at D is L*(k[U_N]) ∩ O(U_N)_{<=D}.  Give y_ij weight j - i; the top
    weighted part of L*(g) is the Frobenius image of the top part of g, so
    w(L*(g)) = q w(g), and w <= (N-1) deg.  Hence L*(g) of degree <= D forces
    w(g) <= (N-1) D / q, and it suffices to image that finite space.
    """

    kind = "lang_un"

    def __init__(self, N, p, r):
        if N > 3:
            raise UnsupportedModelError("U_N Lang modules are built for N <= 3")
        if r < 1:
            raise ValidationError("r must be >= 1")
        super().__init__(make_model("UN", p, 1, N=N))
        self.N = N
        self.r = r
        self.q = p ** r
        self._cache = {}

    def params(self):
        return {"N": self.N, "p": self.p, "r": self.r}

    def _images(self):
        return [{e: c for e, c in img.items()} for img in self.model.lang_generator_images(self.r)]

    def _space(self, D):
        m = self.model.with_cap(max(self.model.cap, D))
        F = m.F
        w = _weights(m)
        W = (self.N - 1) * D // self.q
        imgs = self._images()
        zero = tuple([0] * m.nv)
        powers = []
        for v in range(m.nv):
            pw = [{zero: 1}]
            for _ in range(W // w[v]):
                pw.append(_dict_mul(pw[-1], imgs[v], F))
            powers.append(pw)
        cands = [e for e in itertools.product(*[range(W // x + 1) for x in w])
                 if sum(a * x for a, x in zip(e, w)) <= W]
        idx = m._index(D)
        low = np.zeros((len(cands), m.dim(D)), dtype=np.int64)
        high_cols = {}
        high = []
        for i, e in enumerate(cands):
            P = {zero: 1}
            for v, a in enumerate(e):
                if a:
                    P = _dict_mul(P, powers[v][a], F)
            hi = {}
            for ex, c in P.items():
                j = idx.get((ex, 0))
                if j is None:
                    hi[high_cols.setdefault(ex, len(high_cols))] = c
                else:
                    low[i, j] = c
            high.append(hi)
        H = np.zeros((len(cands), len(high_cols)), dtype=np.int64)
        for i, hi in enumerate(high):
            for j, c in hi.items():
                H[i, j] = c
        K = left_kernel_basis(H, F) if H.shape[1] else np.eye(len(cands), dtype=np.int64)
        S = matmul(K, low, F) if K.shape[0] else np.zeros((0, m.dim(D)), dtype=np.int64)
        return reverse_echelon(S, F, m.dim(D))

    def rows(self, D):
        if self._cache.get("cap", -1) < D:
            self._cache = {"cap": D, "rows": self._space(D)}
        R = self._cache["rows"]
        n = self.model.dim(D)
        return R[[i for i, row in enumerate(R) if not np.any(row[n:])]][:, :n]

    def dims(self, dmax):
        self.rows(dmax)
        return [self.piece_dim(d) for d in range(dmax + 1)]

    def lang_image_rows(self, d):
        """Raw image L*(O(U_N)_{<=d}) in O(U_N)_{<=(q+N-1)d}."""
        D = (self.q + self.N - 1) * d
        m = self.model.with_cap(max(self.model.cap, D))
        return np.stack([m.coords(m.lang_pullback(self.r, f), D) for f in m.basis(d)])

    def saturated_rows(self, D):
        """largest_subcomodule inside span(rows(D)); equal to rows(D) when the piece is stable."""
        M = regular_comodule(self.model, D)
        return largest_subcomodule(M, within=self.rows(D)).basis

    def fixed_point_rows(self, D):
        """Oracle: left-translation invariants of U_N(F_q) inside O(U_N)_{<=D}.

        Computed over F_q; the solution space is Galois-stable, so its reduced
        echelon form has entries in F_p.
        """
        return fixed_point_rows(self.model, self.r, D)


def _translation_images(model, i, lam):
    """Variable images under x -> (1 + lam E_{i,i+1}) x for U_N coordinates."""
    F = model.F
    zero = model._zero_exps
    imgs = []
    for v in model.vars:
        _, a, b = v.split("_")
        a, b = int(a), int(b)
        e = [0] * model.nv
        e[model.var_index[v]] = 1
        img = {(tuple(e), 0): 1}
        if a == i:
            if i + 1 == b:
                img[(zero, 0)] = lam
            else:
                e2 = [0] * model.nv
                e2[model.var_index[f"y_{i + 1}_{b}"]] = 1
                img[(tuple(e2), 0)] = lam
        imgs.append(img)
    return imgs


def _substitute_key(model, key, imgs, cache):
    out = {(model._zero_exps, 0): 1}
    for v, a in enumerate(key[0]):
        if a:
            if (v, a) not in cache:
                cache[(v, a)] = model._mul_terms(cache[(v, a - 1)], imgs[v]) if a > 1 else imgs[v]
            out = model._mul_terms(out, cache[(v, a)])
    return out


def fixed_point_rows(base_model, r, D):
    p = base_model.p
    F = get_field(p, r)
    kind = base_model.kind
    m = make_model(kind, F, D, N=base_model.N)
    keys = m.basis_keys(D)
    idx = m._index(D)
    n = len(keys)
    lams = [p ** i for i in range(r)]  # an F_p-basis of F_q in digit codes
    if kind == "Ga":
        gens = [[{((1,), 0): 1, ((0,), 0): lam}] for lam in lams]
    elif kind == "UN":
        gens = [_translation_images(m, i, lam) for i in range(1, m.N) for lam in lams]
    else:
        raise UnsupportedModelError("fixed points are built for G_a and U_N")
    blocks = []
    for imgs in gens:
        A = np.zeros((n, n), dtype=np.int64)
        cache = {}
        for j, key in enumerate(keys):
            img = _substitute_key(m, key, imgs, cache)
            img = dict(img)
            img[key] = F.ssub(img.get(key, 0), 1)
            for kk, c in img.items():
                if c:
                    A[j, idx[kk]] = c
        blocks.append(A)
    K = left_kernel_basis(np.hstack(blocks), F)
    R = reverse_echelon(K, F, n)
    if np.any(R >= p):
        raise ValidationError("fixed points are not defined over the prime field")
    return R


# Hom vanishing ------------------------------------------------------------------------

def hom_vanishing_probe(J: ModuleFamily, M: Comodule, caps):
    """Dimension of the image of Hom(J_{<=Dmax}, M) -> Hom(J_{<=Dmin}, M) under restriction."""
    caps = sorted(caps)
    if not caps:
        raise ValidationError("need at least one cap")
    F = M.field
    records = []
    pieces = {D: J.piece(D) for D in caps}
    rows = {D: J.rows(D) for D in caps} if J.inside_regular else None
    homs = {D: hom_space(pieces[D], M) for D in caps}
    for D in caps:
        records.append({"cap": D, "pieceDim": pieces[D].dim, "homDim": int(homs[D].shape[0])})
    if rows is None:
        raise UnsupportedModelError("restriction maps need a family inside k[G]")
    lo, hi = caps[0], caps[-1]
    H = homs[hi]
    if H.shape[0] == 0 or rows[lo].shape[0] == 0:
        img = 0
    else:
        big = np.zeros((rows[lo].shape[0], rows[hi].shape[1]), dtype=np.int64)
        big[:, : rows[lo].shape[1]] = rows[lo]
        E = solve_in_basis(rows[hi], big, F)  # (dim lo, dim hi)
        restricted = np.stack([matmul(f, E.T, F).ravel() for f in H])
        img = rank(restricted, F)
    return {
        "caps": caps,
        "perCap": records,
        "imageDim": int(img),
        "vanishes": img == 0,
    }


# The Frobenius-twist sum of natural representations -------------------------------

class TwistSumFamily:
    """M = ⊕_n (V^{(n)})^{⊕ n!} for the natural GL_N-module V.

    Each V^{(n)} is irreducible with coaction coefficients x_ij^{p^n}, so it lies in
    M_{<=d} exactly when those coefficients have degree <= d.
    """

    kind = "twist_sum"

    def __init__(self, N, p):
        self.N = N
        self.p = p
        self.model = make_model("GLN", p, 1, N=N)

    def summand_degree(self, n):
        """Degree of the coefficients x_ij^{p^n} (read off keys, no large model needed)."""
        q = self.p ** n
        m = self.model
        return max(m.key_degree((tuple(a * q for a in exps), det * q))
                   for (exps, det) in m.var((1, 1)).terms)

    def piece_dim(self, d):
        total = 0
        n = 0
        while self.summand_degree(n) <= d:
            total += factorial(n) * self.N
            n += 1
        return total

    def dims(self, dmax):
        return [self.piece_dim(d) for d in range(dmax + 1)]

    def to_json(self):
        return {"kind": self.kind, "N": self.N, "p": self.p}


def natural_comodule(model, n=0):
    """V^{(n)} with e_a -> sum_b e_b ⊗ x_ba^{p^n}."""
    D = model.p ** n
    m = model.with_cap(max(model.cap, D))
    N = m.N
    rho = np.zeros((N, N, m.dim(D)), dtype=np.int64)
    for a in range(N):
        for b in range(N):
            rho[a, b] = m.coords(m.frobenius_pullback(n, m.var((b + 1, a + 1))), D)
    C = Comodule(m, D, rho)
    C.check()
    return C


# JSON ---------------------------------------------------------------------------------

def family_from_json(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError("family JSON needs a kind")
    kind = obj["kind"]
    allowed = {
        "regular": {"model", "N", "p", "field"},
        "lang_ga": {"p", "d"},
        "lang_un": {"N", "p", "r"},
        "primitives": {"p"},
        "trivial": {"model", "N", "p", "field"},
        "countable_trivial": {"model", "N", "p", "field"},
        "quotient": {"of", "by"},
        "twist_sum": {"N", "p"},
    }
    if kind not in allowed:
        raise ValidationError(f"unknown family kind {kind!r}")
    extra = set(obj) - allowed[kind] - {"kind"}
    if extra:
        raise ValidationError(f"unknown fields for {kind}: {sorted(extra)}")
    try:
        if kind == "lang_ga":
            return LangGaFamily(obj["p"], obj["d"])
        if kind == "lang_un":
            return LangUNFamily(obj.get("N", 3), obj["p"], obj.get("r", 1))
        if kind == "primitives":
            return PrimitivesFamily(obj["p"])
        if kind == "quotient":
            return QuotientFamily(family_from_json(obj["of"]), family_from_json(obj["by"]))
        if kind == "twist_sum":
            return TwistSumFamily(obj.get("N", 2), obj["p"])
        field = obj.get("field", obj["p"])
        if isinstance(field, list):
            field = get_field(*field)
        model = make_model(obj.get("model", "Ga"), field, 1, N=obj.get("N"))
        return {"regular": RegularFamily, "trivial": TrivialFamily,
                "countable_trivial": CountableTrivialFamily}[kind](model)
    except KeyError as e:
        raise ValidationError(f"missing field {e} for family {kind}") from None
