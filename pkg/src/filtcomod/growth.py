"""Dimension sequences, cofiniteness checks and exact cofinite-type fitting."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator

from .comodule import Comodule, filtration_piece
from .errors import AmbiguousWindowError, CapOverflowError, ValidationError
from .exactla import row_basis
from .mockinj import reverse_echelon, stable_cap_piece

MAX_PERIOD = 12
MAX_DEGREE = 8
MIN_POINTS = 8


def dimension_sequence(M, dmax):
    """d -> dim M_{<=d} for d = 0..dmax."""
    if isinstance(M, Comodule):
        return [filtration_piece(M, d).dim for d in range(dmax + 1)]
    return list(M.dims(dmax))


@dataclass
class GrowthProfile:
    dims: list
    degree: object
    coeff: object
    period: int = 1
    window: list = field(default_factory=list)
    note: str = ""

    def to_json(self):
        return {
            "dims": [[d, v] for d, v in self.dims],
            "fittedDegree": self.degree,
            "leadingCoeff": str(self.coeff) if isinstance(self.coeff, Fraction) else self.coeff,
            "period": self.period,
            "window": self.window,
            **({"note": self.note} if self.note else {}),
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "dim"])
        w.writerows(self.dims)
        return buf.getvalue()

    @property
    def gamma(self):
        return (self.degree, self.coeff)


def _normalize(dims):
    pairs = []
    for i, x in enumerate(dims):
        if isinstance(x, (tuple, list)):
            pairs.append((int(x[0]), int(x[1])))
        else:
            pairs.append((i, int(x)))
    for (a, _), (b, _) in zip(pairs, pairs[1:]):
        if b != a + 1:
            raise ValidationError("dimension data must be sampled at consecutive d")
    for (_, u), (_, v) in zip(pairs, pairs[1:]):
        if v < u:
            raise ValidationError("dimension sequence must be nondecreasing")
    return pairs


def _diffs(v, e):
    for _ in range(e):
        v = [b - a for a, b in zip(v, v[1:])]
    return v


def _class_fit(vals, checks, emax):
    """Smallest e >= 1 whose e-th differences are constant and nonzero on the last ``checks`` entries."""
    for e in range(1, emax + 1):
        dv = _diffs(vals, e)
        if len(dv) < checks:
            return None
        tail = dv[-checks:]
        if tail[0] != 0 and all(x == tail[0] for x in tail):
            return e, tail[0]
    return None


def _window_size(n):
    return max(4, math.ceil(0.2 * n))


def _try_period(values, P, W, emax):
    checks = max(3, math.ceil(W / P))
    found = set()
    for r in range(P):
        fit = _class_fit(values[r::P], checks, emax)
        if fit is None:
            return None
        e, top = fit
        found.add((e, Fraction(top, math.factorial(e) * P ** e)))
        if len(found) > 1:
            return None
    (e, c), = found
    return e, c


def _sparse_jump_flag(pairs):
    """Sub/superpolynomial call for sequences whose increments are rare."""
    n = len(pairs)
    tail = pairs[n // 2:]
    steps = [b[1] - a[1] for a, b in zip(tail, tail[1:])]
    if not steps or sum(1 for s in steps if s) > len(steps) / 4:
        return None
    jumps = [(d, v) for (d, v), (_, u) in zip(pairs[1:], pairs) if v > u and d >= 2]
    if len(jumps) < 3:
        return None
    ratios = [math.log(v) / math.log(d) for d, v in jumps[-3:]]
    if ratios[0] < ratios[1] < ratios[2]:
        return "superpolynomial"
    if ratios[0] > ratios[1] > ratios[2]:
        return "subpolynomial"
    return None


def _dense_superpolynomial(values, W, emax):
    """Differences of every order up to emax are still strictly increasing on the window."""
    for e in range(1, emax + 1):
        dv = _diffs(values, e)[-W:]
        if len(dv) < 3 or not all(0 < a < b for a, b in zip(dv, dv[1:])):
            return False
    return True


def fit_cofinite_type(dims, max_period=MAX_PERIOD, max_degree=MAX_DEGREE):
    """Exact (e, c) with dim M_{<=d} ~ c d^e, or a sub/superpolynomial flag.

    Eventually constant data (last half constant) gives e = 0.  Otherwise each
    residue class mod a period P <= max_period is fitted by finite differences;
    the smallest P on which all classes agree wins.
    """
    pairs = _normalize(dims)
    n = len(pairs)
    if n < MIN_POINTS:
        raise ValidationError(f"need at least {MIN_POINTS} data points, got {n}")
    values = [v for _, v in pairs]
    W = _window_size(n)
    window = [d for d, _ in pairs[-W:]]
    half = values[n // 2:]
    if half[0] > 0 and all(v == half[0] for v in half):
        return GrowthProfile(pairs, 0, Fraction(half[0]), 1, [d for d, _ in pairs[n // 2:]])
    for P in range(1, max_period + 1):
        fit = _try_period(values, P, W, max_degree)
        if fit is not None:
            return GrowthProfile(pairs, fit[0], fit[1], P, window)
    flag = _sparse_jump_flag(pairs)
    if flag is None and _dense_superpolynomial(values, W, max_degree):
        flag = "superpolynomial"
    if flag is None:
        raise AmbiguousWindowError("no stable finite-difference pattern within the data window")
    return GrowthProfile(pairs, flag, "inconclusive", 1, window)


def cofinite_check(family, dmax, count=6):
    """Per d: does dim M_{<=d} stabilize over 3 consecutive caps?"""
    out = []
    for d in range(dmax + 1):
        if getattr(family, "inside_regular", False):
            # M ∩ O_{<=D} then cut at d: the intersection with O_{<=d}, independent of D
            caps = [d + family.cap_step() * (2 ** k - 1) for k in range(3)]
            dims = []
            for D in caps:
                n_d = family.model.dim(d)
                R = reverse_echelon(family.rows(D), family.model.F, family.model.dim(D))
                keep = [row for row in R if not np.any(row[n_d:])]
                dims.append(len(keep))
            out.append({"d": d, "cofinite": len(set(dims)) == 1, "caps": caps, "dims": dims})
            continue
        try:
            _, caps, dims = stable_cap_piece(family, d, count=count)
            out.append({"d": d, "cofinite": True, "caps": caps, "dims": dims})
        except CapOverflowError as exc:
            out.append({"d": d, "cofinite": False, "witness": str(exc)})
    return out


class CofiniteTypeEstimator(BaseEstimator):
    """Estimator wrapper: ``fit(d, dims)`` sets ``degree_``, ``coeff_`` and ``period_``."""

    def __init__(self, max_period=MAX_PERIOD, max_degree=MAX_DEGREE):
        self.max_period = max_period
        self.max_degree = max_degree

    def fit(self, X, y=None):
        X = np.asarray(X)
        if y is None:
            pairs = list(enumerate(int(v) for v in X.ravel()))
        else:
            pairs = list(zip((int(d) for d in X.ravel()), (int(v) for v in np.asarray(y).ravel())))
        prof = fit_cofinite_type(pairs, self.max_period, self.max_degree)
        self.profile_ = prof
        self.degree_ = prof.degree
        self.coeff_ = prof.coeff
        self.period_ = prof.period
        return self

    def predict(self, X):
        """Leading-term prediction c d^e (as floats)."""
        if not isinstance(self.degree_, int):
            raise ValidationError("no polynomial fit to predict from")
        X = np.asarray(X, dtype=float).ravel()
        return float(self.coeff_) * X ** self.degree_
