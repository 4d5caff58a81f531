"""Operators on F_q-linear functions in basis-coefficient form.

A continuous F_q-linear function on the unit ball is stored as the list
of coefficients of its orthonormal-basis expansion u = sum c_i f_i.  The
three fundamental operators act coefficientwise:

    (tau u)(t)   = u(t)^q          out_j = c_j^q + [j] c_{j-1}^q
    (delta u)(t) = u(x t) - x u(t) out_j = c_{j+1} + [j] c_j
    (d u)(t)     = q-th root of delta u,   out_j = c_{j+1}^(1/q)

so tau . d = delta and d f_i = f_{i-1}.  d is only semilinear:
d(c u) = c^(1/q) d u for a constant c.

An expansion is either complete (all unlisted coefficients are exactly
zero, so tau lengthens it and d shortens it without loss) or a prefix of
an infinite expansion, in which case delta and d lose the last slot and
an attached tail profile is the only way to bound what was dropped.

Tail profiles record the valuation law of the unlisted coefficients.
Since sup_{|t|<=1} |u(t)| = sup_i |c_i|, a profile turns pointwise
evaluation of a prefix into a value with a certified error exponent.
When the profile does not decay the function is defined only on
polynomial arguments t in F_q[x] with deg t < available length, where
every dropped term vanishes identically because f_n kills polynomials
of degree below n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .field import (OutOfDomain, Prec, PrecisionUnderflow, Series,
                    SeriesMatrix, UnsupportedCase, _as_prec,
                    is_subfield_polynomial)
from .carlitz import CarlitzContext


# -- valuation profiles for the unlisted tail of an expansion


@dataclass(frozen=True)
class FiniteTail:
    """Coefficients vanish beyond index `last` (analytic case)."""

    last: int

    @property
    def decays(self) -> bool:
        return True

    @property
    def gamma(self):
        return math.inf

    def val_at(self, n: int, q: int):
        if n <= self.last:
            raise ValueError("index %d is not in the tail" % n)
        return math.inf

    def tail_min(self, m: int, q: int):
        if m <= self.last:
            raise ValueError("profile starts after index %d" % self.last)
        return math.inf


@dataclass(frozen=True)
class ArithmeticTail:
    """val c_n = base + (n - start) * step for n >= start."""

    start: int
    base: Fraction
    step: Fraction

    @property
    def decays(self) -> bool:
        return self.step > 0

    @property
    def gamma(self) -> Fraction:
        # liminf q^(-n) * (linear in n) is 0 regardless of the slope
        return Fraction(0)

    def val_at(self, n: int, q: int) -> Fraction:
        if n < self.start:
            raise ValueError("index %d is not in the tail" % n)
        return Fraction(self.base) + (n - self.start) * Fraction(self.step)

    def tail_min(self, m: int, q: int):
        if m < self.start:
            raise ValueError("profile starts at index %d" % self.start)
        if self.step <= 0:
            return -math.inf
        return self.val_at(m, q)


@dataclass(frozen=True)
class ExponentialTail:
    """val c_n = alpha * q^n + beta for n >= start (locally analytic)."""

    start: int
    alpha: Fraction
    beta: Fraction

    @property
    def decays(self) -> bool:
        return self.alpha > 0

    @property
    def gamma(self) -> Fraction:
        return Fraction(self.alpha)

    def val_at(self, n: int, q: int) -> Fraction:
        if n < self.start:
            raise ValueError("index %d is not in the tail" % n)
        return Fraction(self.alpha) * q**n + Fraction(self.beta)

    def tail_min(self, m: int, q: int):
        if m < self.start:
            raise ValueError("profile starts at index %d" % self.start)
        if self.alpha <= 0:
            return -math.inf
        return self.val_at(m, q)


TailProfile = Union[FiniteTail, ArithmeticTail, ExponentialTail]


# -- expansions


class CarlitzCoeffs:
    """Basis expansion of a scalar F_q-linear function."""

    __slots__ = ("ctx", "coeffs", "complete", "profile")

    def __init__(self, ctx: CarlitzContext, coeffs: Sequence[Series],
                 complete: bool = False,
                 profile: Optional[TailProfile] = None):
        coeffs = tuple(coeffs)
        for c in coeffs:
            if c.field != ctx.field:
                raise OutOfDomain("coefficient lives in a different field")
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "complete", bool(complete))
        object.__setattr__(self, "profile", profile)

    def __setattr__(self, name, value):
        raise AttributeError("expansions are immutable")

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i: int) -> Series:
        if self.complete and i >= len(self.coeffs):
            return Series.zero(self.ctx.field)
        return self.coeffs[i]

    def __iter__(self):
        # without this, iteration on a complete expansion would walk
        # __getitem__ past the end forever
        return iter(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CarlitzCoeffs):
            return NotImplemented
        return (self.ctx.field == other.ctx.field
                and self.coeffs == other.coeffs
                and self.complete == other.complete)

    def replace(self, coeffs=None, complete=None, profile=None):
        return CarlitzCoeffs(
            self.ctx,
            self.coeffs if coeffs is None else coeffs,
            self.complete if complete is None else complete,
            self.profile if profile is None else profile)

    def padded(self, n: int) -> "CarlitzCoeffs":
        """Extend a complete expansion with exact zeros up to length n."""
        if not self.complete:
            raise UnsupportedCase("cannot pad a prefix of unknown tail")
        if n <= len(self.coeffs):
            return self
        zero = Series.zero(self.ctx.field)
        pad = self.coeffs + (zero,) * (n - len(self.coeffs))
        return self.replace(coeffs=pad)

    def prefix(self, n: int) -> "CarlitzCoeffs":
        if n >= len(self.coeffs):
            return self
        return CarlitzCoeffs(self.ctx, self.coeffs[:n], complete=False)

    def truncate(self, prec: Prec) -> "CarlitzCoeffs":
        """Truncate every stored coefficient to absolute precision."""
        return self.replace(coeffs=tuple(c.truncate(prec)
                                         for c in self.coeffs))

    def __add__(self, other: "CarlitzCoeffs") -> "CarlitzCoeffs":
        if not isinstance(other, CarlitzCoeffs):
            return NotImplemented
        if self.ctx.field != other.ctx.field:
            raise OutOfDomain("expansions over different fields")
        a, b = self, other
        if a.complete and b.complete:
            n = max(len(a), len(b))
            a, b = a.padded(n), b.padded(n)
            out_complete = True
        else:
            n = min(len(a) if not a.complete else 10**9,
                    len(b) if not b.complete else 10**9)
            out_complete = False
            if a.complete:
                a = a.padded(n)
            if b.complete:
                b = b.padded(n)
        coeffs = tuple(a.coeffs[i] + b.coeffs[i] for i in range(n))
        return CarlitzCoeffs(self.ctx, coeffs, complete=out_complete)

    def __sub__(self, other: "CarlitzCoeffs") -> "CarlitzCoeffs":
        return self + other.scale(-1)

    def scale(self, c) -> "CarlitzCoeffs":
        """Multiply the function pointwise by a constant from K."""
        if not isinstance(c, Series):
            c = Series.const(self.ctx.field, self.ctx.field.elem(c))
        return CarlitzCoeffs(self.ctx, tuple(c * ci for ci in self.coeffs),
                             complete=self.complete)


class MatrixCarlitzCoeffs:
    """Basis expansion with matrix (or column-vector) coefficients."""

    __slots__ = ("ctx", "coeffs", "complete", "profile", "rows", "cols")

    def __init__(self, ctx: CarlitzContext,
                 coeffs: Sequence[SeriesMatrix],
                 complete: bool = False,
                 profile: Optional[TailProfile] = None):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("matrix expansion needs at least one term")
        r, c = coeffs[0].rows, coeffs[0].cols
        for m in coeffs:
            if m.field != ctx.field:
                raise OutOfDomain("coefficient lives in a different field")
            if (m.rows, m.cols) != (r, c):
                raise ValueError("mixed coefficient shapes")
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "complete", bool(complete))
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "rows", r)
        object.__setattr__(self, "cols", c)

    def __setattr__(self, name, value):
        raise AttributeError("expansions are immutable")

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i: int) -> SeriesMatrix:
        if self.complete and i >= len(self.coeffs):
            return SeriesMatrix.zeros(self.ctx.field, self.rows, self.cols)
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def entry(self, i: int, j: int) -> CarlitzCoeffs:
        """Scalar expansion of one matrix entry."""
        return CarlitzCoeffs(self.ctx,
                             [m[i, j] for m in self.coeffs],
                             complete=self.complete)

    def padded(self, n: int) -> "MatrixCarlitzCoeffs":
        if not self.complete:
            raise UnsupportedCase("cannot pad a prefix of unknown tail")
        if n <= len(self.coeffs):
            return self
        zero = SeriesMatrix.zeros(self.ctx.field, self.rows, self.cols)
        return MatrixCarlitzCoeffs(
            self.ctx, self.coeffs + (zero,) * (n - len(self.coeffs)),
            complete=True, profile=self.profile)

    def prefix(self, n: int) -> "MatrixCarlitzCoeffs":
        if n >= len(self.coeffs):
            return self
        return MatrixCarlitzCoeffs(self.ctx, self.coeffs[:n],
                                   complete=False)

    def __add__(self, other: "MatrixCarlitzCoeffs") -> "MatrixCarlitzCoeffs":
        if not isinstance(other, MatrixCarlitzCoeffs):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        a, b = self, other
        if a.complete and b.complete:
            n = max(len(a), len(b))
            a, b = a.padded(n), b.padded(n)
            out_complete = True
        else:
            n = min(len(a) if not a.complete else 10**9,
                    len(b) if not b.complete else 10**9)
            if a.complete:
                a = a.padded(n)
            if b.complete:
                b = b.padded(n)
            out_complete = False
        coeffs = tuple(a.coeffs[i] + b.coeffs[i] for i in range(n))
        return MatrixCarlitzCoeffs(self.ctx, coeffs, complete=out_complete)

    def __sub__(self, other: "MatrixCarlitzCoeffs") -> "MatrixCarlitzCoeffs":
        return self + other.lmul_scalar(-1)

    def lmul(self, m: SeriesMatrix) -> "MatrixCarlitzCoeffs":
        """Left-multiply every coefficient: constant matrix times u."""
        return MatrixCarlitzCoeffs(self.ctx,
                                   tuple(m @ c for c in self.coeffs),
                                   complete=self.complete)

    def lmul_scalar(self, c) -> "MatrixCarlitzCoeffs":
        return MatrixCarlitzCoeffs(self.ctx,
                                   tuple(m.scale(c) for m in self.coeffs),
                                   complete=self.complete)

    def truncate(self, prec: Prec) -> "MatrixCarlitzCoeffs":
        return MatrixCarlitzCoeffs(
            self.ctx, tuple(m.truncate(prec) for m in self.coeffs),
            complete=self.complete, profile=self.profile)


# -- the coefficient maps


def carlitz_tau(u, prec: Prec = None):
    """u -> u^q.  A complete expansion gains one certain slot."""
    ctx = u.ctx
    n = len(u.coeffs)
    top = n + 1 if u.complete else n
    out = []
    for j in range(top):
        cj = u[j] if j < n else None
        term = _frob(cj, 1) if cj is not None else _zero_like(u)
        if j > 0:
            term = term + _bracket_mul(ctx, j, _frob(u[j - 1], 1))
        out.append(term if prec is None else term.truncate(prec))
    return _rewrap(u, out, complete=u.complete)


def carlitz_delta(u, prec: Prec = None):
    """u -> u(x t) - x u(t).  A prefix loses its last slot."""
    ctx = u.ctx
    n = len(u.coeffs)
    top = n if u.complete else n - 1
    if top < 0:
        raise PrecisionUnderflow("no coefficients left to act on")
    out = []
    for j in range(top):
        term = u[j + 1] + _bracket_mul(ctx, j, u[j])
        out.append(term if prec is None else term.truncate(prec))
    return _rewrap(u, out, complete=u.complete)


def carlitz_d(u, prec: Prec = None):
    """The Carlitz derivative: q-th root of delta; shifts the basis down."""
    n = len(u.coeffs)
    top = max(n - 1, 0) if u.complete else n - 1
    if top < 0:
        raise PrecisionUnderflow("no coefficients left to act on")
    out = []
    for j in range(top):
        term = _frob(u[j + 1], -1)
        out.append(term if prec is None else term.truncate(prec))
    return _rewrap(u, out, complete=u.complete)


def apply_p(pi: Sequence, u, prec: Prec = None):
    """sum_k pi_k tau^k(u) for constant coefficients pi_k over K.

    Scalar pi_k may be Series or anything Series.const accepts; for a
    matrix expansion each pi_k is a square SeriesMatrix acting on the
    left.
    """
    if not pi:
        raise ValueError("empty operator")
    acc = None
    w = u
    for k, pk in enumerate(pi):
        if k > 0:
            w = carlitz_tau(w, prec=prec)
        term = _const_mul(pk, w)
        acc = term if acc is None else acc + term
        if prec is not None:
            acc = acc.truncate(prec)
    return acc


def _const_mul(pk, u):
    if isinstance(u, MatrixCarlitzCoeffs):
        if not isinstance(pk, SeriesMatrix):
            raise TypeError("matrix expansion needs matrix coefficients")
        return u.lmul(pk)
    return u.scale(pk)


def _rewrap(u, out, complete):
    if isinstance(u, MatrixCarlitzCoeffs):
        if not out:
            out = [SeriesMatrix.zeros(u.ctx.field, u.rows, u.cols)]
        return MatrixCarlitzCoeffs(u.ctx, out, complete=complete)
    return CarlitzCoeffs(u.ctx, out, complete=complete)


def _zero_like(u):
    if isinstance(u, MatrixCarlitzCoeffs):
        return SeriesMatrix.zeros(u.ctx.field, u.rows, u.cols)
    return Series.zero(u.ctx.field)


def _frob(c, k):
    return c.frobenius(k)


def _bracket_mul(ctx, j, c):
    b = ctx.bracket(j)
    if isinstance(c, SeriesMatrix):
        return c.scale(b)
    return b * c


# -- evaluation


def carlitz_eval(u, t: Series, prec: Prec = None, tail_val=None) -> object:
    """Evaluate an expansion at |t| <= 1.

    Complete expansions and polynomial arguments of low degree give
    finite sums.  Otherwise a decaying tail profile (or an explicit
    tail_val bound on the dropped coefficients) certifies the error; a
    non-decaying tail makes the point lie outside the domain.
    """
    ctx = u.ctx
    field = ctx.field
    if t.field != field:
        raise OutOfDomain("argument lives in a different field")
    if t.terms and t.val < 0:
        raise OutOfDomain("the function is defined on the unit ball")
    m = len(u.coeffs)
    top = m  # how many stored terms enter the sum
    out_prec = _as_prec(prec)

    if u.complete:
        pass
    elif is_subfield_polynomial(t) and t.degree() < m:
        # every unlisted term vanishes identically at this argument
        top = min(m, int(t.degree()) + 1)
    else:
        if tail_val is None and u.profile is not None:
            if len(u.coeffs) < getattr(u.profile, "start", 0) and \
                    not isinstance(u.profile, FiniteTail):
                raise UnsupportedCase("profile starts past the stored prefix")
            tail_val = u.profile.tail_min(m, field.q)
        if tail_val is None:
            raise UnsupportedCase(
                "prefix of unknown tail cannot be evaluated at this point")
        if tail_val == -math.inf:
            raise OutOfDomain(
                "coefficients do not decay: the series diverges here; "
                "only polynomial arguments of degree < %d are usable" % m)
        if tail_val != math.inf:
            out_prec = tail_val if out_prec is None else min(out_prec,
                                                             tail_val)

    if top == 0:
        zero = _zero_like(u)
        return zero if out_prec is None else zero.truncate(out_prec)

    fv = ctx.f_values(top - 1, t, prec=prec)
    if isinstance(u, MatrixCarlitzCoeffs):
        acc = SeriesMatrix.zeros(field, u.rows, u.cols)
        for i in range(top):
            acc = acc + u.coeffs[i].scale(fv[i])
        return acc if out_prec is None else acc.truncate(out_prec)
    acc = Series.zero(field)
    for i in range(top):
        acc = acc + u.coeffs[i] * fv[i]
    return acc if out_prec is None else acc.truncate(out_prec)


# -- the Frobenius-power-series picture of analytic functions


def linear_delta(ctx: CarlitzContext, coeffs: Sequence[Series]) -> list:
    """delta on sum a_k t^(q^k): a_k -> [k] a_k."""
    return [ctx.bracket(k) * a for k, a in enumerate(coeffs)]


def linear_d(ctx: CarlitzContext, coeffs: Sequence[Series]) -> list:
    """d on sum a_k t^(q^k): out_k = ([k+1] a_{k+1})^(1/q)."""
    return [(ctx.bracket(k + 1) * coeffs[k + 1]).frobenius(-1)
            for k in range(len(coeffs) - 1)]


def lps_eval(ctx: CarlitzContext, coeffs: Sequence[Series], t: Series,
             prec: Prec = None) -> Series:
    """sum a_k t^(q^k) as a finite sum of the listed terms."""
    acc = Series.zero(ctx.field)
    for k, a in enumerate(coeffs):
        acc = acc + a * t.frobenius(k)
        if prec is not None:
            acc = acc.truncate(prec)
    return acc
