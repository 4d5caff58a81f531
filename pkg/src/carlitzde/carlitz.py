"""Carlitz polynomial apparatus over F_q((x)).

A context object caches, per coefficient field, the exact polynomial data
everything else is built from:

  * brackets        [j] = x**(q**j) - x, defined for every integer j
                    (negative j lands in the ramified extension, with
                    valuation q**j); [0] = 0,
  * factorials      D_0 = 1, D_i = [i] * D_{i-1}**q   (val (q**i-1)/(q-1)),
                    L_0 = 1, L_i = [i] * L_{i-1}      (val i),
  * the F_q-linear polynomials e_i (product over all polynomials of
    degree < i) and their normalizations f_i = e_i / D_i, which form an
    orthonormal basis of the continuous F_q-linear functions on the unit
    ball O: sup |u(t)| over O equals sup |c_i| over the expansion
    u = sum c_i f_i.

Evaluation of f_i never divides by D_i (whose valuation grows like q**i,
which would demand absurd working precision).  It uses the normalized
recursion

    f_0(t) = t,     f_i(t) = (f_{i-1}(t)**q - f_{i-1}(t)) / [i],

which loses exactly one exponent unit of absolute precision per step, so
requesting precision P runs the recursion with cap P + i + 10.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .field import (FieldDesc, OutOfDomain, Prec, Series, UnsupportedCase,
                    _as_prec)

_PRODUCT_DEGREE_LIMIT = 8  # product evaluation enumerates q**i factors


class CarlitzContext:
    """Bracket/factorial caches and basis evaluation for one field."""

    __slots__ = ("field", "default_prec", "_brackets", "_dfact", "_lfact")

    def __init__(self, field: FieldDesc, default_prec: Prec = 240):
        self.field = field
        self.default_prec = _as_prec(default_prec)
        self._brackets: dict[int, Series] = {}
        self._dfact: list[Series] = [Series.one(field)]
        self._lfact: list[Series] = [Series.one(field)]

    # -- cached polynomial data

    def bracket(self, j: int) -> Series:
        """[j] = x**(q**j) - x as an exact series; [0] is exactly zero."""
        got = self._brackets.get(j)
        if got is None:
            power = Fraction(self.field.q) ** j
            got = Series.x(self.field, power) - Series.x(self.field)
            self._brackets[j] = got
        return got

    def factorials(self, i: int) -> tuple[Series, Series]:
        """(D_i, L_i) as exact polynomials."""
        if i < 0:
            raise ValueError("factorial index must be nonnegative")
        while len(self._dfact) <= i:
            k = len(self._dfact)
            self._dfact.append(self.bracket(k) * self._dfact[k - 1].frobenius(1))
            self._lfact.append(self.bracket(k) * self._lfact[k - 1])
        return self._dfact[i], self._lfact[i]

    def dfactorial(self, i: int) -> Series:
        return self.factorials(i)[0]

    def lfactorial(self, i: int) -> Series:
        return self.factorials(i)[1]

    # -- basis evaluation

    def _eval_cap(self, t: Series, n: int, prec: Prec) -> Fraction:
        prec = _as_prec(prec)
        if prec is None:
            prec = t.prec if t.prec is not None else self.default_prec
        return prec + n + 10

    def f_values(self, n: int, t: Series, prec: Prec = None) -> list[Series]:
        """[f_0(t), ..., f_n(t)] for |t| <= 1.

        With an exact t the result carries precision cap - i where
        cap = (prec or default) + n + 10; a truncated t bounds the result
        through the ordinary precision calculus instead.
        """
        if t.field != self.field:
            raise OutOfDomain("argument lives in a different field")
        if t.terms and t.val < 0:
            raise OutOfDomain("basis functions are defined on the unit ball")
        cap = self._eval_cap(t, n, prec)
        out = [t.truncate(cap) if t.prec is None else t]
        cur = out[0]
        for i in range(1, n + 1):
            num = cur.frobenius(1) - cur
            cur = num.div(self.bracket(i), prec=cap)
            out.append(cur)
        return out

    def f_eval(self, i: int, t: Series, prec: Prec = None) -> Series:
        """f_i(t) by the normalized recursion."""
        return self.f_values(i, t, prec)[i]

    def e_eval(self, i: int, t: Series, method: str = "recursion",
               prec: Prec = None) -> Series:
        """e_i(t) by the Frobenius recursion or the defining product.

        Both routes avoid division, so an exact t gives an exact value.
        The product runs over all q**i polynomials of degree < i and is
        refused for i beyond the cost guard.
        """
        if t.field != self.field:
            raise OutOfDomain("argument lives in a different field")
        prec = _as_prec(prec)
        if method == "recursion":
            cur = t
            for j in range(1, i + 1):
                dprev = self.dfactorial(j - 1)
                cur = cur.frobenius(1) - dprev ** (self.field.q - 1) * cur
                if prec is not None:
                    cur = cur.truncate(prec)
            return cur
        if method == "product":
            if i > _PRODUCT_DEGREE_LIMIT:
                raise UnsupportedCase(
                    "product evaluation enumerates q**i factors; "
                    "limit is i <= %d" % _PRODUCT_DEGREE_LIMIT)
            subfield = self.field.subfield_elements()
            acc = Series.one(self.field)
            for coords in itertools.product(subfield, repeat=i):
                omega = Series.build(
                    self.field, {k: c for k, c in enumerate(coords)})
                acc = acc * (t - omega)
                if prec is not None:
                    acc = acc.truncate(prec)
            return acc
        raise ValueError("method must be 'recursion' or 'product'")

    def f_at_monomial(self, i: int, n: int, prec: Prec = None) -> Series:
        """f_i(x**n); zero for n < i, valuation n - i otherwise."""
        if n < 0:
            raise OutOfDomain("monomial exponent must be nonnegative")
        return self.f_eval(i, Series.x(self.field, n), prec=prec)
