"""Exact ultrametric arithmetic over finite-field Laurent series.

This module implements the computable fragment of a completed algebraic
closure of K = F_q((x)) that the rest of the package works in:

    F_Q((x^(1/e))),   Q = p**(v*f),   q = p**v,

where the residue extension degree f is fixed when the field description
is created and the ramification index e grows on demand (taking q-th
roots or square roots of series rescales exponents; no embedding step is
ever needed because exponents are plain rationals).

Representation conventions:

  * ``FieldDesc`` describes F_Q as F_p[X]/(modulus) with a distinguished
    subfield F_q.  Elements are encoded as integers in [0, Q): the base-p
    digits of the encoding are the F_p coordinates in the power basis of
    the modulus.  Multiplication runs through precomputed discrete-log
    tables for a fixed generator, which caps Q at 2**16 by construction.
  * ``Series`` is a finite dict {exponent -> nonzero coefficient} plus an
    absolute precision.  Exponents are stored as integer numerators over
    a per-series ramification index e; e is reduced to its minimal value
    after every operation, so equal values have equal representations.
  * ``prec`` is a Fraction, or None for exact series (polynomial data
    such as brackets and Carlitz factorials).  Every stored exponent is
    strictly below prec.  The absolute value of a series is q**(-val).

Precision propagation follows the ultrametric error calculus:

  * add/sub:  min(prec_a, prec_b)
  * mul:      min(prec_a + val_b, prec_b + val_a)
  * div by b: numerator precision drops by val(b) (full rule in div())
  * frobenius by q**k: precision scales by q**k

Division, square roots and Artin-Schreier roots of *exact* series do not
terminate in general; those operations take an explicit ``prec`` cap and
raise ``PrecisionRequired`` when it is missing and needed.

All objects in this module are immutable once constructed.  Nothing here
mutates shared state after a ``FieldDesc`` has built its tables, so any
value can be used freely across threads.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, inf
from typing import Iterable, Mapping, Sequence, Union


# ---------------------------------------------------------------------------
# errors

class AlgebraError(Exception):
    """Base class for structured arithmetic errors."""


class PrecisionUnderflow(AlgebraError):
    """The result would carry no information at the requested precision."""

    def __init__(self, msg: str, required=None):
        super().__init__(msg)
        self.required = required


class PrecisionRequired(AlgebraError):
    """An exact input leads to a non-terminating expansion; pass prec."""


class ZeroDivisionToPrecision(AlgebraError):
    """Divisor has no known nonzero coefficient at its precision."""


class SingularToPrecision(AlgebraError):
    """No usable pivot remains; the matrix is singular to working precision."""


class OutOfDomain(AlgebraError):
    """Input violates a mathematical hypothesis of the operation."""


class NonSquareInField(AlgebraError):
    """Leading coefficient is not a square in F_Q; enlarge f to fix."""


class UnsupportedCase(AlgebraError):
    """Valid input outside the implemented parameter range."""


class IncompatibleFields(AlgebraError):
    """Operands belong to different coefficient fields."""


# ---------------------------------------------------------------------------
# F_p[X] helpers (coefficient lists, ascending, used only to build tables)

def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _ptrim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(out)


def _pmod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    # m is monic
    a = list(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        lead = a[-1]
        shift = len(a) - 1 - dm
        if lead:
            for i in range(dm + 1):
                a[shift + i] = (a[shift + i] - lead * m[i]) % p
        a.pop()
    return _ptrim(a)


def _pgcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        inv = pow(b[-1], -1, p)
        bm = [(c * inv) % p for c in b]
        a, b = bm, _pmod(a, bm, p)
    return a


def _ppowmod(a: Sequence[int], n: int, m: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, m, p)
    while n:
        if n & 1:
            result = _pmod(_pmul(result, base, p), m, p)
        base = _pmod(_pmul(base, base, p), m, p)
        n >>= 1
    return result


def _is_irreducible(m: Sequence[int], p: int) -> bool:
    """Rabin test for a monic polynomial over F_p."""
    n = len(m) - 1
    if n <= 0:
        return False
    x = [0, 1]
    xm = _pmod(x, m, p)
    # x^(p^n) == x mod m
    r = xm
    for _ in range(n):
        r = _ppowmod(r, p, m, p)
    pad = max(len(r), len(xm))
    diff = _ptrim([((r[i] if i < len(r) else 0)
                    - (xm[i] if i < len(xm) else 0)) % p
                   for i in range(pad)])
    if diff:
        return False
    primes = set()
    d, k = 2, n
    while d * d <= k:
        while k % d == 0:
            primes.add(d)
            k //= d
        d += 1
    if k > 1:
        primes.add(k)
    for r_ in primes:
        e = n // r_
        s = x
        for _ in range(e):
            s = _ppowmod(s, p, m, p)
        diff = list(s)
        while len(diff) < 2:
            diff.append(0)
        diff[1] = (diff[1] - 1) % p
        g = _pgcd(diff, m, p)
        if len(g) - 1 > 0:
            return False
    return True


def default_modulus(p: int, n: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree n over F_p.

    'Smallest' orders lower coefficient vectors as base-p integers; the
    choice is deterministic so two descriptions built from the same
    (p, v, f) are identical.
    """
    for low in range(p ** n):
        coeffs = []
        t = low
        for _ in range(n):
            coeffs.append(t % p)
            t //= p
        m = coeffs + [1]
        if _is_irreducible(m, p):
            return tuple(m)
    raise AlgebraError(f"no irreducible polynomial of degree {n} over F_{p}")


# ---------------------------------------------------------------------------
# field description

_MAX_Q = 1 << 16


class FieldDesc:
    """The coefficient field F_Q with distinguished subfield F_q.

    Parameters: characteristic p (prime), q = p**v, Q = q**f.  The modulus
    is a monic irreducible of degree n = v*f over F_p given by its
    ascending coefficient tuple; when omitted, a deterministic default is
    chosen.  ``label`` is only used when printing elements.
    """

    __slots__ = ("p", "v", "f", "n", "q", "Q", "modulus", "label",
                 "_exp", "_log", "_neg", "_add", "_subfield")

    def __init__(self, p: int, v: int = 1, f: int = 1,
                 modulus: Sequence[int] | None = None, label: str = "g"):
        if not _is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        if v < 1 or f < 1:
            raise ValueError("v and f must be positive")
        n = v * f
        Q = p ** n
        if Q > _MAX_Q:
            raise UnsupportedCase(
                f"Q = {Q} exceeds the table-backed limit {_MAX_Q}")
        if modulus is None:
            modulus = default_modulus(p, n)
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree v*f")
        if not _is_irreducible(list(modulus), p):
            raise ValueError("modulus is not irreducible over F_p")
        self.p, self.v, self.f, self.n = p, v, f, n
        self.q, self.Q = p ** v, Q
        self.modulus = modulus
        self.label = label
        self._build_tables()

    # -- construction of log/antilog tables

    def _raw_mul(self, a: int, b: int) -> int:
        p, n = self.p, self.n
        da = []
        while a:
            da.append(a % p)
            a //= p
        db = []
        while b:
            db.append(b % p)
            b //= p
        prod = _pmod(_pmul(da, db, p), list(self.modulus), p)
        enc = 0
        for c in reversed(prod):
            enc = enc * p + c
        return enc

    def _build_tables(self) -> None:
        Q = self.Q
        if Q == 2:
            gen = 1
        else:
            gen = 0
            for cand in range(2, Q):
                acc, order = cand, 1
                while acc != 1:
                    acc = self._raw_mul(acc, cand)
                    order += 1
                    if order > Q:
                        raise AlgebraError("generator search failed")
                if order == Q - 1:
                    gen = cand
                    break
            if not gen:
                raise AlgebraError("no multiplicative generator found")
        exp_t = [0] * (Q - 1)
        log_t = [-1] * Q
        acc = 1
        for k in range(Q - 1):
            exp_t[k] = acc
            log_t[acc] = k
            acc = self._raw_mul(acc, gen)
        self._exp, self._log = exp_t, log_t
        p = self.p
        self._neg = [0] * Q
        for a in range(Q):
            digits, t, shift = 0, a, 1
            while t:
                digits += ((p - t % p) % p) * shift
                t //= p
                shift *= p
            self._neg[a] = digits
        if Q <= 256 and p != 2:
            self._add = [[self._digit_add(a, b) for b in range(Q)]
                         for a in range(Q)]
        else:
            self._add = None
        step = (Q - 1) // (self.q - 1) if self.q > 1 else 1
        sub = {0}
        for j in range(self.q - 1):
            sub.add(exp_t[(j * step) % (Q - 1)] if Q > 2 else 1)
        self._subfield = tuple(sorted(sub))

    def _digit_add(self, a: int, b: int) -> int:
        p = self.p
        out, shift = 0, 1
        while a or b:
            out += ((a % p + b % p) % p) * shift
            a //= p
            b //= p
            shift *= p
        return out

    # -- encoded element arithmetic (ints in [0, Q))

    def eadd(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if self._add is not None:
            return self._add[a][b]
        return self._digit_add(a, b)

    def eneg(self, a: int) -> int:
        return self._neg[a]

    def esub(self, a: int, b: int) -> int:
        return self.eadd(a, self._neg[b])

    def emul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.Q - 1)]

    def einv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero field element")
        return self._exp[(-self._log[a]) % (self.Q - 1)]

    def ediv(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero field element")
        if a == 0:
            return 0
        return self._exp[(self._log[a] - self._log[b]) % (self.Q - 1)]

    def epow(self, a: int, m: int) -> int:
        if a == 0:
            if m > 0:
                return 0
            if m == 0:
                return 1
            raise ZeroDivisionError("negative power of zero")
        return self._exp[(self._log[a] * m) % (self.Q - 1)]

    def efrob(self, a: int, k: int) -> int:
        """a ** (q**k); k may be negative (Frobenius is a bijection)."""
        if a == 0:
            return 0
        t = pow(self.p, (self.v * k) % self.n, self.Q - 1)
        return self._exp[(self._log[a] * t) % (self.Q - 1)]

    def esqrt(self, a: int) -> int:
        """Canonical square root: of the two roots, the one with the
        smaller discrete logarithm.  Raises NonSquareInField for
        quadratic non-residues (odd p)."""
        if a == 0:
            return 0
        k = self._log[a]
        if self.p == 2:
            return self._exp[(k * pow(2, self.n - 1, self.Q - 1)) % (self.Q - 1)]
        if k % 2:
            raise NonSquareInField(
                "leading coefficient is not a square in F_%d; rebuild the "
                "field with residue degree f = %d" % (self.Q, 2 * self.f))
        return self._exp[k // 2]

    def e_in_subfield(self, a: int) -> bool:
        if a == 0 or self.Q == self.q:
            return True
        return self._log[a] % ((self.Q - 1) // (self.q - 1)) == 0

    # -- element construction

    def elem(self, value: Union[int, "FieldElem", Sequence[int]]) -> "FieldElem":
        """Coerce an int (reduced mod p for prime-field literals when
        below p, otherwise read as an encoding), a coordinate sequence,
        or an element of the same field."""
        if isinstance(value, FieldElem):
            if value.field != self:
                raise IncompatibleFields("element from a different field")
            return value
        if isinstance(value, int):
            enc = value % self.p if -self.p < value < self.p else value
            if not 0 <= enc < self.Q:
                raise ValueError(f"encoding {value} out of range")
            return FieldElem(self, enc)
        return self.from_coords(value)

    def from_coords(self, coords: Sequence[int]) -> "FieldElem":
        if len(coords) > self.n:
            raise ValueError("too many coordinates")
        enc = 0
        for c in reversed([c % self.p for c in coords]):
            enc = enc * self.p + c
        return FieldElem(self, enc)

    def zero(self) -> "FieldElem":
        return FieldElem(self, 0)

    def one(self) -> "FieldElem":
        return FieldElem(self, 1)

    def gen(self) -> "FieldElem":
        """The class of X mod modulus (encoding p); for n = 1 this is the
        residue of 0, so prime fields should use integer literals."""
        return FieldElem(self, self.p % self.Q)

    def subfield_elements(self) -> tuple["FieldElem", ...]:
        """All elements of the distinguished subfield F_q, sorted by
        encoding (deterministic enumeration order)."""
        return tuple(FieldElem(self, a) for a in self._subfield)

    def all_elements(self) -> Iterable["FieldElem"]:
        return (FieldElem(self, a) for a in range(self.Q))

    # -- identity

    def __eq__(self, other) -> bool:
        return (isinstance(other, FieldDesc)
                and (self is other
                     or (self.p, self.v, self.f, self.modulus)
                     == (other.p, other.v, other.f, other.modulus)))

    def __hash__(self) -> int:
        return hash((self.p, self.v, self.f, self.modulus))

    def __repr__(self) -> str:
        return (f"FieldDesc(p={self.p}, v={self.v}, f={self.f}, "
                f"modulus={list(self.modulus)})")


class FieldElem:
    """An element of F_Q, immutable, encoded as an int in [0, Q)."""

    __slots__ = ("field", "enc")

    def __init__(self, field: FieldDesc, enc: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "enc", enc)

    def __setattr__(self, *_):
        raise AttributeError("FieldElem is immutable")

    @property
    def coords(self) -> tuple[int, ...]:
        """F_p coordinates in the power basis, ascending."""
        p, t, out = self.field.p, self.enc, []
        for _ in range(self.field.n):
            out.append(t % p)
            t //= p
        return tuple(out)

    def is_zero(self) -> bool:
        return self.enc == 0

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise IncompatibleFields("elements of different fields")
            return other
        if isinstance(other, int):
            return self.field.elem(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.field.eadd(self.enc, o.enc))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.field.esub(self.enc, o.enc))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.field.esub(o.enc, self.enc))

    def __neg__(self):
        return FieldElem(self.field, self.field.eneg(self.enc))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.field.emul(self.enc, o.enc))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.field.ediv(self.enc, o.enc))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, self.field.ediv(o.enc, self.enc))

    def __pow__(self, m: int):
        return FieldElem(self.field, self.field.epow(self.enc, m))

    def frob(self, k: int = 1) -> "FieldElem":
        """Raise to the q**k power (k < 0 applies the inverse)."""
        return FieldElem(self.field, self.field.efrob(self.enc, k))

    def sqrt(self) -> "FieldElem":
        return FieldElem(self.field, self.field.esqrt(self.enc))

    def in_subfield(self) -> bool:
        """True when the element lies in F_q."""
        return self.field.e_in_subfield(self.enc)

    def inverse(self) -> "FieldElem":
        return FieldElem(self.field, self.field.einv(self.enc))

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            try:
                other = self.field.elem(other)
            except ValueError:
                return False
        return (isinstance(other, FieldElem) and self.field == other.field
                and self.enc == other.enc)

    def __hash__(self) -> int:
        return hash((self.enc, self.field.p, self.field.n))

    def __bool__(self) -> bool:
        return self.enc != 0

    def __str__(self) -> str:
        if self.field.n == 1:
            return str(self.enc)
        parts = []
        for i, c in enumerate(self.coords):
            if not c:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                head = "" if c == 1 else str(c) + "*"
                var = self.field.label if i == 1 else f"{self.field.label}^{i}"
                parts.append(head + var)
        return "+".join(reversed(parts)) if parts else "0"

    def __repr__(self) -> str:
        return f"FieldElem({self})"


# ---------------------------------------------------------------------------
# series

Prec = Union[Fraction, int, None]
ExpLike = Union[Fraction, int]


def _as_prec(prec: Prec) -> Fraction | None:
    if prec is None:
        return None
    return Fraction(prec)


def _min_prec(a: Fraction | None, b: Fraction | None) -> Fraction | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class Series:
    """Element of F_Q((x^(1/e))) known below an absolute precision.

    terms maps scaled exponents to nonzero encoded coefficients: the pair
    (k, c) stands for the monomial decode(c) * x**(k/e).  prec is the
    exponent cutoff (Fraction) or None when the series is exact.  The
    canonical-form invariants (no zero coefficients, every k/e < prec,
    minimal e) are established by the constructor; all arithmetic goes
    through it.
    """

    __slots__ = ("field", "e", "terms", "prec")

    def __init__(self, field: FieldDesc, e: int, terms: Mapping[int, int],
                 prec: Fraction | None):
        if e < 1:
            raise ValueError("ramification index must be positive")
        if prec is not None:
            terms = {k: c for k, c in terms.items()
                     if c and Fraction(k, e) < prec}
        else:
            terms = {k: c for k, c in terms.items() if c}
        if terms:
            g = e
            for k in terms:
                g = gcd(g, k)
                if g == 1:
                    break
            if g > 1:
                terms = {k // g: c for k, c in terms.items()}
                e //= g
        else:
            e = 1
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, *_):
        raise AttributeError("Series is immutable")

    # -- factories

    @classmethod
    def build(cls, field: FieldDesc,
              terms: Mapping[ExpLike, Union[FieldElem, int]],
              prec: Prec = None) -> "Series":
        """General constructor from {exponent: coefficient}."""
        e = 1
        frs = {}
        for exp, c in terms.items():
            fr = Fraction(exp)
            e = _lcm(e, fr.denominator)
            frs[fr] = field.elem(c).enc
        scaled = {int(fr * e): c for fr, c in frs.items()}
        return cls(field, e, scaled, _as_prec(prec))

    @classmethod
    def zero(cls, field: FieldDesc, prec: Prec = None) -> "Series":
        return cls(field, 1, {}, _as_prec(prec))

    @classmethod
    def one(cls, field: FieldDesc) -> "Series":
        return cls(field, 1, {0: 1}, None)

    @classmethod
    def const(cls, field: FieldDesc, c: Union[FieldElem, int]) -> "Series":
        return cls(field, 1, {0: field.elem(c).enc}, None)

    @classmethod
    def x(cls, field: FieldDesc, power: ExpLike = 1,
          coeff: Union[FieldElem, int] = 1) -> "Series":
        fr = Fraction(power)
        return cls(field, fr.denominator,
                   {fr.numerator: field.elem(coeff).enc}, None)

    # -- inspection

    def is_zero(self) -> bool:
        """No known nonzero coefficient (exact zero or zero to prec)."""
        return not self.terms

    def is_exact(self) -> bool:
        return self.prec is None

    def is_exact_zero(self) -> bool:
        return not self.terms and self.prec is None

    @property
    def val(self):
        """Valuation: least stored exponent.  For a series with no stored
        terms this is the precision (a sound lower bound: the value has
        absolute value <= q**(-prec)), and +inf for the exact zero."""
        if self.terms:
            return Fraction(min(self.terms), self.e)
        return self.prec if self.prec is not None else inf

    def leading(self) -> tuple[Fraction, FieldElem]:
        if not self.terms:
            raise AlgebraError("zero series has no leading term")
        k = min(self.terms)
        return Fraction(k, self.e), FieldElem(self.field, self.terms[k])

    def coeff(self, exp: ExpLike) -> FieldElem:
        scaled = Fraction(exp) * self.e
        if scaled.denominator != 1:
            return self.field.zero()
        return FieldElem(self.field, self.terms.get(int(scaled), 0))

    def exponents(self) -> list[Fraction]:
        return [Fraction(k, self.e) for k in sorted(self.terms)]

    def support_size(self) -> int:
        return len(self.terms)

    def degree(self):
        """Largest stored exponent (None for a termless series)."""
        if not self.terms:
            return None
        return Fraction(max(self.terms), self.e)

    # -- helpers

    def _compat(self, other: "Series") -> None:
        if self.field != other.field:
            raise IncompatibleFields("series over different fields")

    def _unify(self, other: "Series") -> tuple[int, dict, dict]:
        L = _lcm(self.e, other.e)
        sa, sb = L // self.e, L // other.e
        ta = self.terms if sa == 1 else {k * sa: c for k, c in self.terms.items()}
        tb = other.terms if sb == 1 else {k * sb: c for k, c in other.terms.items()}
        return L, ta, tb

    def _coerce(self, other):
        if isinstance(other, Series):
            self._compat(other)
            return other
        if isinstance(other, (FieldElem, int)):
            return Series.const(self.field, self.field.elem(other))
        return NotImplemented

    # -- ring operations

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        L, ta, tb = self._unify(o)
        out = dict(ta)
        eadd = self.field.eadd
        for k, c in tb.items():
            s = eadd(out.get(k, 0), c)
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Series(self.field, L, out, _min_prec(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        neg = self.field.eneg
        return Series(self.field, self.e,
                      {k: neg(c) for k, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def _mul_prec(self, other: "Series") -> Fraction | None:
        pa = None if self.prec is None else self.prec + other.val
        pb = None if other.prec is None else other.prec + self.val
        if pa is not None and pa == inf:
            pa = None
        if pb is not None and pb == inf:
            pb = None
        return _min_prec(pa, pb)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.is_exact_zero() or o.is_exact_zero():
            return Series.zero(self.field)
        prec = self._mul_prec(o)
        if not self.terms or not o.terms:
            return Series(self.field, 1, {}, prec)
        L, ta, tb = self._unify(o)
        cut = None if prec is None else prec * L
        emul, eadd = self.field.emul, self.field.eadd
        out: dict[int, int] = {}
        if len(ta) > len(tb):
            ta, tb = tb, ta
        for ka, ca in ta.items():
            for kb, cb in tb.items():
                k = ka + kb
                if cut is not None and k >= cut:
                    continue
                s = eadd(out.get(k, 0), emul(ca, cb))
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return Series(self.field, L, out, prec)

    __rmul__ = __mul__

    def scale(self, c: Union[FieldElem, int]) -> "Series":
        ce = self.field.elem(c).enc
        if ce == 0:
            return Series(self.field, 1, {}, self.prec) \
                if self.prec is not None else Series.zero(self.field)
        emul = self.field.emul
        return Series(self.field, self.e,
                      {k: emul(v, ce) for k, v in self.terms.items()}, self.prec)

    def shift(self, r: ExpLike) -> "Series":
        """Multiply by x**r."""
        fr = Fraction(r)
        L = _lcm(self.e, fr.denominator)
        s = L // self.e
        off = int(fr * L)
        prec = None if self.prec is None else self.prec + fr
        return Series(self.field, L,
                      {k * s + off: c for k, c in self.terms.items()}, prec)

    def __pow__(self, n: int) -> "Series":
        if n < 0:
            raise ValueError("negative powers: use div")
        result = Series.one(self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def div(self, other: "Series", prec: Prec = None,
            max_slots: int = 1 << 14) -> "Series":
        """Long division.  The output precision is the ultrametric bound

            min(prec_a - val_b,  val_a + prec_b - 2*val_b,  prec)

        and when every bound is None (both operands exact, no cap) the
        division must terminate within max_slots quotient slots, else
        PrecisionRequired is raised.
        """
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError("cannot divide by %r" % (other,))
        if not o.terms:
            raise ZeroDivisionToPrecision(
                "divisor has no nonzero coefficient at precision %s" % (o.prec,))
        prec = _as_prec(prec)
        vb = o.val
        if self.is_exact_zero():
            return Series.zero(self.field) if prec is None \
                else Series(self.field, 1, {}, prec)
        va = self.val
        bounds = [prec]
        if self.prec is not None:
            bounds.append(self.prec - vb)
        if o.prec is not None:
            bounds.append(va + o.prec - 2 * vb)
        bounds = [b for b in bounds if b is not None]
        T = min(bounds) if bounds else None
        if not self.terms:
            return Series(self.field, 1, {}, T)
        if T is not None and T <= va - vb:
            raise PrecisionUnderflow(
                "quotient known to no precision beyond its valuation",
                required=va - vb)
        L, ta, tb = self._unify(o)
        cutoff = None if T is None else T * L
        kb = min(tb)
        cb = tb[kb]
        rem_cut = None if cutoff is None else cutoff + kb
        rem = {k: c for k, c in ta.items()
               if rem_cut is None or k < rem_cut}
        quo: dict[int, int] = {}
        ediv, emul, esub = self.field.ediv, self.field.emul, self.field.esub
        steps = 0
        while rem:
            kr = min(rem)
            kq = kr - kb
            if cutoff is not None and kq >= cutoff:
                break
            steps += 1
            if steps > max_slots:
                raise PrecisionRequired(
                    "exact division does not terminate; pass prec")
            qc = ediv(rem.pop(kr), cb)
            quo[kq] = qc
            for k, c in tb.items():
                if k == kb:
                    continue
                kk = kq + k
                if rem_cut is not None and kk >= rem_cut:
                    continue
                s = esub(rem.get(kk, 0), emul(qc, c))
                if s:
                    rem[kk] = s
                else:
                    rem.pop(kk, None)
        return Series(self.field, L, quo, T)

    def __truediv__(self, other):
        return self.div(other)

    # -- precision management

    def truncate(self, prec: Prec) -> "Series":
        """Restrict knowledge to exponents below prec."""
        return Series(self.field, self.e, self.terms,
                      _min_prec(self.prec, _as_prec(prec)))

    def as_exact(self) -> "Series":
        """Reinterpret the stored terms as an exact polynomial.  This
        forgets the precision bound; only callers that can prove the tail
        vanishes should use it."""
        return Series(self.field, self.e, self.terms, None)

    # -- Frobenius

    def frobenius(self, k: int = 1) -> "Series":
        """Componentwise q**k power: coefficients are raised to q**k and
        exponents (and precision) scale by q**k.  Negative k extracts
        q-th roots, enlarging the ramification index."""
        if k == 0:
            return self
        field = self.field
        q = field.q
        efrob = field.efrob
        if k > 0:
            m = q ** k
            terms = {kk * m: efrob(c, k) for kk, c in self.terms.items()}
            prec = None if self.prec is None else self.prec * m
            return Series(field, self.e, terms, prec)
        m = q ** (-k)
        terms = {kk: efrob(c, k) for kk, c in self.terms.items()}
        prec = None if self.prec is None else self.prec / m
        return Series(field, self.e * m, terms, prec)

    # -- comparison and display

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, FieldElem)):
            other = Series.const(self.field, self.field.elem(other))
        if not isinstance(other, Series):
            return NotImplemented
        return (self.field == other.field and self.e == other.e
                and self.prec == other.prec and self.terms == other.terms)

    def agrees_with(self, other: "Series", prec: Prec) -> bool:
        """True when self - other vanishes below the given exponent."""
        return (self - other).val >= Fraction(prec)

    def __str__(self) -> str:
        parts = []
        for k in sorted(self.terms):
            c = FieldElem(self.field, self.terms[k])
            ex = Fraction(k, self.e)
            cs = str(c)
            if "+" in cs:
                cs = "(%s)" % cs
            if ex == 0:
                parts.append(cs)
            else:
                xs = "x" if ex == 1 else (
                    "x^%d" % ex if ex.denominator == 1 else "x^(%s)" % ex)
                parts.append(xs if cs == "1" else f"{cs}*{xs}")
        body = " + ".join(parts) if parts else "0"
        if self.prec is not None:
            tail = ("O(x^%s)" % self.prec if self.prec.denominator == 1
                    else "O(x^(%s))" % self.prec)
            body = f"{body} + {tail}" if parts else tail
        return body

    def __repr__(self) -> str:
        return f"Series({self})"


# ---------------------------------------------------------------------------
# module-level series operations

def frobenius(s: Series, k: int = 1) -> Series:
    """Apply the q-power Frobenius k times (k < 0 for roots)."""
    return s.frobenius(k)


def is_subfield_polynomial(s: Series) -> bool:
    """True when s is exactly a polynomial in x with coefficients in F_q.

    Truncated series never qualify: a finite-precision value cannot
    certify that its unknown tail vanishes.
    """
    if not s.is_exact() or s.e != 1:
        return False
    if any(k < 0 for k in s.terms):
        return False
    return all(s.field.e_in_subfield(c) for c in s.terms.values())


def sqrt(s: Series, prec: Prec = None) -> Series:
    """Square root of a series, odd characteristic only.

    The leading coefficient root is chosen canonically (smaller discrete
    log), which pins down the whole root.  Exact perfect squares are
    returned exactly; other exact inputs need a precision cap.
    """
    field = s.field
    if field.p == 2:
        raise UnsupportedCase("series square root requires odd characteristic")
    if s.is_exact_zero():
        return s
    if not s.terms:
        raise OutOfDomain("square root of a series that is zero to precision")
    w, lead = s.leading()
    r0 = lead.sqrt()
    prec = _as_prec(prec)
    want_exact = s.prec is None and prec is None
    if want_exact:
        span = s.degree() - w
        target_rel = max(2 * span + 2, Fraction(16))
    else:
        total = _min_prec(prec, s.prec)
        target_rel = total - w
        if target_rel <= 0:
            raise PrecisionUnderflow(
                "requested precision does not reach beyond the root's valuation",
                required=w)
    unit = s.shift(-w).scale(lead.inverse())  # 1 + positive-valuation tail
    h = Series.one(field)
    inv2 = field.elem(pow(2, -1, field.p))
    # Newton: h <- (h + unit/h)/2 doubles the valuation of h*h - unit.
    # The iterate is carried exact (it is a candidate, not a measurement);
    # accuracy is judged solely through the residual, so a finite iterate
    # precision can never stall the refinement.
    rounds = 0
    while True:
        err = (h * h - unit).truncate(target_rel)
        ev = err.val
        if ev >= target_rel:
            break
        rounds += 1
        if rounds > 200:
            raise AlgebraError("square-root iteration failed to converge")
        h = ((h + unit.div(h, prec=min(2 * ev, target_rel))) * inv2)
        h = h.truncate(target_rel).as_exact()
    root = h.shift(w / 2).scale(r0)
    if want_exact:
        cand = root.as_exact()
        if (cand * cand - s).is_exact_zero():
            return cand
        raise PrecisionRequired(
            "series is not an exact square; pass prec for a truncated root")
    return root.truncate(w / 2 + target_rel)


def artin_schreier(v: Series, want_all: bool = False, prec: Prec = None):
    """Solve z**(1/q) - z = v for |v| < 1.

    The distinguished small root is the telescoping sum
    z0 = v**q + v**(q**2) + ..., with |z0| = |v|**q.  The remaining q - 1
    roots are z0 + theta for nonzero theta in F_q and have absolute value
    exactly 1.  Returns z0, or the tuple of all q roots (ordered by the
    encoding of theta) when want_all is set.
    """
    field = v.field
    prec = _as_prec(prec)
    if v.is_exact_zero():
        z0 = Series.zero(field)
    else:
        if v.terms and v.val <= 0:
            raise OutOfDomain(
                "small-root construction needs |v| < 1 (valuation > 0)")
        if not v.terms and v.prec <= 0:
            raise OutOfDomain("v must be known to positive precision")
        cap = prec
        if v.prec is not None:
            qp = v.prec * field.q
            cap = qp if cap is None else min(cap, qp)
        if cap is None:
            raise PrecisionRequired(
                "the telescoping series for an exact v does not terminate; "
                "pass prec")
        if not v.terms:
            z0 = Series(field, 1, {}, cap)
        else:
            acc = Series(field, 1, {}, cap)
            w = v.frobenius(1).truncate(cap)
            while True:
                if w.terms:
                    acc = acc + w
                if w.val >= cap:
                    break
                w = w.frobenius(1).truncate(cap)
            z0 = acc.truncate(cap)
    if not want_all:
        return z0
    return tuple(z0 + Series.const(field, th)
                 for th in field.subfield_elements())


# ---------------------------------------------------------------------------
# matrices of series

class SeriesMatrix:
    """Immutable rectangular matrix of Series over one field.

    The max-norm conventions follow the scalar case: the matrix valuation
    is the least entry valuation, so |M| = q**(-val).
    """

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: FieldDesc, data: Sequence[Sequence[Series]]):
        rows = len(data)
        cols = len(data[0]) if rows else 0
        for row in data:
            if len(row) != cols:
                raise ValueError("ragged matrix")
            for s in row:
                if s.field != field:
                    raise IncompatibleFields("entry over a different field")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", tuple(tuple(row) for row in data))

    def __setattr__(self, *_):
        raise AttributeError("SeriesMatrix is immutable")

    @classmethod
    def identity(cls, field: FieldDesc, m: int) -> "SeriesMatrix":
        one, zero = Series.one(field), Series.zero(field)
        return cls(field, [[one if i == j else zero for j in range(m)]
                           for i in range(m)])

    @classmethod
    def zeros(cls, field: FieldDesc, rows: int, cols: int) -> "SeriesMatrix":
        zero = Series.zero(field)
        return cls(field, [[zero] * cols for _ in range(rows)])

    @classmethod
    def scalar(cls, s: Series, m: int) -> "SeriesMatrix":
        zero = Series.zero(s.field)
        return cls(s.field, [[s if i == j else zero for j in range(m)]
                             for i in range(m)])

    def __getitem__(self, ij: tuple[int, int]) -> Series:
        return self.data[ij[0]][ij[1]]

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return SeriesMatrix(self.field, [
            [a + b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.data, other.data)])

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return SeriesMatrix(self.field, [
            [a - b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.data, other.data)])

    def __neg__(self) -> "SeriesMatrix":
        return SeriesMatrix(self.field,
                            [[-a for a in row] for row in self.data])

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Series.zero(self.field)
                for k in range(self.cols):
                    acc = acc + self.data[i][k] * other.data[k][j]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(self.field, out)

    def scale(self, s: Union[Series, FieldElem, int]) -> "SeriesMatrix":
        if not isinstance(s, Series):
            s = Series.const(self.field, self.field.elem(s))
        return SeriesMatrix(self.field,
                            [[a * s for a in row] for row in self.data])

    def frobenius(self, k: int = 1) -> "SeriesMatrix":
        return SeriesMatrix(self.field, [[a.frobenius(k) for a in row]
                                         for row in self.data])

    def truncate(self, prec: Prec) -> "SeriesMatrix":
        return SeriesMatrix(self.field, [[a.truncate(prec) for a in row]
                                         for row in self.data])

    @property
    def val(self):
        """Least entry valuation; inf for an exactly zero matrix."""
        return min((a.val for row in self.data for a in row), default=inf)

    def is_zero(self) -> bool:
        return all(a.is_zero() for row in self.data for a in row)

    def column(self, j: int) -> list[Series]:
        return [self.data[i][j] for i in range(self.rows)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, SeriesMatrix) and self.field == other.field
                and self.data == other.data)

    def __repr__(self) -> str:
        return f"SeriesMatrix({self.rows}x{self.cols})"

    def __str__(self) -> str:
        return "\n".join("[ " + " | ".join(str(a) for a in row) + " ]"
                         for row in self.data)


def mat_solve(a: SeriesMatrix, b: SeriesMatrix, prec: Prec = None) -> SeriesMatrix:
    """Solve a @ x = b by Gaussian elimination.

    Pivots maximize absolute value (minimize valuation) per column; a
    column whose remaining entries are all zero to working precision
    raises SingularToPrecision.  An optional prec pre-truncates both
    operands so exact inputs cannot force non-terminating divisions.
    """
    if a.rows != a.cols:
        raise ValueError("coefficient matrix must be square")
    if b.rows != a.rows:
        raise ValueError("right-hand side has wrong number of rows")
    if prec is not None:
        a = a.truncate(prec)
        b = b.truncate(prec)
    m, nrhs = a.rows, b.cols
    aw = [list(row) for row in a.data]
    bw = [list(row) for row in b.data]
    for col in range(m):
        piv, pv = -1, inf
        for i in range(col, m):
            entry = aw[i][col]
            if not entry.is_zero() and entry.val < pv:
                piv, pv = i, entry.val
        if piv < 0:
            raise SingularToPrecision(
                "matrix is singular to working precision at column %d" % col)
        if piv != col:
            aw[col], aw[piv] = aw[piv], aw[col]
            bw[col], bw[piv] = bw[piv], bw[col]
        pivot = aw[col][col]
        for i in range(col + 1, m):
            entry = aw[i][col]
            if entry.is_zero():
                continue
            factor = entry.div(pivot)
            for j in range(col, m):
                aw[i][j] = aw[i][j] - factor * aw[col][j]
            for j in range(nrhs):
                bw[i][j] = bw[i][j] - factor * bw[col][j]
    xs = [[None] * nrhs for _ in range(m)]
    for i in range(m - 1, -1, -1):
        for j in range(nrhs):
            acc = bw[i][j]
            for k in range(i + 1, m):
                acc = acc - aw[i][k] * xs[k][j]
            xs[i][j] = acc.div(aw[i][i])
    return SeriesMatrix(a.field, xs)
