"""Regularity classification and residual verification.

A coefficient sequence c_n is graded by gamma, the liminf of
q^(-n) * val(c_n).  Infinite gamma means the expansion converges
everywhere, positive finite gamma gives analyticity on balls of a
radius determined by gamma, gamma = 0 with decaying coefficients
still sums to a continuous function, and coefficients bounded away
from zero leave only polynomial arguments.  A finite prefix cannot
decide a liminf, so every verdict carries the mode that produced it:
a closed-form tail profile, or a heuristic look at observed
valuations.  Heuristic evidence never claims the analytic or
locally-analytic classes.

residual_check is the shared verification gate: it rebuilds the
defect of a claimed solution coefficientwise, optionally evaluates it
at sample points, and passes only when every valuation clears the
precision threshold.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence, Union

from .field import Prec, Series, _as_prec
from .operators import (CarlitzCoeffs, MatrixCarlitzCoeffs, apply_p,
                        carlitz_d, carlitz_delta, carlitz_eval, carlitz_tau)

EXACT = "exact-formula"
HEURISTIC = "finite-prefix-heuristic"

# below this many coefficients no tail statement is attempted
_MIN_PREFIX = 8

Coeffs = Union[CarlitzCoeffs, MatrixCarlitzCoeffs]


def _index_val(c: Coeffs, i: int):
    """Valuation at index i; matrices report their smallest entry."""
    ci = c[i]
    if isinstance(ci, Series):
        return ci.val
    return min(ci[a, b].val for a in range(ci.rows) for b in range(ci.cols))


def _fmt_val(v) -> str:
    return "inf" if v == math.inf else str(Fraction(v))


# -- gamma and strong singularity


def gamma_estimate(c: Coeffs):
    """Estimate gamma = liminf q^(-n) val(c_n).

    Returns (gamma, mode).  A tail profile or a complete expansion
    gives a closed form; otherwise the minimum over the observed
    second half stands in for the liminf, and fewer than 8
    coefficients yield (None, heuristic).
    """
    if c.profile is not None:
        return c.profile.gamma, EXACT
    if c.complete:
        # zero tail beyond the stored prefix
        return math.inf, EXACT
    q = c.ctx.field.q
    n = len(c)
    if n < _MIN_PREFIX:
        return None, HEURISTIC
    lo = n // 2
    finite = [(i, _index_val(c, i)) for i in range(lo, n)
              if _index_val(c, i) != math.inf]
    if not finite:
        return math.inf, HEURISTIC
    return min(Fraction(v) / q ** i for i, v in finite), HEURISTIC


class SingularityEvidence:
    """Outcome of the bounded-below test on |c_i|.

    verdict True means val(c_i) <= bound for all i >= start on the
    available evidence; False means the coefficients visibly decay;
    None means the prefix is too short or the trend is mixed.
    """

    __slots__ = ("verdict", "bound", "start", "mode")

    def __init__(self, verdict, bound, start, mode):
        object.__setattr__(self, "verdict", verdict)
        object.__setattr__(self, "bound", bound)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name, value):
        raise AttributeError("evidence is immutable")

    def __repr__(self):
        return ("SingularityEvidence(verdict=%r, bound=%r, start=%r, "
                "mode=%r)" % (self.verdict, self.bound, self.start,
                              self.mode))


def strong_singularity_test(c: Coeffs) -> SingularityEvidence:
    """Decide whether |c_i| stays >= some rho > 0 for all large i."""
    q = c.ctx.field.q
    prof = c.profile
    if prof is not None:
        if prof.decays:
            return SingularityEvidence(False, None, None, EXACT)
        # only the progression profiles can be non-decaying
        start = prof.start
        return SingularityEvidence(True, prof.val_at(start, q), start, EXACT)
    if c.complete:
        return SingularityEvidence(False, None, None, EXACT)
    n = len(c)
    if n < _MIN_PREFIX:
        return SingularityEvidence(None, None, None, HEURISTIC)
    lo = n // 2
    vals = [_index_val(c, i) for i in range(lo, n)]
    if any(v == math.inf for v in vals):
        return SingularityEvidence(False, None, None, HEURISTIC)
    if all(b <= a for a, b in zip(vals, vals[1:])):
        return SingularityEvidence(True, vals[0], lo, HEURISTIC)
    if all(b > a for a, b in zip(vals, vals[1:])):
        return SingularityEvidence(False, None, None, HEURISTIC)
    return SingularityEvidence(None, None, None, HEURISTIC)


# -- classification


class RegularityReport:
    """Classification of a coefficient sequence."""

    __slots__ = ("klass", "gamma", "ball_exponent", "evidence", "mode")

    def __init__(self, klass, gamma, ball_exponent, evidence, mode):
        object.__setattr__(self, "klass", klass)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "ball_exponent", ball_exponent)
        object.__setattr__(self, "evidence", evidence)
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name, value):
        raise AttributeError("reports are immutable")

    def as_machine(self):
        lines = ["class: %s" % self.klass,
                 "gamma: %s" % ("none" if self.gamma is None
                                else _fmt_val(self.gamma)),
                 "ball_exponent: %s" % ("none" if self.ball_exponent is None
                                        else self.ball_exponent),
                 "mode: %s" % self.mode]
        for n, v in self.evidence:
            lines.append("val.%d: %s" % (n, _fmt_val(v)))
        return lines

    def as_text(self):
        head = "class %s (mode %s)" % (self.klass, self.mode)
        if self.gamma is not None:
            head += ", gamma %s" % _fmt_val(self.gamma)
        if self.ball_exponent is not None:
            head += ", analytic on balls of radius q^-%d" % self.ball_exponent
        tbl = "  ".join("v(c_%d)=%s" % (n, _fmt_val(v))
                        for n, v in self.evidence)
        return head + "\n" + tbl


def _indicator_to_zero(evidence, q: int) -> bool:
    """Does q^(-n) val(c_n) visibly fall toward zero over the tail?

    True when the indicator strictly decreases across the observed
    second half and loses at least a factor q overall; a stable
    indicator (geometric valuation growth) stays undecided instead.
    """
    n = len(evidence)
    tail = [(i, v) for i, v in evidence[n // 2:] if v != math.inf]
    if len(tail) < 3:
        return False
    inds = [Fraction(v) / q ** i for i, v in tail]
    return (all(b < a for a, b in zip(inds, inds[1:]))
            and inds[-1] <= inds[0] / q)


def _ball_exponent(q: int, gamma: Fraction) -> int:
    # largest k with q^k <= (q-1)*gamma, then l = max(0, 1 - k) when the
    # power is exact and max(0, -k) otherwise, folded into one formula
    r = (q - 1) * Fraction(gamma)
    k = 0
    while q ** (k + 1) <= r:
        k += 1
    while q ** k > r:
        k -= 1
    fl = -k if q ** k == r else -(k + 1)
    return max(0, fl + 1)


def classify(c: Coeffs) -> RegularityReport:
    """Assign one of analytic, locally_analytic, continuous,
    strongly_singular, or inconclusive.

    Closed-form tail profiles decide exactly.  Heuristic evidence can
    support the continuous and strongly_singular classes, but the
    analytic and locally-analytic boundaries stay inconclusive
    without a formula.
    """
    q = c.ctx.field.q
    evidence = tuple((i, _index_val(c, i)) for i in range(len(c)))
    sing = strong_singularity_test(c)
    gamma, gmode = gamma_estimate(c)

    if sing.verdict is True:
        return RegularityReport("strongly_singular", gamma, None, evidence,
                                sing.mode)
    if gamma is None:
        return RegularityReport("inconclusive", None, None, evidence,
                                HEURISTIC)
    if gamma == math.inf:
        if gmode == EXACT:
            return RegularityReport("analytic", gamma, None, evidence, EXACT)
        return RegularityReport("inconclusive", gamma, None, evidence,
                                HEURISTIC)
    if gamma > 0:
        if gmode == EXACT:
            return RegularityReport("locally_analytic", gamma,
                                    _ball_exponent(q, gamma), evidence, EXACT)
        # a finite prefix of a decaying sequence always yields a
        # positive minimum; only a vanishing indicator trend supports
        # a definite (continuous) verdict
        if _indicator_to_zero(evidence, q):
            return RegularityReport("continuous", gamma, None, evidence,
                                    HEURISTIC)
        return RegularityReport("inconclusive", gamma, None, evidence,
                                HEURISTIC)
    # gamma <= 0: continuity needs the coefficients to actually decay
    if gmode == EXACT and c.profile is not None and c.profile.decays:
        return RegularityReport("continuous", gamma, None, evidence, EXACT)
    if sing.verdict is False:
        return RegularityReport("continuous", gamma, None, evidence,
                                sing.mode)
    return RegularityReport("inconclusive", gamma, None, evidence, HEURISTIC)


# -- residual verification


class ModelEq:
    """tau d u = lam u."""

    __slots__ = ("lam",)
    kind = "model"
    order = 1

    def __init__(self, lam):
        object.__setattr__(self, "lam", lam)

    def __setattr__(self, name, value):
        raise AttributeError("descriptors are immutable")


class SystemEq:
    """tau d u = sum_k pi_k tau^k u."""

    __slots__ = ("pi",)
    kind = "system"
    order = 1

    def __init__(self, pi):
        object.__setattr__(self, "pi", tuple(pi))

    def __setattr__(self, name, value):
        raise AttributeError("descriptors are immutable")


class EulerEq:
    """tau^m d^m u + sum_{k<m} b_k tau^k d^k u = 0 with b = (b_0, ...)."""

    __slots__ = ("b",)
    kind = "euler"

    def __init__(self, b):
        b = tuple(b)
        if not b:
            raise ValueError("euler descriptor needs at least b_0")
        object.__setattr__(self, "b", b)

    def __setattr__(self, name, value):
        raise AttributeError("descriptors are immutable")

    @property
    def order(self):
        return len(self.b)


class HypergeomEq:
    """The order-2 recursion with integer parameters a, b."""

    __slots__ = ("a", "b")
    kind = "hypergeom"
    order = 2

    def __init__(self, a, b):
        object.__setattr__(self, "a", int(a))
        object.__setattr__(self, "b", int(b))

    def __setattr__(self, name, value):
        raise AttributeError("descriptors are immutable")


EquationDescriptor = Union[ModelEq, SystemEq, EulerEq, HypergeomEq]


def _coerce_series(field, v) -> Series:
    if isinstance(v, Series):
        return v
    return Series.const(field, field.elem(v))


def _scaled(u: Coeffs, s: Series) -> Coeffs:
    if isinstance(u, MatrixCarlitzCoeffs):
        return u.lmul_scalar(s)
    return u.scale(s)


def _residual_coeffs(eq: EquationDescriptor, c: Coeffs) -> Coeffs:
    ctx = c.ctx
    field = ctx.field
    if isinstance(eq, ModelEq):
        lam = _coerce_series(field, eq.lam)
        return carlitz_delta(c) - _scaled(c, lam)
    if isinstance(eq, SystemEq):
        return carlitz_delta(c) - apply_p(eq.pi, c)
    if isinstance(eq, EulerEq):
        m = eq.order
        dpow = [c]
        for _ in range(m):
            dpow.append(carlitz_d(dpow[-1]))
        total = dpow[m]
        for _ in range(m):
            total = carlitz_tau(total)
        for k in range(m):
            term = dpow[k]
            for _ in range(k):
                term = carlitz_tau(term)
            total = total + _scaled(term, _coerce_series(field, eq.b[k]))
        return total
    if isinstance(eq, HypergeomEq):
        if not isinstance(c, CarlitzCoeffs):
            raise ValueError("hypergeom residuals are scalar only")
        # the step equation involves q-th roots, which would cap the
        # certified valuation at prec/q; its q-th power is root-free
        # and vanishes for exactly the same sequences
        bra = ctx.bracket
        rs = []
        for i in range(len(c) - 2):
            lin = bra(i) + bra(i + 1) - bra(-eq.a) - bra(-eq.b)
            quad = (bra(i) - bra(-eq.a)) * (bra(i) - bra(-eq.b))
            r = c[i + 2] - c[i + 2].frobenius(1)
            r = r + c[i + 1] * bra(i + 1)
            r = r - c[i + 1].frobenius(1) * lin.frobenius(1)
            r = r - c[i].frobenius(1) * quad.frobenius(1)
            rs.append(r)
        if not rs:
            raise ValueError("need at least 3 coefficients")
        return CarlitzCoeffs(ctx, rs)
    raise ValueError("unknown equation descriptor %r" % (eq,))


def _infer_prec(c: Coeffs):
    worst = None
    for i in range(len(c)):
        ci = c[i]
        entries = ([ci] if isinstance(ci, Series)
                   else [ci[a, b] for a in range(ci.rows)
                         for b in range(ci.cols)])
        for s in entries:
            if not s.is_exact():
                worst = s.prec if worst is None else min(worst, s.prec)
    return worst


class ResidualReport:
    """PASS/FAIL record for one residual_check run.

    entries pairs each certified coefficient index (residual index
    plus equation order) with the residual valuation there; failures
    lists the indices below threshold.  points carries one valuation
    per sample point, in input order.
    """

    __slots__ = ("kind", "order", "prec", "slack", "threshold", "entries",
                 "failures", "points", "point_failures", "passed")

    def __init__(self, kind, order, prec, slack, threshold, entries,
                 failures, points, point_failures, passed):
        for name, value in (("kind", kind), ("order", order),
                            ("prec", prec), ("slack", slack),
                            ("threshold", threshold), ("entries", entries),
                            ("failures", failures), ("points", points),
                            ("point_failures", point_failures),
                            ("passed", passed)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("reports are immutable")

    def as_machine(self):
        lines = ["kind: %s" % self.kind,
                 "order: %d" % self.order,
                 "prec: %s" % ("exact" if self.prec is None
                               else _fmt_val(self.prec)),
                 "slack: %d" % self.slack,
                 "threshold: %s" % _fmt_val(self.threshold),
                 "status: %s" % ("PASS" if self.passed else "FAIL")]
        for idx, v in self.entries:
            lines.append("residual.%d: %s" % (idx, _fmt_val(v)))
        for i, v in enumerate(self.points):
            lines.append("point.%d: %s" % (i, _fmt_val(v)))
        if self.failures:
            lines.append("failures: %s"
                         % ",".join(str(i) for i in self.failures))
        if self.point_failures:
            lines.append("point_failures: %s"
                         % ",".join(str(i) for i in self.point_failures))
        return lines

    def as_text(self):
        status = "PASS" if self.passed else "FAIL"
        head = ("%s %s equation, order %d, threshold %s"
                % (status, self.kind, self.order, _fmt_val(self.threshold)))
        body = "  ".join("r_%d=%s" % (idx, _fmt_val(v))
                         for idx, v in self.entries)
        lines = [head, body]
        if self.points:
            lines.append("points: " + "  ".join(
                "%d=%s" % (i, _fmt_val(v))
                for i, v in enumerate(self.points)))
        if not self.passed:
            bad = ["coefficient %d" % i for i in self.failures]
            bad += ["point %d" % i for i in self.point_failures]
            lines.append("below threshold: " + ", ".join(bad))
        return "\n".join(lines)


def residual_check(eq: EquationDescriptor, c: Coeffs,
                   points: Sequence[Series] = (),
                   prec: Prec = None) -> ResidualReport:
    """Verify a claimed solution against its equation.

    The residual expansion is rebuilt from c, indexed by the
    coefficient it certifies, and compared with threshold =
    prec - (order + 5).  When prec is omitted it is inferred from the
    stored precision of c; fully exact inputs must produce exactly
    zero residuals.  Each sample point contributes the valuation of
    the evaluated residual there.
    """
    order = eq.order
    slack = order + 5
    resid = _residual_coeffs(eq, c)
    prec = _as_prec(prec)
    if prec is None:
        prec = _infer_prec(c)
    threshold = math.inf if prec is None else prec - slack

    entries = []
    failures = []
    for i in range(len(resid)):
        v = _index_val(resid, i)
        idx = i + order
        entries.append((idx, v))
        if v < threshold:
            failures.append(idx)

    finite = [v for _, v in entries if v != math.inf]
    tail_bound = min(finite) if finite else math.inf

    point_vals = []
    point_failures = []
    for pi, t in enumerate(points):
        got = carlitz_eval(resid, t, prec=prec, tail_val=tail_bound)
        v = (got.val if isinstance(got, Series)
             else min(got[a, b].val for a in range(got.rows)
                      for b in range(got.cols)))
        point_vals.append(v)
        if v < threshold:
            point_failures.append(pi)

    passed = not failures and not point_failures
    return ResidualReport(eq.kind, order, prec, slack, threshold,
                          tuple(entries), tuple(failures),
                          tuple(point_vals), tuple(point_failures), passed)
