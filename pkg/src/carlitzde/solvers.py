"""Constructive solvers for regular-singular F_q-linear equations.

Four families, all producing basis-coefficient expansions:

  * the model equation            tau d u = lambda u,
  * first-order systems           tau d u = P(tau) u  with
    P(tau) = pi_0 + pi_1 tau + ... + pi_J tau^J, |pi_0| < 1,
  * Euler-type scalar equations   tau^m d^m u + b_{m-1} tau^{m-1} d^{m-1} u
    + ... + b_0 u = 0, via their bidiagonal companion system,
  * the hypergeometric recursion, whose step is an inverse-Frobenius
    Artin-Schreier equation with q root branches.

The model recurrence c_{j+1} = (lambda - [j]) c_j drives everything:
systems are solved as u(t) = sum_k w_k tau^k(g(t)) on top of the model
solution g, and Euler equations reduce to the model after an eigenvalue
split.  Solvers never refuse |lambda| >= 1: the resulting expansions
are meaningful on polynomial arguments and are flagged through their
valuation profiles instead.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .field import (AlgebraError, OutOfDomain, Prec, PrecisionRequired,
                    PrecisionUnderflow, Series, SeriesMatrix,
                    SingularToPrecision, UnsupportedCase, _as_prec,
                    artin_schreier, mat_solve, sqrt)
from .carlitz import CarlitzContext
from .operators import (ArithmeticTail, CarlitzCoeffs, ExponentialTail,
                        FiniteTail, MatrixCarlitzCoeffs)


class SpectralConditionError(AlgebraError):
    """The step-k coefficient equation of a system solve is singular.

    This is the operational face of eigenvalue resonance: some pair of
    eigenvalues of the leading coefficient satisfies
    l_i - l_j^(q^k) = [k], so the Frobenius twist of the spectrum meets
    the spectrum shifted by the bracket and w_k is not determined.
    """

    def __init__(self, k: int, cause=None):
        super().__init__(
            "coefficient equation at step %d is singular to working "
            "precision: the leading coefficient's spectrum meets its "
            "q^%d-twist shifted by the bracket" % (k, k))
        self.k = k
        self.cause = cause


def _as_series(field, v) -> Series:
    if isinstance(v, Series):
        return v
    return Series.const(field, field.elem(v))


# -- the model equation


class ModelSolution:
    """Solution data for tau d u = lambda u with u(1) = c0."""

    __slots__ = ("lam", "c0", "coeffs")

    def __init__(self, lam, c0, coeffs):
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("solutions are immutable")

    @property
    def continuous(self) -> bool:
        """Whether the expansion can define a continuous function.

        Coefficients must tend to zero; for the model equation this is
        exactly |lambda| < 1.  With a truncated lambda of no visible
        terms the question is undecidable and we answer pessimistically.
        """
        lam = self.lam
        v = lam.val
        return bool(lam.terms or lam.is_exact()) and v > 0


def _bracket_index_of(ctx: CarlitzContext, lam: Series) -> Optional[int]:
    """j with lam = [j] exactly, if one exists (exact lam only)."""
    if not lam.is_exact():
        return None
    if lam.is_exact_zero():
        return 0
    if not lam.terms:
        return None
    q = ctx.field.q
    deg = lam.degree()
    j = 0
    while Fraction(q) ** j <= deg:
        if lam == ctx.bracket(j):
            return j
        j += 1
    return None


def _first_n_above(q: int, nu: Fraction) -> int:
    n = 0
    while Fraction(q) ** n <= nu:
        n += 1
    return n


def model_scalar(ctx: CarlitzContext, lam, c0, n: int,
                 prec: Prec = None) -> ModelSolution:
    """c_{j+1} = (lambda - [j]) c_j, j = 0..n-1, with a tail profile.

    The profile is attached only when the coefficient valuations admit
    a closed form: lambda = [j] (expansion terminates), lambda = -x
    (valuations grow like q^n/(q-1)), and otherwise whenever
    val(lambda + x) is certain, which pins the eventual arithmetic
    progression of valuations.
    """
    field = ctx.field
    lam = _as_series(field, lam)
    c0 = _as_series(field, c0)
    prec = _as_prec(prec)
    q = field.q

    if c0.is_exact_zero():
        coeffs = CarlitzCoeffs(ctx, [c0], complete=True,
                               profile=FiniteTail(0))
        return ModelSolution(lam, c0, coeffs)

    shifted = lam + Series.x(field)
    jhit = _bracket_index_of(ctx, lam)
    need = n
    profile = None
    complete = False

    if jhit is not None:
        profile = FiniteTail(jhit)
        complete = True
        need = max(n, jhit + 1)
    elif shifted.is_exact_zero():
        alpha = Fraction(1, q - 1)
        profile = ExponentialTail(0, alpha, c0.val - alpha)
    elif shifted.terms:
        nu = shifted.val
        n0 = _first_n_above(q, nu)
        need = max(n, n0)

    cs = [c0]
    cur = c0
    for j in range(need):
        cur = (lam - ctx.bracket(j)) * cur
        # cap even exact intermediates: the bracket terms x^(q^j) pile
        # up multiplicatively and the caller asked for prec anyway
        if prec is not None:
            cur = cur.truncate(prec)
        cs.append(cur)

    if profile is None and shifted.terms:
        nu = shifted.val
        n0 = _first_n_above(q, nu)
        base = cs[n0]
        if base.terms:
            profile = ArithmeticTail(n0, base.val, nu)
        elif c0.terms:
            # the stored c_{n0} is zero to working precision, but a pure
            # product cannot cancel, so its valuation is still certain
            # as long as every factor shows a leading term
            fvals = []
            for j in range(n0):
                fac = lam - ctx.bracket(j)
                if not fac.terms:
                    break
                fvals.append(fac.val)
            else:
                profile = ArithmeticTail(n0, c0.val + sum(fvals), nu)

    coeffs = CarlitzCoeffs(ctx, cs[:max(n, need) + 1], complete=complete,
                           profile=profile)
    return ModelSolution(lam, c0, coeffs)


def model_matrix(ctx: CarlitzContext, lam: SeriesMatrix, c0: SeriesMatrix,
                 n: int, prec: Prec = None) -> ModelSolution:
    """Matrix model: c_{j+1} = (Lambda - [j] I) c_j.

    With c0 = I this is the inner solution g every regular system is
    built on.  No tail profile is claimed; evaluation needs either a
    polynomial argument or an explicit tail bound.
    """
    if lam.rows != lam.cols:
        raise ValueError("coefficient matrix must be square")
    if c0.rows != lam.rows:
        raise ValueError("initial data has wrong height")
    prec = _as_prec(prec)
    cs = [c0]
    cur = c0
    eye = SeriesMatrix.identity(ctx.field, lam.rows)
    for j in range(n):
        factor = lam - eye.scale(ctx.bracket(j))
        cur = factor @ cur
        if prec is not None:
            cur = cur.truncate(prec)
        cs.append(cur)
    return ModelSolution(lam, c0, MatrixCarlitzCoeffs(ctx, cs))


# -- first-order regular systems


class RegularSystem:
    """tau d u = (pi_0 + pi_1 tau + ... + pi_J tau^J) u."""

    __slots__ = ("ctx", "pi", "m")

    def __init__(self, ctx: CarlitzContext, pi: Sequence[SeriesMatrix]):
        pi = tuple(pi)
        if not pi:
            raise ValueError("a system needs at least the leading term")
        m = pi[0].rows
        for p in pi:
            if p.rows != m or p.cols != m:
                raise ValueError("coefficients must be square of one size")
            if p.field != ctx.field:
                raise OutOfDomain("coefficient in a different field")
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "m", m)

    def __setattr__(self, name, value):
        raise AttributeError("systems are immutable")

    @property
    def contractive(self) -> bool:
        """|pi_0| < 1, the construction's standing hypothesis."""
        return self.pi[0].val > 0


class WSolution:
    """u(t) = sum_k w_k tau^k(g(t)), w_0 = I, g the inner model solution."""

    __slots__ = ("system", "w", "prec")

    def __init__(self, system: RegularSystem, w: Sequence[SeriesMatrix],
                 prec):
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "w", tuple(w))
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, name, value):
        raise AttributeError("solutions are immutable")

    def g_expansion(self, n: int) -> ModelSolution:
        ctx = self.system.ctx
        eye = SeriesMatrix.identity(ctx.field, self.system.m)
        return model_matrix(ctx, self.system.pi[0], eye, n, prec=self.prec)

    def u_eval(self, t: Series, g_terms: Optional[int] = None,
               K: Optional[int] = None, prec: Prec = None) -> SeriesMatrix:
        """Truncated evaluation sum_{k<=K} w_k * g(t)^(q^k entrywise).

        g_terms defaults to deg(t)+1 on polynomial arguments, where the
        inner expansion is exactly finite.
        """
        from .field import is_subfield_polynomial
        from .operators import carlitz_eval
        ctx = self.system.ctx
        if g_terms is None:
            if is_subfield_polynomial(t):
                g_terms = int(t.degree()) + 1
            else:
                raise UnsupportedCase(
                    "explicit g_terms needed away from polynomial points")
        if K is None:
            K = len(self.w) - 1
        prec = _as_prec(prec) or self.prec
        g = self.g_expansion(g_terms)
        gt = carlitz_eval(g.coeffs, t, prec=prec)
        acc = SeriesMatrix.zeros(ctx.field, self.system.m, self.system.m)
        for k in range(min(K, len(self.w) - 1) + 1):
            acc = acc + self.w[k] @ gt.frobenius(k)
            if prec is not None:
                acc = acc.truncate(prec)
        return acc


def _flatten_sylvester(a: SeriesMatrix, b: SeriesMatrix,
                       rhs: SeriesMatrix):
    """Rows/columns of X B - A X = C as an m^2 x m^2 linear system."""
    field = a.field
    m = a.rows
    zero = Series.zero(field)
    rows = []
    vec = []
    for i in range(m):
        for j in range(m):
            row = []
            for aa in range(m):
                for bb in range(m):
                    entry = zero
                    if aa == i:
                        entry = entry + b[bb, j]
                    if bb == j:
                        entry = entry - a[i, aa]
                    row.append(entry)
            rows.append(row)
            vec.append([rhs[i, j]])
    return SeriesMatrix(field, rows), SeriesMatrix(field, vec)


def regular_system_w(system: RegularSystem, K: int,
                     prec: Prec = None) -> WSolution:
    """Solve the step-k coefficient equations

        w_k ([k] I + pi_0^(q^k)) - pi_0 w_k = sum_{j=1}^k pi_j w_{k-j}^(q^j)

    by direct linear algebra on the flattened unknowns.  A singular
    step means the eigenvalue-resonance condition fails and is reported
    as such.
    """
    ctx = system.ctx
    field = ctx.field
    if not system.contractive:
        raise OutOfDomain("the leading coefficient must have size < 1")
    prec = _as_prec(prec)
    if prec is None:
        prec = _as_prec(ctx.default_prec)
    m = system.m
    eye = SeriesMatrix.identity(field, m)
    pi0 = system.pi[0]

    def one_pass(work):
        w = [eye]
        floor = None
        for k in range(1, K + 1):
            rhs = SeriesMatrix.zeros(field, m, m)
            for j in range(1, min(k, len(system.pi) - 1) + 1):
                rhs = rhs + system.pi[j] @ w[k - j].frobenius(j)
            bmat = eye.scale(ctx.bracket(k)) + pi0.frobenius(k)
            mat, vec = _flatten_sylvester(pi0, bmat, rhs)
            try:
                sol = mat_solve(mat, vec, prec=work)
            except SingularToPrecision as exc:
                raise SpectralConditionError(k, cause=exc) from exc
            wk = SeriesMatrix(field, [[sol[i * m + j, 0]
                                       for j in range(m)]
                                      for i in range(m)]).truncate(work)
            got = min(work if e.prec is None else e.prec
                      for row in wk.data for e in row)
            floor = got if floor is None else min(floor, got)
            w.append(wk)
        return w, floor

    # the w_k can have strongly negative valuation, and the linear
    # solve only preserves relative precision; widen the working
    # precision until every coefficient is certified to prec
    work = prec + m * m * (K + 4) + 8
    for _ in range(4):
        w, floor = one_pass(work)
        if floor >= prec:
            break
        work = work + (prec - floor) + 16
    else:
        raise PrecisionUnderflow(
            "system solve cannot reach the requested precision",
            required=work)
    return WSolution(system, [eye] + [wk.truncate(prec) for wk in w[1:]],
                     prec)


# -- Euler-type equations


def euler_companion(ctx: CarlitzContext, b: Sequence) -> SeriesMatrix:
    """The m x m system matrix of the order-m scalar equation.

    Row k has bracket [k] on the diagonal and 1 above it; the last row
    carries the negated equation coefficients, ending in [m-1]-b_{m-1}.
    """
    field = ctx.field
    b = [_as_series(field, bi) for bi in b]
    m = len(b)
    if m < 1:
        raise ValueError("need at least the order-0 coefficient")
    zero = Series.zero(field)
    rows = [[zero] * m for _ in range(m)]
    for k in range(m - 1):
        rows[k][k] = ctx.bracket(k)
        rows[k][k + 1] = Series.one(field)
    for j in range(m):
        entry = -b[j]
        if j == m - 1:
            entry = entry + ctx.bracket(m - 1)
        rows[m - 1][j] = entry
    return SeriesMatrix(field, rows)


class EulerPair:
    """The two independent solutions of a second-order Euler equation."""

    __slots__ = ("b0", "b1", "lam1", "lam2", "delta", "psi1", "psi2",
                 "repeated")

    def __init__(self, b0, b1, lam1, lam2, delta, psi1, psi2, repeated):
        for name, value in (("b0", b0), ("b1", b1), ("lam1", lam1),
                            ("lam2", lam2), ("delta", delta),
                            ("psi1", psi1), ("psi2", psi2),
                            ("repeated", repeated)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("solutions are immutable")


def _check_small(lam: Series, what: str):
    if not (lam.terms or lam.is_exact()) or lam.val <= 0:
        raise OutOfDomain(
            "%s has size >= 1; the construction needs both eigenvalues "
            "inside the open unit disk" % what)


def euler_m2(ctx: CarlitzContext, b0, b1, n: int,
             prec: Prec = None) -> EulerPair:
    """tau^2 d^2 u + b1 tau d u + b0 u = 0 via the eigenvalue split.

    The characteristic polynomial is l^2 + l(b1 - [1]) + b0.  Distinct
    roots give two model solutions; a double root pairs the model
    solution with the derivative-style coefficient sum.  Needs p != 2
    for the quadratic formula; eigenvalues on or outside the unit
    circle are refused.
    """
    field = ctx.field
    if field.p == 2:
        raise UnsupportedCase(
            "the automatic eigenvalue split divides by 2; supply Jordan "
            "data to the general-order solver instead")
    b0 = _as_series(field, b0)
    b1 = _as_series(field, b1)
    prec = _as_prec(prec)
    half = field.elem(pow(2, field.p - 2, field.p))
    lin = b1 - ctx.bracket(1)
    delta = lin * lin - b0.scale(field.elem(4 % field.p))

    if delta.is_exact_zero():
        lam = (-lin).scale(half)
        _check_small(lam, "the double eigenvalue")
        psi1 = model_scalar(ctx, lam, 1, n, prec=prec).coeffs
        one = Series.one(field)

        def trim(s):
            return s if prec is None or s.is_exact() else s.truncate(prec)

        factors = [lam - ctx.bracket(j) for j in range(n)]
        prefix = [one]
        for f in factors:
            prefix.append(trim(prefix[-1] * f))
        # the second solution is the Jordan-corner sequence; it starts
        # at index 1 (a leading t term would leave a residual of b0)
        cs2 = [Series.zero(field)]
        for m in range(1, n + 1):
            suffix = one
            total = Series.zero(field)
            # sum over j of the product with factor j removed, built
            # right-to-left so each term is prefix[j] * suffix
            for j in range(m - 1, -1, -1):
                total = trim(total + prefix[j] * suffix)
                suffix = trim(suffix * factors[j])
            cs2.append(total)
        psi2 = CarlitzCoeffs(ctx, cs2)
        return EulerPair(b0, b1, lam, lam, delta, psi1, psi2, True)

    if delta.is_exact():
        try:
            root = sqrt(delta)
        except PrecisionRequired:
            root = sqrt(delta, prec=prec if prec is not None
                        else _as_prec(ctx.default_prec))
    else:
        root = sqrt(delta, prec=prec)
    lam1 = (root - lin).scale(half)
    lam2 = (-root - lin).scale(half)
    _check_small(lam1, "an eigenvalue")
    _check_small(lam2, "an eigenvalue")
    psi1 = model_scalar(ctx, lam1, 1, n, prec=prec).coeffs
    psi2 = model_scalar(ctx, lam2, 1, n, prec=prec).coeffs
    return EulerPair(b0, b1, lam1, lam2, delta, psi1, psi2, False)


class EulerGeneral:
    """Matrix solution pair (Psi, Phi = X^-1 Psi X) for order m."""

    __slots__ = ("b0", "nil", "x", "xinv", "c0", "psi", "phi")

    def __init__(self, b0, nil, x, xinv, c0, psi, phi):
        for name, value in (("b0", b0), ("nil", nil), ("x", x),
                            ("xinv", xinv), ("c0", c0), ("psi", psi),
                            ("phi", phi)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("solutions are immutable")


def euler_general(ctx: CarlitzContext, b0: SeriesMatrix, nil: SeriesMatrix,
                  x: SeriesMatrix, c0: SeriesMatrix, n: int,
                  prec: Prec = None) -> EulerGeneral:
    """c_i = prod_{j<i}(B0 + N - [j]I) c0; Phi = X^-1 Psi X.

    The caller supplies the Jordan split B = X^-1 (B0 + N) X: B0
    diagonal with |B0| < 1, N nilpotent and commuting with B0.
    """
    field = ctx.field
    m = b0.rows
    for mat, name in ((b0, "diagonal part"), (nil, "nilpotent part"),
                      (x, "change of basis"), (c0, "initial data")):
        if mat.rows != m or mat.cols != m:
            raise ValueError("%s has the wrong shape" % name)
    for i in range(m):
        for j in range(m):
            if i != j and not b0[i, j].is_zero():
                raise OutOfDomain("diagonal part has off-diagonal terms")
        d = b0[i, i]
        if not d.is_zero():
            _check_small(d, "a diagonal entry")
    power = SeriesMatrix.identity(field, m)
    for _ in range(m):
        power = power @ nil
    if not power.is_zero():
        raise OutOfDomain("the nilpotent part is not nilpotent of order m")
    if (b0 @ nil) != (nil @ b0):
        raise OutOfDomain("diagonal and nilpotent parts do not commute")
    prec = _as_prec(prec)
    try:
        try:
            xinv = mat_solve(x, SeriesMatrix.identity(field, m),
                             prec=prec if not _all_exact(x) else None)
        except PrecisionRequired:
            # exact X whose inverse is an infinite series
            xinv = mat_solve(x, SeriesMatrix.identity(field, m),
                             prec=prec if prec is not None
                             else _as_prec(ctx.default_prec))
    except SingularToPrecision as exc:
        raise OutOfDomain("change of basis is singular") from exc

    core = b0 + nil
    eye = SeriesMatrix.identity(field, m)
    cs = [c0]
    cur = c0
    for j in range(n):
        cur = (core - eye.scale(ctx.bracket(j))) @ cur
        if prec is not None:
            cur = cur.truncate(prec)
        cs.append(cur)
    psi = MatrixCarlitzCoeffs(ctx, cs)
    phi = MatrixCarlitzCoeffs(ctx, [xinv @ c @ x for c in cs])
    return EulerGeneral(b0, nil, x, xinv, c0, psi, phi)


def _all_exact(mat: SeriesMatrix) -> bool:
    return all(mat[i, j].is_exact()
               for i in range(mat.rows) for j in range(mat.cols))


# -- the hypergeometric recursion


class HypergeomRun:
    """One run of the hypergeometric coefficient recursion."""

    __slots__ = ("a", "b", "c0", "c1", "coeffs", "branch_log", "policy",
                 "prec")

    def __init__(self, a, b, c0, c1, coeffs, branch_log, policy, prec):
        for name, value in (("a", a), ("b", b), ("c0", c0), ("c1", c1),
                            ("coeffs", coeffs), ("branch_log", branch_log),
                            ("policy", policy), ("prec", prec)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("runs are immutable")


def hypergeom_v(ctx: CarlitzContext, a: int, b: int, ci: Series,
                cip1: Series, i: int) -> Series:
    """Right side of the step-i root equation z^(1/q) - z = v."""
    bra = ctx.bracket
    v = -(cip1.frobenius(-1) * bra(i + 1).frobenius(-1))
    v = v + cip1 * (bra(i) + bra(i + 1) - bra(-a) - bra(-b))
    v = v + ci * (bra(i) - bra(-a)) * (bra(i) - bra(-b))
    return v


def hypergeom_coeffs(ctx: CarlitzContext, a: int, b: int, c0, c1,
                     n: int, policy: str = "principal",
                     theta_seq: Optional[Sequence[int]] = None,
                     seed: Optional[int] = None,
                     prec: Prec = None) -> HypergeomRun:
    """Run the order-2 recursion for n+1 coefficients.

    Each step solves z^(1/q) - z = v.  The root is z0 + theta with
    theta in F_q: `principal` always takes theta = 0 (the unique small
    root), `generic` draws a nonzero theta from a seeded generator, and
    `scripted` replays an explicit theta sequence.  Every choice is
    recorded in branch_log, so a generic run can be replayed exactly as
    a scripted one.
    """
    field = ctx.field
    c0 = _as_series(field, c0)
    c1 = _as_series(field, c1)
    if policy not in ("principal", "generic", "scripted"):
        raise ValueError("unknown branch policy %r" % policy)
    if policy == "scripted":
        if theta_seq is None:
            raise ValueError("scripted policy needs a theta sequence")
        theta_seq = list(theta_seq)
        if len(theta_seq) < max(n - 1, 0):
            raise ValueError("theta sequence is shorter than the run")
    rng = random.Random(seed if seed is not None else 0)
    cap = _as_prec(prec)
    if cap is None:
        cap = _as_prec(ctx.default_prec)
    subf = field.subfield_elements()
    subf_enc = {e.enc for e in subf}

    cs = [c0 if c0.is_exact() else c0.truncate(cap),
          c1 if c1.is_exact() else c1.truncate(cap)]
    log = []
    first_unit: Optional[int] = None
    for i in range(n - 1):
        v = hypergeom_v(ctx, a, b, cs[i], cs[i + 1], i)
        if not v.is_exact():
            v = v.truncate(cap)
        if not v.is_zero() and v.val <= 0:
            raise OutOfDomain(
                "step %d root equation has |v| >= 1; the recursion "
                "needs |c_i|, |c_{i+1}| <= 1" % i)
        z0 = artin_schreier(v, prec=cap)
        if policy == "principal":
            theta_enc = 0
        elif policy == "generic":
            theta_enc = subf[rng.randrange(1, len(subf))].enc
        else:
            theta_enc = int(theta_seq[i])
            if theta_enc not in subf_enc:
                raise ValueError("theta %r is not in the base subfield"
                                 % theta_enc)
        log.append(theta_enc)
        z = z0
        if theta_enc:
            z = z + Series.const(field, field.elem(theta_enc))
        if first_unit is None and theta_enc:
            first_unit = i + 2
        cs.append(z if z.is_exact() else z.truncate(cap))

    profile = None
    complete = False
    if all(c.is_exact_zero() for c in cs):
        profile = FiniteTail(0)
        complete = True
    elif first_unit is not None and all(
            c.terms and c.val == 0 for c in cs[first_unit:]):
        profile = ArithmeticTail(first_unit, Fraction(0), Fraction(0))
    coeffs = CarlitzCoeffs(ctx, cs, complete=complete, profile=profile)
    return HypergeomRun(a, b, c0, c1, coeffs, tuple(log), policy, cap)
