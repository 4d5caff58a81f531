"""Acceptance gate: ten end-to-end checks, one verdict line each.

Every test prints a criterion line (also echoed in the terminal
summary) of the form

    criterion  3 PASS [  0.4s/ 60s]  model equation trichotomy

and fails loudly when any sub-check or the runtime budget is missed.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from carlitzde import (CarlitzCoeffs, CarlitzContext, EulerEq, FieldDesc,
                       HypergeomEq, MatrixCarlitzCoeffs, ModelEq,
                       NonSquareInField, OutOfDomain, RegularSystem, Series,
                       SeriesMatrix, SystemEq, WSolution, artin_schreier,
                       carlitz_d, carlitz_delta, carlitz_eval, carlitz_tau,
                       classify, euler_m2, hypergeom_coeffs, model_matrix,
                       model_scalar, regular_system_w, residual_check)


class _Criterion:
    def __init__(self, config, num, name, budget):
        self.config = config
        self.num = num
        self.name = name
        self.budget = budget
        self.failures = []

    def __enter__(self):
        self.t0 = time.monotonic()
        return self.fail

    def fail(self, msg):
        self.failures.append(str(msg))

    def __exit__(self, etype, exc, tb):
        dt = time.monotonic() - self.t0
        if etype is not None:
            self.failures.append("unexpected %s: %s" % (etype.__name__, exc))
        if dt > self.budget:
            self.failures.append("runtime %.1fs exceeds the %ds budget"
                                 % (dt, self.budget))
        status = "PASS" if not self.failures else "FAIL"
        line = ("criterion %2d %s [%5.1fs/%3ds]  %s"
                % (self.num, status, dt, self.budget, self.name))
        lines = getattr(self.config, "_acceptance_lines", [])
        lines.append(line)
        for f in self.failures[:4]:
            lines.append("      - %s" % f)
        self.config._acceptance_lines = lines
        print(line)
        assert not self.failures, (self.name, self.failures[:4])
        return True


@pytest.fixture
def criterion(request):
    def make(num, name, budget):
        return _Criterion(request.config, num, name, budget)
    return make


def exact_series(field, rng, val_min, val_max, nterms=4):
    terms = {val_min: field.elem(1)}
    for _ in range(nterms):
        terms[rng.randint(val_min, val_max)] = \
            field.elem(rng.randrange(1, field.Q))
    return Series.build(field, terms)


def trunc_series(field, rng, val_min, val_max, prec, nterms=4):
    s = exact_series(field, rng, val_min, val_max, nterms)
    return s.truncate(Fraction(prec))


def basis_coeffs(ctx, i):
    zero = Series.zero(ctx.field)
    return CarlitzCoeffs(ctx, [zero] * i + [Series.one(ctx.field)],
                         complete=True)


def coeffs_equal(a, b):
    return all((a[i] - b[i]).is_zero()
               for i in range(max(len(a.coeffs), len(b.coeffs))))


def test_criterion_01_basis_values_at_monomials(criterion):
    with criterion(1, "basis values at monomials (q=2,3; i,n<=8)", 30) as fail:
        for p in (2, 3):
            ctx = CarlitzContext(FieldDesc(p))
            for i in range(9):
                for n in range(9):
                    s = ctx.f_at_monomial(i, n, prec=Fraction(220))
                    if n < i and s.val < 200:
                        fail("q=%d f_%d(x^%d) val %s < 200" % (p, i, n, s.val))
                    if n >= i and s.val != n - i:
                        fail("q=%d f_%d(x^%d) val %s != %d"
                             % (p, i, n, s.val, n - i))


def test_criterion_02_operator_identities(criterion):
    PREC = Fraction(300)
    with criterion(2, "operator identities, coefficientwise and pointwise "
                   "(q=2,3,4; prec=300)", 120) as fail:
        for fd in (FieldDesc(2), FieldDesc(3), FieldDesc(2, v=2)):
            ctx = CarlitzContext(fd)
            field = fd
            q = field.q
            rng = random.Random(200 + q)
            xs = Series.x(field)

            # coefficientwise on the basis: delta f_i = [i] f_i + f_{i-1}
            # and d f_i = f_{i-1}
            for i in range(9):
                fi = basis_coeffs(ctx, i)
                want_d = carlitz_delta(fi)
                expect = fi.scale(ctx.bracket(i))
                if i > 0:
                    expect = expect + basis_coeffs(ctx, i - 1)
                if not coeffs_equal(want_d, expect):
                    fail("q=%d delta f_%d mismatch" % (q, i))
                got = carlitz_d(fi)
                want = basis_coeffs(ctx, i - 1) if i > 0 \
                    else CarlitzCoeffs(ctx, [Series.zero(field)],
                                       complete=True)
                if not coeffs_equal(got, want):
                    fail("q=%d d f_%d mismatch" % (q, i))

            # tau(d u) = delta u and the step-k commutation
            # d tau^(k-1) - tau^(k-1) d = [k-1]^(1/q) tau^(k-2), k <= 4,
            # on a random exact expansion
            u = CarlitzCoeffs(
                ctx, [exact_series(field, rng, 0, 5, 3) for _ in range(6)],
                complete=True)
            if not coeffs_equal(carlitz_tau(carlitz_d(u)), carlitz_delta(u)):
                fail("q=%d tau(d u) != delta u coefficientwise" % q)
            comm = []
            for k in (2, 3, 4):
                tk1 = u
                for _ in range(k - 1):
                    tk1 = carlitz_tau(tk1)
                dtk = carlitz_d(u)
                for _ in range(k - 1):
                    dtk = carlitz_tau(dtk)
                lhs = carlitz_d(tk1) - dtk
                tk2 = u
                for _ in range(k - 2):
                    tk2 = carlitz_tau(tk2)
                rhs = tk2.scale(ctx.bracket(k - 1).frobenius(-1))
                if not coeffs_equal(lhs, rhs):
                    fail("q=%d commutation k=%d coefficientwise" % (q, k))
                comm.append((k, lhs, rhs))

            du, Du = carlitz_d(u), carlitz_delta(u)
            for rep in range(20):
                t = trunc_series(field, rng, 0, 6, PREC, nterms=5)
                fv = ctx.f_values(9, t, prec=PREC)
                fxv = ctx.f_values(9, xs * t, prec=PREC)
                for i in range(1, 9):
                    r9 = fxv[i] - xs * fv[i] \
                        - (ctx.bracket(i) * fv[i] + fv[i - 1])
                    # d f_i = f_{i-1}, compared through its q-th power to
                    # stay at full precision
                    rd = fxv[i] - xs * fv[i] - fv[i - 1].frobenius(1)
                    if r9.val < PREC - 10:
                        fail("q=%d delta identity at i=%d: val %s"
                             % (q, i, r9.val))
                    if rd.val < PREC - 10:
                        fail("q=%d d identity at i=%d: val %s"
                             % (q, i, rd.val))
                rtd = carlitz_eval(du, t, prec=PREC).frobenius(1) \
                    - carlitz_eval(Du, t, prec=PREC)
                if rtd.val < PREC - 10:
                    fail("q=%d tau.d=delta pointwise: val %s" % (q, rtd.val))
                for k, lhs, rhs in comm:
                    rc = carlitz_eval(lhs, t, prec=PREC) \
                        - carlitz_eval(rhs, t, prec=PREC)
                    if rc.val < PREC - 10:
                        fail("q=%d commutation k=%d pointwise: val %s"
                             % (q, k, rc.val))


def test_criterion_03_model_trichotomy(criterion):
    F3 = FieldDesc(3)
    ctx = CarlitzContext(F3)
    PREC = Fraction(400)
    with criterion(3, "model equation trichotomy (q=3)", 60) as fail:
        rng = random.Random(33)
        # (a) bracket eigenvalue: u(t) is the monomial t^(q^j)
        for j in range(5):
            u = model_scalar(ctx, ctx.bracket(j), 1, max(6, j + 1),
                             prec=PREC)
            for _ in range(3):
                t = trunc_series(F3, rng, 0, 4, PREC)
                r = carlitz_eval(u.coeffs, t, prec=PREC) - t.frobenius(j)
                if r.val < PREC - 10:
                    fail("bracket j=%d residual val %s" % (j, r.val))
        # (b) lambda = -x: exact coefficient valuations and flat
        # evaluations on the small ball
        sol = model_scalar(ctx, -Series.x(F3), 1, 6, prec=PREC)
        M = 6
        floor = Fraction(3 ** M - 1, 2)
        for n in range(M + 1):
            want = Fraction(3 ** n - 1, 2)
            if sol.coeffs[n].val != want:
                fail("c_%d val %s != %s" % (n, sol.coeffs[n].val, want))
        for _ in range(10):
            t = trunc_series(F3, rng, 1, 5, PREC)
            v = carlitz_eval(sol.coeffs, t, prec=PREC)
            if v.val < floor:
                fail("eval val %s < %s" % (v.val, floor))
        # (c) the classifier sees all three classes
        got = (classify(model_scalar(ctx, ctx.bracket(2), 1, 6).coeffs).klass,
               classify(sol.coeffs).klass,
               classify(model_scalar(ctx, Series.x(F3, power=2), 1, 8,
                                     prec=PREC).coeffs).klass)
        want = ("analytic", "locally_analytic", "continuous")
        if got != want:
            fail("classes %r != %r" % (got, want))


def test_criterion_04_frobenius_shift_identity(criterion):
    F3 = FieldDesc(3)
    ctx = CarlitzContext(F3)
    PREC = Fraction(60)
    N = 60
    with criterion(4, "eigenvalue shift identity u(t^(q^m), l) = "
                   "u(t, l^(q^m) + [m]) (q=3, m<=3)", 60) as fail:
        rng = random.Random(44)
        for trial in range(5):
            lam = exact_series(F3, rng, 1, 4)
            for m in (1, 2, 3):
                lam2 = lam.frobenius(m) + ctx.bracket(m)
                u1 = model_scalar(ctx, lam, 1, N, prec=PREC)
                u2 = model_scalar(ctx, lam2, 1, N, prec=PREC)
                for _ in range(5):
                    t = trunc_series(F3, rng, 0, 3, PREC)
                    lhs = carlitz_eval(u1.coeffs, t.frobenius(m), prec=PREC)
                    rhs = carlitz_eval(u2.coeffs, t, prec=PREC)
                    r = lhs - rhs
                    if r.val < PREC - 10:
                        fail("lam #%d m=%d residual val %s"
                             % (trial, m, r.val))


def rand_matrix(field, rng, val_min, val_max):
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            terms = {val_min + (i + j) % 2: field.elem(1)}
            for _ in range(3):
                terms[rng.randint(val_min, val_max)] = \
                    field.elem(rng.randrange(1, field.Q))
            row.append(Series.build(field, terms))
        rows.append(row)
    return SeriesMatrix(field, rows)


def test_criterion_05_regular_system(criterion):
    F2 = FieldDesc(2)
    ctx = CarlitzContext(F2)
    PREC = Fraction(120)
    with criterion(5, "regular system m=2, K=6: step equations, pointwise "
                   "truncation decay, growth envelope (q=2)", 120) as fail:
        rng = random.Random(55)
        # exact polynomial coefficients so the solver can widen its
        # working precision as far as the w_k valuations demand
        pi = [rand_matrix(F2, rng, 1, 4)] + \
            [rand_matrix(F2, rng, 0, 3) for _ in range(4)]
        system = RegularSystem(ctx, pi)
        w = regular_system_w(system, 6, prec=PREC)

        # (a) the leading block is the identity
        if w.w[0] != SeriesMatrix.identity(F2, 2):
            fail("w_0 != I")

        # (b) per-step coefficient equation residual vanishes to precision
        eye = SeriesMatrix.identity(F2, 2)
        for k in range(1, 7):
            lhs = w.w[k] @ (eye.scale(ctx.bracket(k)) + pi[0].frobenius(k)) \
                - pi[0] @ w.w[k]
            for j in range(1, min(k, len(pi) - 1) + 1):
                lhs = lhs - pi[j] @ w.w[k - j].frobenius(j)
            worst = min(lhs[a, b].val for a in range(2) for b in range(2))
            if worst < w.prec - 2:
                fail("step %d residual val %s < %s" % (k, worst, w.prec - 2))

        # (c) pointwise defining-equation residual improves monotonically
        # with the truncation order
        pts = [exact_series(F2, rng, 1, 3, 2) for _ in range(5)]
        prev = None
        for K in range(2, 7):
            wk = WSolution(system, w.w[:K + 1], w.prec)
            vals = []
            for t in pts:
                ut = wk.u_eval(t, g_terms=8)
                r = wk.u_eval(Series.x(F2) * t, g_terms=8) \
                    - ut.scale(Series.x(F2))
                for j in range(len(pi)):
                    r = r - pi[j] @ ut.frobenius(j)
                vals.append(min(r[a, b].val
                                for a in range(2) for b in range(2)))
            if prev is not None and not all(v > p
                                            for v, p in zip(vals, prev)):
                fail("K=%d residuals %s not above %s" % (K, vals, prev))
            prev = vals

        # (d) log-sizes stay within one geometric envelope
        sizes = [-min(wk[a, b].val for a in range(2) for b in range(2))
                 for wk in w.w]
        bounds = [Fraction(2 ** (k + 1) - 1) for k in range(7)]
        C = max(Fraction(s) / b for s, b in zip(sizes, bounds))
        if C > 2:
            fail("fitted growth constant %s exceeds q" % C)
        if not all(s <= C * b for s, b in zip(sizes, bounds)):
            fail("growth envelope violated")


def test_criterion_06_order2_pairs(criterion):
    F3 = FieldDesc(3)
    ctx = CarlitzContext(F3)
    PREC = Fraction(120)
    with criterion(6, "order-2 solution pairs: residuals, separation, "
                   "degenerate cases (p=3)", 60) as fail:
        rng = random.Random(66)
        done = 0
        draws = 0
        while done < 10 and draws < 60:
            draws += 1
            b0 = exact_series(F3, rng, 1, 4)
            b1 = exact_series(F3, rng, 1, 4)
            try:
                pair = euler_m2(ctx, b0, b1, 6, prec=PREC)
            except NonSquareInField:
                # contracted refusal: the split needs a quadratic extension
                continue
            done += 1
            eq = EulerEq((b0, b1))
            for name, psi in (("psi1", pair.psi1), ("psi2", pair.psi2)):
                rep = residual_check(eq, psi, prec=PREC)
                low = min(v for _, v in rep.entries)
                if not rep.passed or low < PREC - 12:
                    fail("draw %d %s residual low %s" % (draws, name, low))
            differ = [j for j in range(7)
                      if not (pair.psi1[j] - pair.psi2[j]).is_zero()]
            if not differ or min(differ) > 4:
                fail("draw %d solutions separate late: %s" % (draws, differ))
        if done < 10:
            fail("only %d of 10 draws produced split spectra" % done)

        # zero coefficients reduce to the model solutions bitwise
        zero = Series.zero(F3)
        pair = euler_m2(ctx, zero, zero, 5)
        got = (tuple(pair.psi1.coeffs), tuple(pair.psi2.coeffs))
        m0 = tuple(model_scalar(ctx, zero, 1, 5).coeffs.coeffs)
        m1 = tuple(model_scalar(ctx, ctx.bracket(1), 1, 5).coeffs.coeffs)
        if got != (m0, m1) and got != (m1, m0):
            fail("zero-coefficient pair does not match the models bitwise")

        # vanishing discriminant branch
        b1 = exact_series(F3, rng, 1, 3)
        half = Series.const(F3, F3.elem(2))
        lin = (b1 - ctx.bracket(1)) * half
        b0 = lin * lin
        pair = euler_m2(ctx, b0, b1, 6, prec=PREC)
        if not pair.repeated:
            fail("delta = 0 not recognized as a repeated root")
        eq = EulerEq((b0, b1))
        for name, psi in (("psi1", pair.psi1), ("psi2", pair.psi2)):
            rep = residual_check(eq, psi, prec=PREC)
            low = min(v for _, v in rep.entries)
            if not rep.passed or low < PREC - 12:
                fail("repeated-root %s residual low %s" % (name, low))


def test_criterion_07_artin_schreier_roots(criterion):
    F3 = FieldDesc(3)
    PREC = Fraction(90)
    with criterion(7, "Artin-Schreier roots: one small, q-1 units, "
                   "vanishing residuals", 30) as fail:
        rng = random.Random(77)
        for i in range(20):
            v = exact_series(F3, rng, rng.randint(1, 3), 6)
            roots = artin_schreier(v, want_all=True, prec=PREC)
            if len(roots) != 3:
                fail("draw %d: %d roots" % (i, len(roots)))
                continue
            small = [z for z in roots if z.val == 3 * v.val]
            units = [z for z in roots if z.val == 0]
            if len(small) != 1 or len(units) != 2:
                fail("draw %d: root sizes %s for |v|=q^-%s"
                     % (i, [z.val for z in roots], v.val))
            for z in roots:
                r = z.frobenius(-1) - z - v
                if not r.is_zero() or r.val < PREC / 3 - 2:
                    fail("draw %d: residual val %s" % (i, r.val))


def test_criterion_08_hypergeometric_recursion(criterion):
    PREC = Fraction(90)
    with criterion(8, "hypergeometric recursion (q=2,3): both policies "
                   "check out, generic tails are units", 60) as fail:
        for p, v in ((2, 1), (3, 1)):
            fd = FieldDesc(p, v=v)
            ctx = CarlitzContext(fd)
            for (a, b) in ((1, 1), (1, 2), (-1, 1)):
                for policy in ("principal", "generic"):
                    run = hypergeom_coeffs(ctx, a, b, 1, 1, 12,
                                           policy=policy, seed=17, prec=PREC)
                    rep = residual_check(HypergeomEq(a, b), run.coeffs,
                                         prec=PREC)
                    if not rep.passed:
                        fail("q=%d (%d,%d) %s residuals fail"
                             % (fd.q, a, b, policy))
                    if policy == "generic":
                        if any(run.coeffs[n].val != 0 for n in range(2, 13)):
                            fail("q=%d (%d,%d) generic tail not units"
                                 % (fd.q, a, b))
                        k = classify(run.coeffs).klass
                        if k != "strongly_singular":
                            fail("q=%d (%d,%d) generic class %s"
                                 % (fd.q, a, b, k))
            z = hypergeom_coeffs(ctx, 1, 1, 0, 0, 12, policy="principal",
                                 prec=PREC)
            if not all(c.is_zero() for c in z.coeffs):
                fail("q=%d zero data gave a nonzero solution" % fd.q)


def test_criterion_09_unit_eigenvalue_guard(criterion):
    F3 = FieldDesc(3)
    ctx = CarlitzContext(F3)
    PREC = Fraction(60)
    with criterion(9, "non-decaying expansions evaluate only on "
                   "polynomials (|l| = 1)", 30) as fail:
        rng = random.Random(99)
        u = model_scalar(ctx, 1, 1, 8, prec=PREC)
        for _ in range(3):
            t = trunc_series(F3, rng, 1, 4, PREC)
            try:
                carlitz_eval(u.coeffs, t, prec=PREC)
                fail("non-polynomial argument was not refused")
            except OutOfDomain:
                pass
        for trial in range(5):
            alphas = [rng.randrange(0, 3) for _ in range(7)]
            if not any(alphas):
                alphas[rng.randrange(7)] = 1
            t = Series.build(F3, {j: F3.elem(a)
                                  for j, a in enumerate(alphas) if a})
            got = carlitz_eval(u.coeffs, t, prec=PREC)
            # independent path: expand t over monomials and use
            # f-linearity plus the monomial table
            direct = Series.zero(F3)
            for j, a in enumerate(alphas):
                if not a:
                    continue
                term = Series.zero(F3)
                for i in range(j + 1):
                    term = term + u.coeffs[i] * \
                        ctx.f_at_monomial(i, j, prec=PREC)
                direct = direct + term.scale(F3.elem(a))
            r = got - direct
            if r.val < PREC - 10:
                fail("poly #%d disagrees with the finite sum: val %s"
                     % (trial, r.val))


def test_criterion_10_corruption_detection(criterion):
    F3 = FieldDesc(3)
    ctx = CarlitzContext(F3)
    PREC = Fraction(90)
    with criterion(10, "single corrupted coefficients always fail "
                   "verification at or after their index", 60) as fail:
        rng = random.Random(1010)
        one = Series.one(F3)

        lam = exact_series(F3, rng, 1, 3)
        model = model_scalar(ctx, lam, 1, 8, prec=PREC)
        eul_b = (exact_series(F3, rng, 1, 3), Series.zero(F3))
        eul = euler_m2(ctx, eul_b[0], eul_b[1], 6, prec=PREC)
        hyp = hypergeom_coeffs(ctx, 1, 1, 1, 1, 10, policy="principal",
                               prec=PREC)
        mat = SeriesMatrix(F3, [[exact_series(F3, rng, 1, 3),
                                 Series.zero(F3)],
                                [exact_series(F3, rng, 2, 3),
                                 exact_series(F3, rng, 1, 3)]])
        msol = model_matrix(ctx, mat, SeriesMatrix.identity(F3, 2), 6,
                            prec=PREC)
        bump = SeriesMatrix(F3, [[Series.zero(F3), one],
                                 [Series.zero(F3), Series.zero(F3)]])

        cases = [
            ("model", ModelEq(lam), model.coeffs,
             lambda cs, j: CarlitzCoeffs(
                 ctx, cs[:j] + [cs[j] + one] + cs[j + 1:])),
            ("order2", EulerEq(eul_b), eul.psi1,
             lambda cs, j: CarlitzCoeffs(
                 ctx, cs[:j] + [cs[j] + one] + cs[j + 1:])),
            ("hypergeom", HypergeomEq(1, 1), hyp.coeffs,
             lambda cs, j: CarlitzCoeffs(
                 ctx, cs[:j] + [cs[j] + one] + cs[j + 1:])),
            ("matrix model", SystemEq((mat,)), msol.coeffs,
             lambda cs, j: MatrixCarlitzCoeffs(
                 ctx, cs[:j] + [cs[j] + bump] + cs[j + 1:])),
        ]
        for name, eq, sol, corrupt in cases:
            rep = residual_check(eq, sol, prec=PREC)
            if not rep.passed:
                fail("%s baseline does not verify" % name)
                continue
            for j in range(2, len(sol.coeffs)):
                bad = corrupt(list(sol.coeffs), j)
                rep = residual_check(eq, bad, prec=PREC)
                if rep.passed:
                    fail("%s corrupted at %d still passes" % (name, j))
                elif not rep.failures or min(rep.failures) < j:
                    fail("%s corrupted at %d flagged at %s"
                         % (name, j, rep.failures))
