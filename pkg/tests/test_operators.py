"""The operator algebra tau, d, Delta on Carlitz coefficient sequences."""

import math
from fractions import Fraction

import pytest

from carlitzde import (ArithmeticTail, CarlitzCoeffs, ExponentialTail,
                       FiniteTail, MatrixCarlitzCoeffs, OutOfDomain, Series,
                       SeriesMatrix, UnsupportedCase, apply_p, carlitz_d,
                       carlitz_delta, carlitz_eval, carlitz_tau, linear_d,
                       linear_delta, lps_eval)

from conftest import rand_point, rand_series

PREC = Fraction(120)


def rand_coeffs(ctx, rng, n=5, prec=PREC, complete=False):
    field = ctx.field
    cs = [rand_series(field, rng, val_min=0, prec=prec) for _ in range(n + 1)]
    return CarlitzCoeffs(ctx, cs, complete=complete)


# -- coefficient maps


def test_delta_on_basis_vectors(ctx3):
    # Delta f_i = [i] f_i + f_{i-1}
    field = ctx3.field
    one, zero = Series.one(field), Series.zero(field)
    for i in range(1, 5):
        cs = [zero] * i + [one]
        out = carlitz_delta(CarlitzCoeffs(ctx3, cs, complete=True))
        expect = [zero] * (i - 1) + [one, ctx3.bracket(i)]
        for j, want in enumerate(expect):
            assert out[j] == want
    assert all(c.is_zero() for c in
               carlitz_delta(CarlitzCoeffs(ctx3, [one], complete=True)))


def test_d_shifts_with_root(ctx3):
    field = ctx3.field
    one, zero = Series.one(field), Series.zero(field)
    out = carlitz_d(CarlitzCoeffs(ctx3, [zero, one], complete=True))
    assert out[0] == one
    c = Series.x(field)
    out = carlitz_d(CarlitzCoeffs(ctx3, [zero, c], complete=True))
    assert out[0] == c.frobenius(-1)


def test_tau_on_f0(ctx3):
    # t^q = [1] f_1 + f_0
    one = Series.one(ctx3.field)
    out = carlitz_tau(CarlitzCoeffs(ctx3, [one], complete=True))
    assert out[0] == one and out[1] == ctx3.bracket(1)


def test_tau_d_composition_is_delta(ctx3, rng):
    u = rand_coeffs(ctx3, rng)
    lhs = carlitz_tau(carlitz_d(u))
    rhs = carlitz_delta(u)
    for j in range(len(rhs)):
        diff = lhs[j] - rhs[j]
        assert diff.is_zero() and (diff.prec is None or diff.prec >= PREC - 9)


def test_pointwise_delta_oracle(ctx3, rng):
    # eval(Delta u, t) = u(xt) - x u(t)
    u = rand_coeffs(ctx3, rng, complete=True)
    x = Series.x(ctx3.field)
    for _ in range(4):
        t = rand_point(ctx3.field, rng, val_min=0, prec=PREC)
        lhs = carlitz_eval(carlitz_delta(u), t, prec=PREC)
        rhs = carlitz_eval(u, x * t, prec=PREC) - x * carlitz_eval(
            u, t, prec=PREC)
        assert (lhs - rhs).val >= PREC - 10


def test_pointwise_tau_oracle(ctx3, rng):
    u = rand_coeffs(ctx3, rng, n=4, complete=True)
    for _ in range(4):
        t = rand_point(ctx3.field, rng, val_min=0, prec=PREC)
        lhs = carlitz_eval(carlitz_tau(u), t, prec=PREC)
        rhs = carlitz_eval(u, t, prec=PREC).frobenius(1)
        assert (lhs - rhs).val >= PREC - 10


def test_apply_p_matches_manual_sum(ctx3, rng):
    field = ctx3.field
    m = 2
    pis = []
    for _ in range(3):
        pis.append(SeriesMatrix(field, [
            [rand_series(field, rng, val_min=1, prec=PREC) for _ in range(m)]
            for _ in range(m)]))
    cs = [SeriesMatrix(field, [
        [rand_series(field, rng, val_min=0, prec=PREC) for _ in range(m)]
        for _ in range(m)]) for _ in range(4)]
    u = MatrixCarlitzCoeffs(ctx3, cs, complete=True)
    out = apply_p(pis, u)
    acc = u.lmul(pis[0])
    cur = u
    for k in (1, 2):
        cur = carlitz_tau(cur)
        acc = acc + cur.lmul(pis[k])
    for j in range(max(len(out), len(acc))):
        assert (out[j] - acc[j]).is_zero()


# -- sequence container behavior


def test_coeffs_indexing_and_completeness(ctx3):
    one = Series.one(ctx3.field)
    c = CarlitzCoeffs(ctx3, [one, one])
    assert c[1] == one
    with pytest.raises(IndexError):
        c[2]
    done = CarlitzCoeffs(ctx3, [one, one], complete=True)
    assert done[7].is_zero()


def test_coeffs_arithmetic(ctx3, rng):
    a = rand_coeffs(ctx3, rng, n=3)
    b = rand_coeffs(ctx3, rng, n=3)
    s = a + b
    for j in range(4):
        assert s[j] == a[j] + b[j]
    d = s - b
    for j in range(4):
        assert (d[j] - a[j]).is_zero()


# -- tail profiles


def test_profile_val_at_and_decay(F3):
    q = 3
    fin = FiniteTail(2)
    assert fin.val_at(3, q) == math.inf and fin.decays
    ari = ArithmeticTail(1, Fraction(2), Fraction(1, 2))
    assert ari.val_at(1, q) == 2
    assert ari.val_at(5, q) == 2 + 4 * Fraction(1, 2)
    assert ari.decays and ari.gamma == 0
    flat = ArithmeticTail(0, Fraction(0), Fraction(0))
    assert not flat.decays
    exp = ExponentialTail(0, Fraction(1, 2), Fraction(-1, 2))
    assert exp.val_at(4, q) == Fraction(3 ** 4 - 1, 2)
    assert exp.decays and exp.gamma == Fraction(1, 2)


def test_tail_min_bounds_future_terms(F3):
    exp = ExponentialTail(0, Fraction(1, 2), Fraction(-1, 2))
    m = exp.tail_min(3, 3)
    assert m == exp.val_at(3, 3)


# -- evaluation paths


def test_eval_single_coefficient(ctx3, rng):
    c0 = rand_series(ctx3.field, rng, val_min=0, prec=PREC)
    u = CarlitzCoeffs(ctx3, [c0], complete=True)
    t = rand_point(ctx3.field, rng, val_min=0, prec=PREC)
    # f_0 = t, so u(t) = c_0 t
    assert (carlitz_eval(u, t, prec=PREC) - c0 * t).val >= PREC - 5


def test_eval_polynomial_shortcut_finite_sum(ctx3):
    field = ctx3.field
    one = Series.one(field)
    cs = [one] * 9
    u = CarlitzCoeffs(ctx3, cs)  # not complete, no profile
    t = Series.x(field, 2) + Series.x(field)  # degree-2 polynomial
    # f_i(t) = 0 for i > deg t, so the sum is exact and finite
    got = carlitz_eval(u, t)
    direct = sum((ctx3.f_eval(i, t) for i in range(1, 3)),
                 ctx3.f_eval(0, t))
    assert (got - direct).is_zero()


def test_eval_without_tail_information_refuses(ctx3, rng):
    u = CarlitzCoeffs(ctx3, [Series.one(ctx3.field)] * 4)
    t = rand_point(ctx3.field, rng, val_min=1, prec=60)
    with pytest.raises(UnsupportedCase):
        carlitz_eval(u, t)


def test_eval_profile_drives_output_precision(ctx3):
    field = ctx3.field
    one = Series.one(field)
    u = CarlitzCoeffs(ctx3, [one, one],
                      profile=ArithmeticTail(1, Fraction(0), Fraction(2)))
    t = Series.x(field).truncate(Fraction(90))
    got = carlitz_eval(u, t, prec=Fraction(90))
    # tail valuations 0, 2, 4, ... cap the achievable precision
    assert got.prec <= Fraction(90)


def test_eval_nondecaying_profile_polynomial_only(ctx3):
    field = ctx3.field
    one = Series.one(field)
    u = CarlitzCoeffs(ctx3, [one, one, one],
                      profile=ArithmeticTail(2, Fraction(0), Fraction(0)))
    with pytest.raises(OutOfDomain):
        carlitz_eval(u, Series.x(field).truncate(Fraction(40)),
                     prec=Fraction(40))
    p = Series.x(field, 2) + Series.one(field)
    got = carlitz_eval(u, p)
    want = (u[0] * ctx3.f_eval(0, p) + u[1] * ctx3.f_eval(1, p)
            + u[2] * ctx3.f_eval(2, p))
    assert (got - want).is_zero()


def test_matrix_eval_matches_entrywise(ctx3, rng):
    field = ctx3.field
    cs = [SeriesMatrix(field, [
        [rand_series(field, rng, val_min=0, prec=PREC) for _ in range(2)]
        for _ in range(2)]) for _ in range(3)]
    u = MatrixCarlitzCoeffs(ctx3, cs, complete=True)
    t = rand_point(field, rng, val_min=1, prec=PREC)
    got = carlitz_eval(u, t, prec=PREC)
    for i in range(2):
        for j in range(2):
            scalar = CarlitzCoeffs(ctx3, [c[i, j] for c in cs],
                                   complete=True)
            want = carlitz_eval(scalar, t, prec=PREC)
            assert (got[i, j] - want).val >= PREC - 5


# -- F_q-linear power series operators


def test_linear_delta_matches_pointwise(ctx3, rng):
    field = ctx3.field
    coeffs = [rand_series(field, rng, val_min=0, prec=PREC)
              for _ in range(3)]
    out = linear_delta(ctx3, coeffs)
    t = rand_point(field, rng, val_min=1, prec=PREC)
    x = Series.x(field)
    lhs = lps_eval(ctx3, out, t, prec=PREC)
    rhs = lps_eval(ctx3, coeffs, x * t, prec=PREC) - x * lps_eval(
        ctx3, coeffs, t, prec=PREC)
    assert (lhs - rhs).val >= PREC - 10


def test_linear_d_inverts_tau_shift(ctx3, rng):
    field = ctx3.field
    coeffs = [rand_series(field, rng, val_min=0, prec=PREC)
              for _ in range(3)]
    # tau(d(f)) = Delta(f) on power series coefficients as well
    dd = linear_d(ctx3, coeffs)
    taud = [Series.zero(field)] + [c.frobenius(1) for c in dd]
    want = linear_delta(ctx3, coeffs)
    # align lengths: Delta output starts at exponent q^0
    for j in range(min(len(taud), len(want))):
        diff = taud[j] - want[j]
        assert diff.is_zero() or diff.val >= PREC - 5
