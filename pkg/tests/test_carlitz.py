"""Brackets, Carlitz factorials, and the orthonormal basis."""

from fractions import Fraction

import pytest

from carlitzde import CarlitzContext, FieldDesc, Series

from conftest import rand_point


def test_bracket_closed_form(ctx3):
    q = ctx3.field.q
    for j in range(1, 5):
        b = ctx3.bracket(j)
        assert b == Series.x(ctx3.field, q ** j) - Series.x(ctx3.field)
        assert b.val == 1


def test_bracket_negative_index(ctx3):
    # [−1] = x^(1/q) − x in the perfection
    b = ctx3.bracket(-1)
    assert b.val == Fraction(1, 3)
    assert b.e == 3
    assert ctx3.bracket(0).is_zero()


def test_bracket_frobenius_recurrence(ctx3):
    # [j+1] = [j]^q + [1]^(q^j) ... simplest stable form: [j]^q = [j+1] - [1]
    for j in range(1, 4):
        lhs = ctx3.bracket(j).frobenius(1)
        # x^(q^(j+1)) - x^q = [j+1] - [1]
        assert lhs == ctx3.bracket(j + 1) - ctx3.bracket(1)


def test_factorials_recurrence(ctx2):
    one = Series.one(ctx2.field)
    d_prev, l_prev = one, one
    for i in range(1, 6):
        d, l = ctx2.factorials(i)
        assert d == ctx2.bracket(i) * d_prev.frobenius(1)
        assert l == ctx2.bracket(i) * l_prev
        d_prev, l_prev = d, l


def test_factorial_valuations(ctx3):
    # val D_i = (q^i - 1)/(q - 1), val L_i = i
    q = ctx3.field.q
    for i in range(1, 6):
        d, l = ctx3.factorials(i)
        assert d.val == Fraction(q ** i - 1, q - 1)
        assert l.val == i


def test_e_eval_methods_agree(ctx3, rng):
    for _ in range(4):
        t = rand_point(ctx3.field, rng, val_min=0, prec=60)
        for i in range(3):
            a = ctx3.e_eval(i, t, method="recursion")
            b = ctx3.e_eval(i, t, method="product")
            assert (a - b).is_zero()


def test_e_product_formula(ctx2):
    # e_i(t) = prod over monic m of degree < i of (t - m); check i = 1:
    # e_1(t) = t^q - t over F_q[x] evaluated at t in the subfield ring
    t = Series.x(ctx2.field)
    e1 = ctx2.e_eval(1, t)
    assert e1 == t.frobenius(1) - t


def test_f_kills_low_degree_polynomials(ctx3):
    # f_i vanishes on polynomials of degree < i
    field = ctx3.field
    pts = [Series.one(field), Series.x(field),
           Series.x(field) + Series.one(field)]
    for t in pts:
        v = ctx3.f_eval(2, t, prec=Fraction(80))
        assert v.is_zero() and v.prec >= 80


def test_f_at_monomial_lemma_values(ctx2, ctx3):
    # |f_i(x^n)| = q^(i-n) for n >= i, and 0 below the diagonal
    for ctx in (ctx2, ctx3):
        q = ctx.field.q
        for i in range(4):
            for n in range(4):
                s = ctx.f_at_monomial(i, n, prec=Fraction(220))
                if n < i:
                    assert s.is_zero() and s.prec >= 200
                else:
                    assert s.val == n - i


def test_f_normalization(ctx3):
    # f_i = e_i / D_i has sup-norm 1 on the unit ball: val f_i(x^i) = 0
    for i in range(4):
        assert ctx3.f_at_monomial(i, i).val == 0


def test_f_values_consistent_with_f_eval(ctx3, rng):
    t = rand_point(ctx3.field, rng, val_min=1, prec=70)
    vals = ctx3.f_values(4, t, prec=Fraction(70))
    assert len(vals) == 5
    for i in range(5):
        assert (vals[i] - ctx3.f_eval(i, t, prec=Fraction(70))).is_zero()


def test_context_default_precision():
    ctx = CarlitzContext(FieldDesc(5), default_prec=99)
    assert ctx.default_prec == 99
