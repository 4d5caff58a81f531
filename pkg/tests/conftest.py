import random
from fractions import Fraction

import pytest

from carlitzde import CarlitzContext, FieldDesc, Series


@pytest.fixture(scope="session")
def F2():
    return FieldDesc(2)


@pytest.fixture(scope="session")
def F3():
    return FieldDesc(3)


@pytest.fixture(scope="session")
def F4():
    return FieldDesc(2, v=2)


@pytest.fixture(scope="session")
def F9():
    return FieldDesc(3, f=2)


@pytest.fixture(scope="session")
def ctx2(F2):
    return CarlitzContext(F2)


@pytest.fixture(scope="session")
def ctx3(F3):
    return CarlitzContext(F3)


@pytest.fixture
def rng():
    return random.Random(20260816)


def rand_series(field, rng, val_min=0, val_max=4, nterms=4, prec=None,
                nonzero=True):
    """Random series with exponents in [val_min, val_max + nterms)."""
    exps = rng.sample(range(val_min, val_max + nterms), k=nterms)
    terms = {}
    for e in exps:
        c = rng.randrange(1 if nonzero and e == min(exps) else 0, field.Q)
        if c:
            terms[e] = field.elem(c)
    if nonzero and not terms:
        terms[val_min] = field.elem(1)
    return Series.build(field, terms, prec=Fraction(prec) if prec else None)


def rand_point(field, rng, val_min=1, prec=60):
    """Random evaluation point with |t| <= q^-val_min."""
    return rand_series(field, rng, val_min=val_min, val_max=val_min + 3,
                       nterms=3, prec=prec)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
