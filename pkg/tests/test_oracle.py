import math
import random

import pytest

from bvcalc import Expr
from bvcalc.cohomology import Functional
from bvcalc.jetcalc import total_derivative
from bvcalc.bv import schouten
from bvcalc.models import random_density
from bvcalc.oracle import (
    FrequencyError,
    GrassmannNumber,
    SectionSpec,
    evaluate,
)

from util_random import scalar_model


@pytest.fixture
def m():
    return scalar_model()


def g(k):
    return GrassmannNumber.generator(k)


# -- Grassmann arithmetic ----------------------------------------------------

def test_generator_squares_vanish():
    assert (g(0) * g(0)).max_abs() == 0.0


def test_anticommutativity():
    assert (g(0) * g(1) + g(1) * g(0)).max_abs() == 0.0


def test_associativity_random():
    rng = random.Random(5)
    def rand_g():
        out = GrassmannNumber()
        for _ in range(3):
            mask = rng.randrange(16)
            out = out + GrassmannNumber({mask: rng.uniform(-2, 2)})
        return out
    for _ in range(50):
        a, b, c = rand_g(), rand_g(), rand_g()
        assert ((a * b) * c - a * (b * c)).max_abs() < 1e-12


def test_generator_cap():
    with pytest.raises(ValueError):
        GrassmannNumber.generator(8)


# -- evaluation ---------------------------------------------------------------

def sin_section(m):
    return SectionSpec(m, {("q", False): [(1.0, (("sin", 1),))]})


def test_total_derivative_integrates_to_zero(m):
    F = Functional.from_density(m, m.jet("q") * m.jet("q", (1,)))
    v = evaluate(F, sin_section(m), 16)
    assert abs(v.body()) < 1e-12


def test_sin_squared_integral(m):
    F = Functional.from_density(m, m.jet("q") * m.jet("q"))
    v = evaluate(F, sin_section(m), 16)
    assert abs(v.body() - math.pi) < 1e-12


def test_grassmann_valued_integral(m):
    s = SectionSpec(m, {
        ("q", False): [(1.0, (("cos", 1),))],
        ("q", True): [(g(0), (("sin", 1),))],
    })
    F = Functional.from_density(m, m.jet("q", dagger=True) * m.jet("q", (1,)))
    v = evaluate(F, s, 16)
    expected = GrassmannNumber({1: -math.pi})
    assert (v - expected).max_abs() < 1e-12


def test_insufficient_points_detected(m):
    F = Functional.from_density(m, (m.jet("q") ** 4))
    with pytest.raises(FrequencyError):
        evaluate(F, sin_section(m), 4)


def test_base_coordinates_rejected(m):
    F = Functional.from_density(m, m.x(0) * m.jet("q"))
    with pytest.raises(FrequencyError):
        evaluate(F, sin_section(m), 16)


def random_section(m, rng, odd_gen):
    def trig_poly(grass=None):
        terms = []
        for _ in range(rng.randint(1, 2)):
            coeff = rng.uniform(-1.0, 1.0)
            if grass is not None:
                coeff = grass.scale(coeff)
            kind = rng.choice(("sin", "cos"))
            freq = rng.randint(1, 2)
            terms.append((coeff, ((kind, freq),)))
        return terms
    return SectionSpec(m, {
        ("q", False): trig_poly(),
        ("q", True): trig_poly(g(odd_gen)),
    })


def test_synonym_consistency(m):
    rng = random.Random(7)
    for i in range(20):
        h = random_density(m, 2, 3, rng.randint(0, 1), rng)
        r = random_density(m, 1, 2, rng.randint(0, 1), rng)
        h2 = h + total_derivative(r, 0)
        for j in range(2):
            s = random_section(m, rng, odd_gen=j)
            v1 = evaluate(Functional.from_density(m, h), s, 64)
            v2 = evaluate(Functional.from_density(m, h2), s, 64)
            assert (v1 - v2).max_abs() < 1e-9


def test_product_evaluation_is_grassmann_product(m):
    rng = random.Random(8)
    for _ in range(10):
        a = random_density(m, 1, 2, 0, rng)
        b = random_density(m, 1, 2, rng.randint(0, 1), rng)
        F = Functional.from_density(m, a)
        G = Functional.from_density(m, b)
        s = random_section(m, rng, odd_gen=0)
        lhs = evaluate(F * G, s, 64)
        rhs = evaluate(F, s, 64) * evaluate(G, s, 64)
        assert (lhs - rhs).max_abs() < 1e-9


def test_sign_oracle_finite_difference(m):
    rng = random.Random(9)
    eps = 1e-4

    def even_density(max_order, max_degree):
        out = Expr.zero()
        for _ in range(rng.randint(1, 3)):
            mono = Expr.scalar(rng.choice([1, -1, 2]))
            for _ in range(rng.randint(1, max_degree)):
                mono = mono * m.jet("q", (rng.randint(0, max_order),))
            out = out + mono
        return out if not out.is_zero() else m.jet("q") * m.jet("q")

    for i in range(6):
        f0 = even_density(2, 3)
        B = even_density(1, 2)
        Ff = Functional.from_density(m, f0)
        Gf = Functional.from_density(m, m.jet("q", dagger=True) * B)
        s = SectionSpec(m, {("q", False): [(0.7, (("sin", 1),)), (0.3, (("cos", 2),))]})
        val = evaluate(schouten(Ff, Gf), s, 64).body()
        plus = evaluate(Ff, s, 64, shift=("q", eps, B)).body()
        minus = evaluate(Ff, s, 64, shift=("q", -eps, B)).body()
        fd = (plus - minus) / (2 * eps)
        scale = max(1.0, abs(fd))
        assert abs(val - fd) <= 1e-4 * scale
        swapped = evaluate(schouten(Gf, Ff), s, 64).body()
        assert abs(swapped + fd) <= 1e-4 * scale
