"""Seeded random generators shared by the test modules."""

import random
from fractions import Fraction

from bvcalc import BvModel, Expr
from bvcalc.coeff import Coefficient
from bvcalc.algebra import Trig, make_attach


def scalar_model() -> BvModel:
    return BvModel(1, [("q", 0)])


def ghost_model() -> BvModel:
    return BvModel(1, [("q", 0), ("c", 1)])


def plane_model() -> BvModel:
    return BvModel(2, [("u", 0)])


def random_coefficient(rng: random.Random) -> Coefficient:
    c = Coefficient.zero()
    for _ in range(rng.randint(1, 2)):
        deg = rng.choice([0, 0, 0, 1, -1])
        re = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        im = Fraction(rng.randint(-2, 2)) if rng.random() < 0.3 else Fraction(0)
        c = c + Coefficient({deg: (re, im)})
    if c.is_zero():
        c = Coefficient.of(1)
    return c


def random_atom_expr(model: BvModel, rng: random.Random, max_order=2,
                     with_trig=True, with_attach=False) -> Expr:
    n = model.base_dim
    names = [name for name, _ in model.fields]
    kind = rng.random()
    if with_attach and kind < 0.12:
        inner = random_monomial(model, rng, max_order, degree=rng.randint(1, 2),
                                with_trig=False, with_attach=False)
        if inner.is_zero():
            inner = model.jet(names[0])
        label = rng.randint(50, 59)
        idx = [0] * n
        idx[rng.randrange(n)] = rng.randint(1, 2)
        return make_attach(((label, tuple(idx)),), inner)
    if with_trig and kind < 0.3:
        even = [nm for nm in names if model.parity(nm) == 0]
        if even:
            tag = rng.choice(("sin", "cos", "exp"))
            return Expr.from_atom(Trig(tag, model.jet_atom(rng.choice(even))))
    if kind < 0.4:
        return model.x(rng.randrange(n))
    name = rng.choice(names)
    dagger = rng.random() < 0.5
    idx = [0] * n
    for _ in range(rng.randint(0, max_order)):
        idx[rng.randrange(n)] += 1
    return model.jet(name, tuple(idx), dagger)


def random_monomial(model, rng, max_order=2, degree=None, with_trig=True,
                    with_attach=False) -> Expr:
    out = Expr.scalar(random_coefficient(rng))
    for _ in range(degree if degree is not None else rng.randint(1, 3)):
        out = out * random_atom_expr(model, rng, max_order, with_trig, with_attach)
    return out


def random_expr(model, rng, terms=None, max_order=2, with_trig=True,
                with_attach=False) -> Expr:
    out = Expr.zero()
    for _ in range(terms if terms is not None else rng.randint(1, 4)):
        out = out + random_monomial(model, rng, max_order,
                                    with_trig=with_trig, with_attach=with_attach)
    return out


def random_homogeneous(model, rng, parity, max_order=2, degree=3,
                       with_trig=False) -> Expr:
    """Parity-homogeneous density with at least one jet factor per monomial."""
    from bvcalc.models import random_density
    return random_density(model, max_order, degree, parity, rng,
                          with_trig=with_trig)
