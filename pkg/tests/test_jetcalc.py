import random

import pytest

from bvcalc import BvModel, Expr
from bvcalc.algebra import make_attach
from bvcalc.jetcalc import (
    canonicalize_channels,
    collapse,
    euler_channelled,
    euler_left,
    euler_right,
    fresh_label,
    iterated_variation_geometric,
    iterated_variation_naive,
    partial_left,
    partial_right,
    total_derivative,
)

from util_random import ghost_model, plane_model, random_expr, random_homogeneous, scalar_model


@pytest.fixture
def m():
    return scalar_model()


# -- total derivative -------------------------------------------------------

def test_total_derivative_examples(m):
    q, qx = m.jet("q"), m.jet("q", (1,))
    qd, qdx = m.jet("q", dagger=True), m.jet("q", (1,), dagger=True)
    assert total_derivative(q, 0) == qx
    assert total_derivative(m.cos("q"), 0) == -(m.sin("q") * qx)
    assert total_derivative(qd * q, 0) == qdx * q + qd * qx
    assert total_derivative(m.exp("q"), 0) == m.exp("q") * qx


def test_total_derivatives_commute():
    model = plane_model()
    rng = random.Random(21)
    for _ in range(40):
        e = random_expr(model, rng, with_attach=True)
        d01 = total_derivative(total_derivative(e, 0), 1)
        d10 = total_derivative(total_derivative(e, 1), 0)
        assert d01 == d10


def test_total_derivative_through_wrapper(m):
    pending = ((fresh_label(), (2,)),)
    w = make_attach(pending, m.cos("q"))
    lhs = total_derivative(w, 0)
    rhs = make_attach(pending, total_derivative(m.cos("q"), 0))
    assert lhs == rhs


# -- partial derivatives ----------------------------------------------------

def test_partial_examples(m):
    q, qxx = m.jet("q"), m.jet("q", (2,))
    qd = m.jet("q", dagger=True)
    f = qd * q * qxx
    assert partial_left(f, m.jet_atom("q", dagger=True)) == q * qxx
    assert partial_left(f, m.jet_atom("q", (2,))) == qd * q
    qdx = m.jet("q", (1,), dagger=True)
    g = qd * qdx
    assert partial_left(g, m.jet_atom("q", dagger=True)) == qdx
    assert partial_left(g, m.jet_atom("q", (1,), dagger=True)) == -qd
    assert partial_right(g, m.jet_atom("q", (1,), dagger=True)) == qd


def test_partial_chain_rule(m):
    v = m.jet_atom("q")
    assert partial_left(m.sin("q"), v) == m.cos("q")
    assert partial_left(m.cos("q"), v) == -m.sin("q")
    assert partial_left(m.exp("q") * m.exp("q"), v) == (m.exp("q") * m.exp("q")).scale(2)


def test_partials_commute_with_wrappers():
    model = ghost_model()
    rng = random.Random(22)
    for _ in range(40):
        h = random_homogeneous(model, rng, rng.randint(0, 1))
        v = model.jet_atom("q", (1,))
        pending = ((fresh_label(), (1,)),)
        lhs = partial_left(make_attach(pending, h), v)
        rhs = make_attach(pending, partial_left(h, v))
        assert lhs == rhs


# -- Euler operators --------------------------------------------------------

def test_euler_examples(m):
    q, qxx = m.jet("q"), m.jet("q", (2,))
    qd, qdxx = m.jet("q", dagger=True), m.jet("q", (2,), dagger=True)
    qdx_ = m.jet("q", (1,), dagger=True)
    qx = m.jet("q", (1,))
    e = euler_left(m, qd * q * qxx, "q")
    assert e == (qd * qxx).scale(2) + (qdx_ * qx).scale(2) + qdxx * q
    assert euler_left(m, qdxx * m.cos("q"), "q") == -(qdxx * m.sin("q"))
    assert euler_left(m, q * qxx, "q") == qxx.scale(2)


def test_euler_kernel_contains_divergences(m):
    rng = random.Random(23)
    model = ghost_model()
    for _ in range(100):
        h = random_expr(model, rng, with_trig=True)
        dh = total_derivative(h, 0)
        for name, dagger in model.variables():
            assert euler_left(model, dh, name, dagger).is_zero()


def test_euler_right_relation(m):
    rng = random.Random(24)
    for _ in range(30):
        h = random_homogeneous(m, rng, rng.randint(0, 1))
        p = h.parity()
        lhs = euler_right(m, h, "q", True)
        rhs = euler_left(m, h, "q", True)
        if (p - 1) & 1:
            rhs = -rhs
        assert lhs == rhs


# -- channelled operators ---------------------------------------------------

def test_euler_channelled_examples(m):
    q, qxx = m.jet("q"), m.jet("q", (2,))
    qd = m.jet("q", dagger=True)
    f = qd * q * qxx
    lab = fresh_label()
    e = euler_channelled(m, f, "q", False, lab)
    expected = qd * qxx + make_attach(((lab, (2,)),), qd * q)
    assert e == expected

    # both contributions are pending derivatives of the constant 1
    w = make_attach(((fresh_label(), (2,)),), q)
    assert euler_channelled(m, qxx + w, "q", False, fresh_label()).is_zero()

    # a partial passing through an existing wrapper
    z2 = fresh_label()
    w2 = make_attach(((z2, (2,)),), -m.sin("q"))
    out = euler_channelled(m, w2, "q", False, fresh_label())
    assert out == make_attach(((z2, (2,)),), -m.cos("q"))


def test_euler_channelled_label_reuse_rejected(m):
    lab = fresh_label()
    w = make_attach(((lab, (1,)),), m.jet("q"))
    with pytest.raises(ValueError):
        euler_channelled(m, w, "q", False, lab)


def test_collapse_examples(m):
    q = m.jet("q")
    qx, qxx = m.jet("q", (1,)), m.jet("q", (2,))
    qd = m.jet("q", dagger=True)
    w = make_attach(((fresh_label(), (2,)),), -m.sin("q"))
    assert collapse(w) == m.sin("q") * qx * qx - m.cos("q") * qxx
    assert collapse(make_attach(((fresh_label(), (2,)),), Expr.scalar(1))).is_zero()
    assert collapse(qd * qxx) == qd * qxx
    assert collapse(make_attach((), q * qx)) == q * qx


def test_collapse_of_channelled_euler_is_plain_euler():
    model = ghost_model()
    rng = random.Random(25)
    for _ in range(50):
        e = random_homogeneous(model, rng, rng.randint(0, 1))
        for name, dagger in (("q", False), ("q", True), ("c", False)):
            lab = fresh_label()
            chan = euler_channelled(model, e, name, dagger, lab, isolate=True)
            assert collapse(chan) == euler_left(model, e, name, dagger)


def test_canonicalize_channels(m):
    c = m.cos("q")
    a = make_attach(((7, (2,)),), c)
    b = make_attach(((9, (2,)),), c)
    assert canonicalize_channels(a) == canonicalize_channels(b)
    two = make_attach(((7, (1,)),), m.jet("q")) * make_attach(((9, (2,)),), m.jet("q"))
    canon = canonicalize_channels(two)
    labels = set()
    for mono in canon.monomials():
        for atom, _ in mono.factors():
            labels.update(lab for lab, _ in atom.pending)
    assert labels == {0, 1}
    plain = m.jet("q") * m.jet("q", (1,))
    assert canonicalize_channels(plain) == plain


def test_channel_swap_odd_monomial_vanishes(m):
    # a monomial odd under renaming its own bound channels is zero
    qd = m.jet("q", dagger=True)
    w1 = make_attach(((3, (2,)),), qd)
    w2 = make_attach(((5, (2,)),), qd)
    assert not (w1 * w2).is_zero()
    assert canonicalize_channels(w1 * w2).is_zero()


# -- iterated variations ----------------------------------------------------

def test_iterated_variation_discrepancy(m):
    qx = m.jet("q", (1,))
    f = qx * qx
    naive, ext_n = iterated_variation_naive(m, f, [("q", False), ("q", False)])
    geo, ext_g = iterated_variation_geometric(m, f, [("q", False), ("q", False)])
    assert naive == -(ext_n.jet("sh1", (2,)) * ext_n.jet("sh2")).scale(2)
    assert geo.is_zero()
    assert collapse(geo) != naive


def test_single_variation_agrees_with_euler(m):
    f = m.jet("q") * m.jet("q", (1,)) + m.jet("q", (2,))
    naive, ext = iterated_variation_naive(m, f, [("q", False)])
    geo, ext_g = iterated_variation_geometric(m, f, [("q", False)])
    assert naive == ext.jet("sh1") * euler_left(ext, f, "q")
    assert collapse(geo) == naive


def test_geometric_variations_graded_commute(m):
    rng = random.Random(26)
    for _ in range(50):
        d = random_homogeneous(m, rng, rng.randint(0, 1))
        a = ("q", rng.random() < 0.5)
        b = ("q", rng.random() < 0.5)
        g_ab, _ = iterated_variation_geometric(m, d, [a, b], include_shifts=False)
        g_ba, _ = iterated_variation_geometric(m, d, [b, a], include_shifts=False)
        sign = (-1) ** (m.parity(*a) * m.parity(*b))
        assert canonicalize_channels(g_ab) == canonicalize_channels(g_ba.scale(sign))


def test_model_validation():
    with pytest.raises(ValueError):
        BvModel(0, [("q", 0)])
    with pytest.raises(ValueError):
        BvModel(1, [("q", 0), ("q", 1)])
    with pytest.raises(ValueError):
        BvModel(1, [("not a name", 0)])
