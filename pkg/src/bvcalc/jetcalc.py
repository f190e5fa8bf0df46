"""Jet-space calculus over a declared BV field table.

Provides the bundle declaration (BvModel), total derivatives, graded left and
right partial derivatives, plain and channelled Euler operators, collapse of
pending channel derivatives, canonical renaming of channel labels, and the
naive/geometric iterated variations.
"""

from __future__ import annotations

import itertools
import threading
from typing import Optional, Sequence, Tuple

from .coeff import Coefficient
from .algebra import (
    Atom,
    Attach,
    BaseVar,
    Expr,
    JetVar,
    Monomial,
    Trig,
    collect_channel_labels,
    make_attach,
    _from_raw,
)

# ---------------------------------------------------------------------------
# multi-indices


def idx_zero(n: int) -> Tuple[int, ...]:
    return (0,) * n


def idx_unit(n: int, i: int) -> Tuple[int, ...]:
    if not 0 <= i < n:
        raise ValueError(f"coordinate index {i} out of range for base dimension {n}")
    return tuple(1 if j == i else 0 for j in range(n))


def idx_add(a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def idx_order(a: Sequence[int]) -> int:
    return sum(a)


# ---------------------------------------------------------------------------
# the model


class BvModel:
    """Base dimension plus an ordered table of fields with ghost numbers.

    Every declared field q gets an antifield partner dag(q) with
    gh(dag q) = -gh(q) - 1; parities are the ghost numbers mod 2.
    """

    def __init__(self, base_dim: int, fields: Sequence[Tuple[str, int]]):
        if base_dim < 1:
            raise ValueError("base dimension must be positive")
        names = [name for name, _ in fields]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate field names in {names}")
        for name in names:
            if not name.isidentifier():
                raise ValueError(f"field name {name!r} is not an identifier")
        self.base_dim = int(base_dim)
        self.fields = tuple((name, int(gh)) for name, gh in fields)
        self._gh = {name: gh for name, gh in self.fields}

    def gh(self, name: str, dagger: bool = False) -> int:
        if name not in self._gh:
            raise KeyError(f"unknown field {name!r}")
        g = self._gh[name]
        return -g - 1 if dagger else g

    def parity(self, name: str, dagger: bool = False) -> int:
        return self.gh(name, dagger) & 1

    def jet_atom(self, name: str, index: Sequence[int] = (), dagger: bool = False) -> JetVar:
        idx = tuple(index) if index else idx_zero(self.base_dim)
        if len(idx) != self.base_dim:
            raise ValueError(
                f"multi-index {idx} has length {len(idx)}, base dimension is {self.base_dim}"
            )
        return JetVar(name, dagger, idx, self.gh(name, dagger))

    def jet(self, name: str, index: Sequence[int] = (), dagger: bool = False) -> Expr:
        return Expr.from_atom(self.jet_atom(name, index, dagger))

    def x(self, i: int) -> Expr:
        if not 0 <= i < self.base_dim:
            raise ValueError(f"no base coordinate x{i + 1} in dimension {self.base_dim}")
        return Expr.from_atom(BaseVar(i))

    def variables(self):
        """All (field, dagger) pairs, fields first."""
        for name, _ in self.fields:
            yield (name, False)
        for name, _ in self.fields:
            yield (name, True)

    def pairs(self):
        """Conjugate variable pairs as ((even member), (odd member)).

        The canonical coupling pairs the parity-even half against the odd
        half, so for an odd declared field (a ghost) the antifield occupies
        the even slot."""
        for name, gh in self.fields:
            if gh & 1:
                yield (name, True), (name, False)
            else:
                yield (name, False), (name, True)

    def extend(self, extra: Sequence[Tuple[str, int]]) -> "BvModel":
        return BvModel(self.base_dim, tuple(self.fields) + tuple(extra))

    def sin(self, name, index=(), dagger=False) -> Expr:
        return Expr.from_atom(Trig("sin", self.jet_atom(name, index, dagger)))

    def cos(self, name, index=(), dagger=False) -> Expr:
        return Expr.from_atom(Trig("cos", self.jet_atom(name, index, dagger)))

    def exp(self, name, index=(), dagger=False) -> Expr:
        return Expr.from_atom(Trig("exp", self.jet_atom(name, index, dagger)))

    def __repr__(self):
        return f"BvModel(dim={self.base_dim}, fields={list(self.fields)})"


# ---------------------------------------------------------------------------
# fresh channel labels

_label_counter = itertools.count(1)
_label_lock = threading.Lock()


def fresh_label() -> int:
    with _label_lock:
        return next(_label_counter)


# ---------------------------------------------------------------------------
# total derivative


def total_derivative(e: Expr, direction: int) -> Expr:
    """Total derivative D_i; linear, Leibniz, commutes with Attach wrappers."""
    raw = []
    for m in e.monomials():
        evens = m.even
        odds = m.odd
        for i, (a, k) in enumerate(evens):
            d = _atom_total_derivative(a, direction)
            if d is None:
                continue
            rest = list(evens[:i]) + ([(a, k - 1)] if k > 1 else []) + list(evens[i + 1:])
            for dm in d.monomials():
                factors = tuple(rest) + dm.factors() + tuple((o, 1) for o in odds)
                raw.append((m.coeff * Coefficient.of(k) * dm.coeff, factors))
        for j, a in enumerate(odds):
            d = _atom_total_derivative(a, direction)
            if d is None:
                continue
            pre = tuple((o, 1) for o in odds[:j])
            post = tuple((o, 1) for o in odds[j + 1:])
            for dm in d.monomials():
                factors = tuple(evens) + pre + dm.factors() + post
                raw.append((m.coeff * dm.coeff, factors))
    return _from_raw(raw)


def _atom_total_derivative(a: Atom, i: int) -> Optional[Expr]:
    if isinstance(a, JetVar):
        n = len(a.index)
        return Expr.from_atom(JetVar(a.field, a.dagger, idx_add(a.index, idx_unit(n, i)), a.gh))
    if isinstance(a, BaseVar):
        return Expr.scalar(1) if a.coord == i else None
    if isinstance(a, Trig):
        u = a.arg
        n = len(u.index)
        du = Expr.from_atom(JetVar(u.field, u.dagger, idx_add(u.index, idx_unit(n, i)), u.gh))
        if a.tag == "sin":
            return Expr.from_atom(Trig("cos", u)) * du
        if a.tag == "cos":
            return -(Expr.from_atom(Trig("sin", u)) * du)
        return Expr.from_atom(Trig("exp", u)) * du
    if isinstance(a, Attach):
        d = total_derivative(a.inner, i)
        if d.is_zero():
            return None
        return make_attach(a.pending, d)
    raise TypeError(f"unknown atom {a!r}")


def total_derivative_multi(e: Expr, index: Sequence[int]) -> Expr:
    out = e
    for i, k in enumerate(index):
        for _ in range(k):
            out = total_derivative(out, i)
    return out


# ---------------------------------------------------------------------------
# graded partial derivatives (with optional channel wrapping)


def _matches(a: Atom, v: JetVar) -> bool:
    return isinstance(a, JetVar) and a.key == v.key


def _trig_chain(a: Trig) -> Expr:
    if a.tag == "sin":
        return Expr.from_atom(Trig("cos", a.arg))
    if a.tag == "cos":
        return -Expr.from_atom(Trig("sin", a.arg))
    return Expr.from_atom(Trig("exp", a.arg))


def _wrap_branch(coeff, factors, pend, isolate, external):
    """Finalize one derivative branch whose consumption happened at home.

    ``pend`` is (label, sigma) or None.  Home plains (everything that is not
    an Attach atom or an external field's jet variable) are gathered into a
    new Attach carrying ``pend``; without a pending the gather happens only
    when isolating.
    """
    if pend is None and not isolate:
        return [(coeff, tuple(factors))]
    keep_out = _keep_out_fn(external)
    sign, kept, wrapped = _split_factors(factors, keep_out)
    inner = _from_raw([(Coefficient.one(), tuple(wrapped))])
    attach = make_attach((pend,) if pend is not None else (), inner)
    out = []
    c = coeff if sign > 0 else -coeff
    for dm in attach.monomials():
        out.append((c * dm.coeff, tuple(kept) + dm.factors()))
    return out


def _keep_out_fn(external):
    ext = external or frozenset()

    def keep_out(a: Atom) -> bool:
        if isinstance(a, Attach):
            return True
        if isinstance(a, JetVar) and a.field in ext:
            return True
        if isinstance(a, Trig) and a.arg.field in ext:
            return True
        return False

    return keep_out


def _split_factors(factors, keep_out):
    kept = []
    wrapped = []
    sign = 1
    wrapped_odd = 0
    for a, e in factors:
        if keep_out(a):
            if a.parity and (wrapped_odd & 1):
                sign = -sign
            kept.append((a, e))
        else:
            wrapped.append((a, e))
            if a.parity:
                wrapped_odd += 1
    return sign, kept, wrapped


def channel_partial_left(
    e: Expr,
    v: JetVar,
    pend: Optional[Tuple[int, Tuple[int, ...]]] = None,
    isolate: bool = False,
    external: Optional[frozenset] = None,
) -> Expr:
    """Graded left partial d/dv, optionally recording the pending channel
    derivative ``pend = (label, sigma)`` at the block where v was consumed.

    Partials pass through Attach wrappers; a pending derivative created by
    consumption inside a wrapper joins that wrapper's pending set.
    """
    p_v = v.parity
    raw = []
    for m in e.monomials():
        evens = m.even
        odds = m.odd
        # even slots (all preceding factors even: no Koszul sign)
        for i, (a, k) in enumerate(evens):
            rest = list(evens[:i]) + ([(a, k - 1)] if k > 1 else []) + list(evens[i + 1:])
            rest_odd = tuple((o, 1) for o in odds)
            cmult = m.coeff * Coefficient.of(k)
            if _matches(a, v):
                raw.extend(_wrap_branch(cmult, tuple(rest) + rest_odd, pend, isolate, external))
            elif isinstance(a, Trig) and a.arg.key == v.key:
                chain = _trig_chain(a)
                for dm in chain.monomials():
                    factors = tuple(rest) + dm.factors() + rest_odd
                    raw.extend(_wrap_branch(cmult * dm.coeff, factors, pend, isolate, external))
            elif isinstance(a, Attach):
                dived = _dive(a, v, pend)
                if dived.is_zero():
                    continue
                for dm in dived.monomials():
                    factors = tuple(rest) + dm.factors() + rest_odd
                    raw.extend(_finish_attach_branch(cmult * dm.coeff, factors, isolate, external))
        # odd slots (Koszul sign for odd v)
        sign = 1
        for j, a in enumerate(odds):
            s = sign if p_v else 1
            if p_v and a.parity:
                sign = -sign
            pre = tuple((o, 1) for o in odds[:j])
            post = tuple((o, 1) for o in odds[j + 1:])
            cmult = m.coeff if s > 0 else -m.coeff
            if _matches(a, v):
                factors = tuple(evens) + pre + post
                raw.extend(_wrap_branch(cmult, factors, pend, isolate, external))
            elif isinstance(a, Attach):
                dived = _dive(a, v, pend)
                if dived.is_zero():
                    continue
                for dm in dived.monomials():
                    factors = tuple(evens) + pre + dm.factors() + post
                    raw.extend(_finish_attach_branch(cmult * dm.coeff, factors, isolate, external))
    return _from_raw(raw)


def _dive(a: Attach, v: JetVar, pend) -> Expr:
    """Derivative of an Attach atom: the partial passes through the wrapper
    and a new pending derivative joins the wrapper's own set."""
    d = partial_left(a.inner, v)
    if d.is_zero():
        return Expr.zero()
    pending = a.pending + ((pend,) if pend is not None else ())
    return make_attach(pending, d)


def _finish_attach_branch(coeff, factors, isolate, external):
    if not isolate:
        return [(coeff, tuple(factors))]
    keep_out = _keep_out_fn(external)
    sign, kept, wrapped = _split_factors(factors, keep_out)
    if not wrapped:
        return [(coeff, tuple(factors))]
    inner = _from_raw([(Coefficient.one(), tuple(wrapped))])
    attach = make_attach((), inner)
    out = []
    c = coeff if sign > 0 else -coeff
    for dm in attach.monomials():
        out.append((c * dm.coeff, tuple(kept) + dm.factors()))
    return out


def partial_left(e: Expr, v: JetVar) -> Expr:
    """Graded left partial derivative d->/dv."""
    return channel_partial_left(e, v)


def partial_right(e: Expr, v: JetVar) -> Expr:
    """Graded right partial derivative; on a parity-homogeneous monomial m,
    right = (-1)^(gh(v) * (gh(m) - 1)) * left."""
    if v.parity == 0:
        return partial_left(e, v)
    raw = []
    for m in e.monomials():
        single = Expr({m.atom_key(): m})
        d = partial_left(single, v)
        if (m.parity() - 1) & 1:
            d = -d
        for dm in d.monomials():
            raw.append((dm.coeff, dm.factors()))
    return _from_raw(raw)


# ---------------------------------------------------------------------------
# Euler operators


def occurring_indices(e: Expr, field: str, dagger: bool) -> set:
    found = set()
    for m in e.monomials():
        for a, _ in m.even:
            _collect_indices(a, field, dagger, found)
        for a in m.odd:
            _collect_indices(a, field, dagger, found)
    return found


def _collect_indices(a: Atom, field: str, dagger: bool, found: set):
    if isinstance(a, JetVar):
        if a.field == field and a.dagger == dagger:
            found.add(a.index)
    elif isinstance(a, Trig):
        u = a.arg
        if u.field == field and u.dagger == dagger:
            found.add(u.index)
    elif isinstance(a, Attach):
        found.update(occurring_indices(a.inner, field, dagger))


def euler_left(model: BvModel, e: Expr, field: str, dagger: bool = False) -> Expr:
    """Variational derivative sum_sigma (-D)^sigma (d->/dq_sigma), with the
    pending derivatives expanded immediately (naive / collapsed mode)."""
    out = Expr.zero()
    for idx in occurring_indices(e, field, dagger):
        v = model.jet_atom(field, idx, dagger)
        term = total_derivative_multi(partial_left(e, v), idx)
        if idx_order(idx) & 1:
            term = -term
        out = out + term
    return out


def euler_right(model: BvModel, e: Expr, field: str, dagger: bool = False) -> Expr:
    out = Expr.zero()
    for idx in occurring_indices(e, field, dagger):
        v = model.jet_atom(field, idx, dagger)
        term = total_derivative_multi(partial_right(e, v), idx)
        if idx_order(idx) & 1:
            term = -term
        out = out + term
    return out


def euler_channelled(
    model: BvModel,
    e: Expr,
    field: str,
    dagger: bool,
    label: int,
    side: str = "left",
    isolate: bool = False,
    external: Optional[frozenset] = None,
) -> Expr:
    """Channelled Euler operator: pending derivatives are recorded against the
    fresh channel ``label`` instead of being expanded."""
    if label in collect_channel_labels(e):
        raise ValueError(f"channel label {label!r} already occurs in expression")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    out = Expr.zero()
    for idx in occurring_indices(e, field, dagger):
        v = model.jet_atom(field, idx, dagger)
        pend = (label, idx) if idx_order(idx) > 0 else None
        if side == "left":
            term = channel_partial_left(e, v, pend, isolate, external)
        else:
            term = Expr.zero()
            for m in e.monomials():
                single = Expr({m.atom_key(): m})
                d = channel_partial_left(single, v, pend, isolate, external)
                if v.parity and ((m.parity() - 1) & 1):
                    d = -d
                term = term + d
        if idx_order(idx) & 1:
            term = -term
        out = out + term
    return out


# ---------------------------------------------------------------------------
# collapse


def collapse(e: Expr) -> Expr:
    """Expand every pending channel derivative into genuine total derivatives,
    innermost first; the result carries no Attach atoms."""
    out = Expr.zero()
    for m in e.monomials():
        term = Expr.scalar(m.coeff)
        for a, k in m.factors():
            fa = _collapse_atom(a)
            for _ in range(k):
                term = term * fa
            if term.is_zero():
                break
        out = out + term
    return out


def _collapse_atom(a: Atom) -> Expr:
    if isinstance(a, Attach):
        h = collapse(a.inner)
        total = None
        for _, idx in a.pending:
            total = idx if total is None else idx_add(total, idx)
        if total is not None:
            h = total_derivative_multi(h, total)
        return h
    return Expr.from_atom(a)


# ---------------------------------------------------------------------------
# canonical channel labels


def canonicalize_channels(e: Expr) -> Expr:
    """Rename channel labels per monomial to the canonical sequence 0,1,2,...

    Channel labels are bound names (each tags one pending variation), so two
    monomials differing only by a bijective relabelling denote the same
    object; after renaming such monomials merge or cancel.
    """
    out = Expr.zero()
    for m in e.monomials():
        labels = sorted(_monomial_labels(m))
        if not labels:
            out = out + Expr({m.atom_key(): m})
            continue
        if len(labels) > 7:
            raise ValueError(f"too many channel labels to canonicalize: {labels}")
        best = None
        seen = {}
        dead = False
        for perm in itertools.permutations(range(len(labels))):
            mapping = {lab: perm[i] for i, lab in enumerate(labels)}
            candidate = _relabel_monomial(m, mapping)
            ((mk, mono),) = candidate.terms.items()
            prev = seen.get(mk)
            if prev is None:
                seen[mk] = mono.coeff
            elif prev != mono.coeff:
                # the monomial is odd under a renaming of its bound channel
                # labels, hence equal to minus itself: it vanishes
                dead = True
                break
            if best is None or candidate.key() < best.key():
                best = candidate
        if not dead:
            out = out + best
    return out


def _monomial_labels(m: Monomial) -> set:
    labels = set()
    for a, _ in m.even:
        _atom_labels(a, labels)
    for a in m.odd:
        _atom_labels(a, labels)
    return labels


def _atom_labels(a: Atom, labels: set):
    if isinstance(a, Attach):
        labels.update(lab for lab, _ in a.pending)
        for b in a.inner.atoms():
            _atom_labels(b, labels)


def _relabel_monomial(m: Monomial, mapping) -> Expr:
    factors = [(_relabel_atom(a, mapping), k) for a, k in m.factors()]
    return _from_raw([(m.coeff, tuple(factors))])


def _relabel_atom(a: Atom, mapping) -> Atom:
    if isinstance(a, Attach):
        pending = tuple((mapping.get(lab, lab), idx) for lab, idx in a.pending)
        inner_atoms = list(a.inner.atoms())
        if any(isinstance(b, Attach) for b in inner_atoms):
            raw = []
            for mm in a.inner.monomials():
                raw.append((mm.coeff, tuple((_relabel_atom(b, mapping), k) for b, k in mm.factors())))
            return Attach(pending, _from_raw(raw))
        return Attach(pending, a.inner)
    return a


# ---------------------------------------------------------------------------
# iterated variations


def iterated_variation(
    model: BvModel,
    f: Expr,
    shifts: Sequence[Tuple[str, bool]],
    mode: str,
    include_shifts: bool = True,
):
    """Iterated variation of a density along the given (field, dagger) shift
    directions, first entry applied first.

    Naive mode composes fully expanded Euler operators step by step; geometric
    mode records each step's derivatives against a fresh channel.  With
    ``include_shifts`` each step multiplies in a formal shift field sh<k>
    carrying the parity of its target; the shift fields live in the returned
    extended model.
    """
    if not shifts:
        raise ValueError("shifts must be non-empty")
    if mode not in ("naive", "geometric"):
        raise ValueError(f"unknown mode {mode!r}")
    aux = []
    for k, (field, dagger) in enumerate(shifts, start=1):
        aux.append((f"sh{k}", model.gh(field, dagger)))
    ext = model.extend(aux) if include_shifts else model
    aux_names = frozenset(name for name, _ in aux)
    e = f
    for k, (field, dagger) in enumerate(shifts, start=1):
        if mode == "naive":
            e = euler_left(ext, e, field, dagger)
        else:
            e = euler_channelled(
                ext, e, field, dagger, fresh_label(),
                side="left", isolate=False, external=aux_names,
            )
        if include_shifts:
            e = ext.jet(f"sh{k}") * e
    return e, ext


def iterated_variation_naive(model, f, shifts, include_shifts=True):
    return iterated_variation(model, f, shifts, "naive", include_shifts)


def iterated_variation_geometric(model, f, shifts, include_shifts=True):
    return iterated_variation(model, f, shifts, "geometric", include_shifts)
