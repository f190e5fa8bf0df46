"""Functionals as horizontal-cohomology classes.

A density is trivial (a total divergence) iff every Euler operator of it
vanishes and its field-free part is zero; integral functionals are then
equivalence classes of densities, and formal graded-commutative products of
such blocks form the space of local functionals.
"""

from __future__ import annotations

from typing import Tuple

from .coeff import Coefficient
from .algebra import Attach, Expr, JetVar, Trig
from .jetcalc import BvModel, canonicalize_channels, collapse, euler_left


# ---------------------------------------------------------------------------
# density-level decisions


def field_free_part(e: Expr) -> Expr:
    """The part of a density containing no jet variables at all."""
    keep = {}
    for k, m in e.terms.items():
        if not any(_has_fields(a) for a, _ in m.even) and not any(
            _has_fields(a) for a in m.odd
        ):
            keep[k] = m
    return Expr(keep)


def _has_fields(a) -> bool:
    if isinstance(a, JetVar):
        return True
    if isinstance(a, Trig):
        return True
    if isinstance(a, Attach):
        return any(_has_fields(b) for b in a.inner.atoms())
    return False


def is_trivial(model: BvModel, density: Expr) -> bool:
    """True iff the density is a total divergence: all Euler operators vanish
    and the field-free residue is zero.  Expects a wrapper-free density."""
    if density.has_attach():
        raise ValueError("structured density: collapse before cohomological tests")
    if not field_free_part(density).is_zero():
        return False
    for field, dagger in model.variables():
        if not euler_left(model, density, field, dagger).is_zero():
            return False
    return True


def densities_equivalent(model: BvModel, a: Expr, b: Expr) -> bool:
    return is_trivial(model, a - b)


# ---------------------------------------------------------------------------
# functionals


class Functional:
    """Formal coefficient-ring combination of products of integral blocks.

    Each term is a coefficient times an ordered product of blocks; a block is
    a density expression (structured when it carries Attach atoms).  Block
    products are graded-commutative: blocks are kept sorted by canonical key
    with the Koszul sign absorbed, and a repeated odd block vanishes.
    """

    __slots__ = ("model", "terms")

    def __init__(self, model: BvModel, terms=None):
        self.model = model
        self.terms = terms or {}

    # -- constructors ---------------------------------------------------

    @staticmethod
    def from_density(model: BvModel, density: Expr) -> "Functional":
        if density.is_zero():
            return Functional(model)
        return Functional(model, {(density,): Coefficient.one()})

    @staticmethod
    def zero(model: BvModel) -> "Functional":
        return Functional(model)

    @staticmethod
    def constant(model: BvModel, value) -> "Functional":
        c = Coefficient.of(value)
        if c.is_zero():
            return Functional(model)
        return Functional(model, {(): c})

    # -- structure --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def parity(self) -> int:
        p = None
        for blocks in self.terms:
            bp = sum(b.parity() for b in blocks) & 1
            if p is None:
                p = bp
            elif bp != p:
                from .algebra import ParityError
                raise ParityError("parity-heterogeneous functional")
        return 0 if p is None else p

    def ghost_number(self) -> int:
        g = None
        for blocks in self.terms:
            bg = sum(b.ghost_number() for b in blocks)
            if g is None:
                g = bg
            elif bg != g:
                from .algebra import GhostNumberError
                raise GhostNumberError("ghost-number-heterogeneous functional")
        return 0 if g is None else g

    def blocks(self):
        for blocks in self.terms:
            yield from blocks

    # -- algebra ----------------------------------------------------------

    def _add_term(self, acc, blocks, coeff):
        if coeff.is_zero():
            return
        if any(b.is_zero() for b in blocks):
            return
        sorted_blocks = _sort_blocks(blocks)
        if sorted_blocks is None:
            return
        sign, key = sorted_blocks
        if sign < 0:
            coeff = -coeff
        prev = acc.get(key)
        c = coeff if prev is None else prev + coeff
        if c.is_zero():
            acc.pop(key, None)
        else:
            acc[key] = c

    def __add__(self, other):
        _check_model(self, other)
        acc = dict(self.terms)
        for blocks, c in other.terms.items():
            prev = acc.get(blocks)
            s = c if prev is None else prev + c
            if s.is_zero():
                acc.pop(blocks, None)
            else:
                acc[blocks] = s
        return Functional(self.model, acc)

    def __neg__(self):
        return Functional(self.model, {b: -c for b, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, value) -> "Functional":
        c0 = Coefficient.of(value)
        if c0.is_zero():
            return Functional(self.model)
        return Functional(self.model, {b: c0 * c for b, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Coefficient)):
            return self.scale(other)
        _check_model(self, other)
        acc = {}
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                self._add_term(acc, b1 + b2, c1 * c2)
        return Functional(self.model, acc)

    def __rmul__(self, other):
        if isinstance(other, (int, Coefficient)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        out = Functional.constant(self.model, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Functional)
            and self.model is other.model
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash(frozenset((b, c) for b, c in self.terms.items()))

    def collapse(self) -> "Functional":
        out = Functional(self.model)
        acc = {}
        for blocks, c in self.terms.items():
            self._add_term(acc, tuple(collapse(b) for b in blocks), c)
        return Functional(self.model, acc)

    def canonicalize(self) -> "Functional":
        acc = {}
        for blocks, c in self.terms.items():
            self._add_term(acc, tuple(canonicalize_channels(b) for b in blocks), c)
        return Functional(self.model, acc)

    def __repr__(self):
        from .grammar import format_coefficient, format_expr
        if not self.terms:
            return "<0>"
        parts = []
        for blocks in sorted(self.terms, key=_blocks_key):
            c = self.terms[blocks]
            body = "*".join(f"<{format_expr(b)}>" for b in blocks) or "<vol>"
            parts.append(f"({format_coefficient(c)})*{body}")
        return " + ".join(parts)


def _blocks_key(blocks):
    return tuple(b.key() for b in blocks)


def _sort_blocks(blocks):
    """Sort blocks by canonical key, tracking the Koszul sign; a repeated odd
    block makes the product vanish (returns None)."""
    arr = list(blocks)
    sign = 1
    for i in range(1, len(arr)):
        b = arr[i]
        bk = b.key()
        bp = b.parity()
        j = i - 1
        while j >= 0 and arr[j].key() > bk:
            if bp and arr[j].parity():
                sign = -sign
            arr[j + 1] = arr[j]
            j -= 1
        arr[j + 1] = b
    for i in range(len(arr) - 1):
        if arr[i].parity() and arr[i].key() == arr[i + 1].key():
            return None
    return sign, tuple(arr)


def _check_model(a: Functional, b: Functional):
    if a.model is not b.model:
        raise ValueError("functionals belong to different models")


# ---------------------------------------------------------------------------
# functional equality


def functional_equal(
    F: Functional,
    G: Functional,
    mode: str = "structural",
) -> bool:
    """Decide equality of two functionals.

    Blocks of F - G are partitioned into equivalence classes: wrapper-free
    densities by cohomological equivalence, structured blocks either by
    channel-canonical structural equality (mode 'structural') or by collapse
    followed by cohomological equivalence (mode 'collapse').  Terms containing
    a block that is a trivial density vanish; the class-representative
    polynomials are then compared.
    """
    if mode not in ("structural", "collapse"):
        raise ValueError(f"unknown comparison mode {mode!r}")
    _check_model(F, G)
    H = F - G
    return not _reduce_functional(H, mode)


def _triviality_image(model: BvModel, b: Expr) -> dict:
    """Sparse coordinates of a density under the linear map whose kernel is
    exactly the trivial densities: all Euler-operator images together with
    the field-free residue."""
    img = {}
    for field, dagger in model.variables():
        e = euler_left(model, b, field, dagger)
        for k, mono in e.terms.items():
            img[("E", field, dagger, k)] = mono.coeff
    for k, mono in field_free_part(b).terms.items():
        img[("c", k)] = mono.coeff
    return img


class _ClassBasis:
    """Greedy exact basis of density classes modulo total divergences.

    Blocks are reduced against the basis of their triviality images by
    Gaussian elimination over the exact coefficient field; each block gets an
    expansion as a linear combination of independent basis classes.
    """

    def __init__(self, model: BvModel):
        self.model = model
        self.rows = []  # (parity, pivot_coord, normalized_vector)

    def expand(self, b: Expr):
        """Expansion of [b] over the basis: list of (basis_index, Coefficient)."""
        parity = b.parity()
        v = _triviality_image(self.model, b)
        expansion = []
        for idx, (p, pivot, row) in enumerate(self.rows):
            if p != parity:
                continue
            lam = v.get(pivot)
            if lam is None or lam.is_zero():
                continue
            for coord, c in row.items():
                cur = v.get(coord, Coefficient.zero()) - lam * c
                if cur.is_zero():
                    v.pop(coord, None)
                else:
                    v[coord] = cur
            expansion.append((idx, lam))
        v = {k: c for k, c in v.items() if not c.is_zero()}
        if v:
            pivot = min(v)
            scale = v[pivot].inverse()
            row = {k: scale * c for k, c in v.items()}
            self.rows.append((parity, pivot, row))
            expansion.append((len(self.rows) - 1, v[pivot]))
        return expansion


def _graded_expand(terms, factors_expansions, parities, seed=None):
    """Multiply out a product of linear combinations of graded symbols.

    ``factors_expansions`` is a list of [(symbol, Coefficient)] expansions;
    symbols multiply graded-commutatively with parities from ``parities``.
    ``terms`` maps sorted symbol tuples to Coefficients and is updated."""
    acc = {(): seed if seed is not None else Coefficient.one()}
    for expansion in factors_expansions:
        nxt = {}
        for key, c in acc.items():
            for sym, lam in expansion:
                sign, new_key = _insert_symbol(key, sym, parities)
                if sign == 0:
                    continue
                add = c * lam
                if sign < 0:
                    add = -add
                prev = nxt.get(new_key)
                s = add if prev is None else prev + add
                if s.is_zero():
                    nxt.pop(new_key, None)
                else:
                    nxt[new_key] = s
        acc = nxt
        if not acc:
            return
    for key, c in acc.items():
        prev = terms.get(key)
        s = c if prev is None else prev + c
        if s.is_zero():
            terms.pop(key, None)
        else:
            terms[key] = s


def _insert_symbol(key, sym, parities):
    """Insert a graded symbol into a sorted product key; returns (sign, key).

    Odd symbols anticommute and square to zero."""
    p = parities[sym]
    sign = 1
    out = list(key)
    pos = len(out)
    for i, s in enumerate(out):
        if sym < s:
            pos = i
            break
    if p:
        for s in out[pos:]:
            if parities[s]:
                sign = -sign
        if any(s == sym and parities[s] for s in out):
            return 0, ()
    out.insert(pos, sym)
    return sign, tuple(out)


def _reduce_functional(H: Functional, mode: str) -> dict:
    """Reduce a functional to a graded polynomial over independent density
    classes (plain blocks) and canonical structured blocks; the result is the
    zero functional iff the returned term map is empty."""
    model = H.model
    basis = _ClassBasis(model)
    parities = {}
    terms = {}
    plain_cache = {}
    for blocks, c in H.terms.items():
        expansions = []
        dead = False
        for b in blocks:
            if mode == "collapse":
                b = collapse(b)
            if b.has_attach():
                b = canonicalize_channels(b)
                if b.is_zero():
                    dead = True
                    break
                b, lead = _scale_canonical(b)
                c = c * lead
                sym = ("s", b.key())
                parities[sym] = b.parity()
                expansions.append([(sym, Coefficient.one())])
            else:
                if b.is_zero():
                    dead = True
                    break
                cached = plain_cache.get(b)
                if cached is None:
                    raw = basis.expand(b)
                    cached = [(("p", i), lam) for i, lam in raw]
                    for i, _ in raw:
                        parities[("p", i)] = basis.rows[i][0]
                    plain_cache[b] = cached
                if not cached:
                    dead = True  # trivial density: the zero functional
                    break
                expansions.append(cached)
        if dead or c.is_zero():
            continue
        _graded_expand(terms, expansions, parities, seed=c)
    return terms


def _scale_canonical(b: Expr) -> Tuple[Expr, Coefficient]:
    """Normalize a block's overall scale: divide by the leading coefficient
    when it is invertible, returning (representative, factored-out lead)."""
    lead = b.lead_coefficient()
    try:
        inv = lead.inverse()
    except ZeroDivisionError:
        return b, Coefficient.one()
    return b.scale(inv), lead
