"""Canonical graded expressions in jet variables.

An Expr is a finite sum of monomials.  Each monomial is an exact coefficient
times a product of atoms:

  * JetVar    -- a jet coordinate q or its antifield dag(q), with a derivative
                 multi-index; parity is the ghost number mod 2,
  * BaseVar   -- a base coordinate x_i,
  * Trig      -- sin/cos/exp of a single parity-even jet variable,
  * Attach    -- a factor attached at its own copy of the base, carrying a
                 (possibly empty) set of pending total derivatives tagged by
                 channel labels.  Pending derivatives expand only at collapse.

Normal form: even atoms are a sorted multiset with integer exponents, odd
atoms a sorted sequence (each at most once, with the sorting sign absorbed
into the coefficient), sin(u)^2 is rewritten to 1 - cos(u)^2, monomials with
equal atom content are merged, and zero coefficients are dropped.  The zero
expression is the empty sum.  All operations return canonical expressions;
Expr values are immutable.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

from .coeff import Coefficient

# ---------------------------------------------------------------------------
# atoms


class Atom:
    __slots__ = ("key", "parity", "_hash")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (isinstance(other, Atom) and self.key == other.key)

    def __lt__(self, other):
        return self.key < other.key


class JetVar(Atom):
    __slots__ = ("field", "dagger", "index", "gh")

    def __init__(self, field: str, dagger: bool, index: Tuple[int, ...], gh: int):
        self.field = field
        self.dagger = bool(dagger)
        self.index = tuple(int(k) for k in index)
        self.gh = int(gh)
        self.parity = self.gh & 1
        self.key = (0, field, self.dagger, self.index)
        self._hash = hash(self.key)

    def __repr__(self):
        d = "dag " if self.dagger else ""
        return f"JetVar({d}{self.field}{list(self.index)})"


class BaseVar(Atom):
    __slots__ = ("coord",)

    def __init__(self, coord: int):
        self.coord = int(coord)
        self.parity = 0
        self.key = (1, self.coord)
        self._hash = hash(self.key)

    def __repr__(self):
        return f"BaseVar(x{self.coord + 1})"


TRIG_TAGS = ("sin", "cos", "exp")


class Trig(Atom):
    __slots__ = ("tag", "arg")

    def __init__(self, tag: str, arg: JetVar):
        if tag not in TRIG_TAGS:
            raise ValueError(f"unsupported function tag {tag!r}")
        if not isinstance(arg, JetVar) or arg.parity != 0:
            raise ValueError(
                f"{tag} argument must be a single parity-even jet variable, got {arg!r}"
            )
        self.tag = tag
        self.arg = arg
        self.parity = 0
        self.key = (2, tag, arg.key)
        self._hash = hash(self.key)

    def __repr__(self):
        return f"Trig({self.tag}, {self.arg!r})"


class Attach(Atom):
    """A factor living at its own attachment point on the base.

    ``pending`` is a tuple of (channel label, multi-index) pairs, each a total
    derivative waiting to be expanded at collapse; an empty tuple marks a bare
    attachment boundary.  ``inner`` is a canonical single-monomial expression
    with unit coefficient.
    """

    __slots__ = ("pending", "inner")

    def __init__(self, pending, inner: "Expr"):
        self.pending = tuple(sorted((tuple(idx), int(lab)) for lab, idx in pending))
        self.pending = tuple((lab, idx) for idx, lab in self.pending)
        self.inner = inner
        self.parity = inner.parity()
        self.key = (3, tuple((idx, lab) for lab, idx in self.pending), inner.key())
        self._hash = hash(self.key)

    def __repr__(self):
        return f"Attach({self.pending!r}, {self.inner!r})"


# ---------------------------------------------------------------------------
# monomials and expressions


class Monomial:
    __slots__ = ("coeff", "even", "odd")

    def __init__(self, coeff: Coefficient, even, odd):
        self.coeff = coeff
        self.even = even  # tuple of (Atom, exponent), sorted by atom key
        self.odd = odd    # tuple of Atom, sorted by key, pairwise distinct

    def atom_key(self):
        return (
            tuple((a.key, e) for a, e in self.even),
            tuple(a.key for a in self.odd),
        )

    def factors(self):
        """All factors in canonical order as (atom, exponent) pairs."""
        return tuple(self.even) + tuple((a, 1) for a in self.odd)

    def parity(self) -> int:
        return len(self.odd) & 1

    def __repr__(self):
        return f"Monomial({self.coeff!r}, {self.even!r}, {self.odd!r})"


class ParityError(ValueError):
    pass


class GhostNumberError(ValueError):
    pass


class Expr:
    __slots__ = ("terms", "_key", "_hash", "_parity", "_gh")

    def __init__(self, terms):
        # terms: dict atom_key -> Monomial; canonical by construction
        self.terms = terms
        self._key = None
        self._hash = None
        self._parity = -2
        self._gh = None

    # -- construction ---------------------------------------------------

    @staticmethod
    def zero() -> "Expr":
        return _EXPR_ZERO

    @staticmethod
    def scalar(value) -> "Expr":
        c = Coefficient.of(value)
        if c.is_zero():
            return _EXPR_ZERO
        return _from_raw([(c, ())])

    @staticmethod
    def from_atom(atom: Atom) -> "Expr":
        return _from_raw([(Coefficient.one(), ((atom, 1),))])

    # -- canonical key ----------------------------------------------------

    def key(self):
        if self._key is None:
            self._key = tuple(
                sorted((k, m.coeff.key()) for k, m in self.terms.items())
            )
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return self is other or self.key() == other.key()

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for k, m in other.terms.items():
            prev = out.get(k)
            if prev is None:
                out[k] = m
            else:
                c = prev.coeff + m.coeff
                if c.is_zero():
                    del out[k]
                else:
                    out[k] = Monomial(c, prev.even, prev.odd)
        return Expr(out)

    __radd__ = __add__

    def __neg__(self):
        return Expr({
            k: Monomial(-m.coeff, m.even, m.odd) for k, m in self.terms.items()
        })

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if not self.terms or not other.terms:
            return _EXPR_ZERO
        raw = []
        for m1 in self.terms.values():
            f1 = m1.factors()
            for m2 in other.terms.values():
                raw.append((m1.coeff * m2.coeff, f1 + m2.factors()))
        return _from_raw(raw)

    def __rmul__(self, other):
        return _coerce(other) * self

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers of expressions are not defined")
        out = Expr.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, value) -> "Expr":
        c = Coefficient.of(value)
        if c.is_zero():
            return _EXPR_ZERO
        return Expr({
            k: Monomial(c * m.coeff, m.even, m.odd)
            for k, m in self.terms.items()
        })

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self):
        return self.terms.values()

    def parity(self) -> int:
        """Ghost parity; raises ParityError on a heterogeneous expression."""
        if self._parity == -2:
            p = None
            witness = None
            for m in self.terms.values():
                mp = m.parity()
                if p is None:
                    p, witness = mp, m
                elif mp != p:
                    self._parity = -1
                    raise ParityError(
                        f"parity-heterogeneous expression: {witness!r} vs {m!r}"
                    )
            self._parity = 0 if p is None else p
        if self._parity == -1:
            mons = list(self.terms.values())
            raise ParityError(
                f"parity-heterogeneous expression: {mons[0]!r} vs ..."
            )
        return self._parity

    def is_homogeneous(self) -> bool:
        try:
            self.parity()
            return True
        except ParityError:
            return False

    def ghost_number(self) -> int:
        """Ghost number; raises GhostNumberError when not homogeneous."""
        if self._gh is None:
            gh = None
            witness = None
            for m in self.terms.values():
                g = _monomial_gh(m)
                if gh is None:
                    gh, witness = g, m
                elif g != gh:
                    raise GhostNumberError(
                        f"ghost-number-heterogeneous expression: {witness!r} "
                        f"(gh {gh}) vs {m!r} (gh {g})"
                    )
            self._gh = 0 if gh is None else gh
        return self._gh

    def atoms(self):
        for m in self.terms.values():
            for a, _ in m.even:
                yield a
            for a in m.odd:
                yield a

    def has_attach(self) -> bool:
        return any(isinstance(a, Attach) for a in self.atoms())

    def lead_coefficient(self) -> Coefficient:
        """Coefficient of the canonically least monomial (zero for 0)."""
        if not self.terms:
            return Coefficient.zero()
        k = min(self.terms)
        return self.terms[k].coeff

    def __repr__(self):
        from .grammar import format_expr
        return format_expr(self)


_EXPR_ZERO = Expr({})


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Expr.scalar(x)


def _monomial_gh(m: Monomial) -> int:
    g = 0
    for a, e in m.even:
        g += _atom_gh(a) * e
    for a in m.odd:
        g += _atom_gh(a)
    return g


def _atom_gh(a: Atom) -> int:
    if isinstance(a, JetVar):
        return a.gh
    if isinstance(a, BaseVar):
        return 0
    if isinstance(a, Trig):
        if a.arg.gh != 0:
            raise GhostNumberError(
                f"{a.tag}({a.arg!r}) mixes ghost numbers; argument must have gh 0"
            )
        return 0
    if isinstance(a, Attach):
        return a.inner.ghost_number()
    raise TypeError(f"unknown atom {a!r}")


# ---------------------------------------------------------------------------
# the normalizer


def _from_raw(raw: Iterable[Tuple[Coefficient, Sequence[Tuple[Atom, int]]]]) -> Expr:
    """Build a canonical Expr from (coefficient, ordered factor list) pairs.

    Factor lists may repeat atoms and carry them in any order; the Koszul sign
    of sorting the odd factors is absorbed into the coefficient, odd squares
    vanish, and sin(u)^2 is rewritten to 1 - cos(u)^2.
    """
    acc = {}
    stack = list(raw)
    while stack:
        coeff, factors = stack.pop()
        if coeff.is_zero():
            continue
        evens = {}
        odds = []
        dead = False
        for atom, exp in factors:
            if exp == 0:
                continue
            if exp < 0:
                raise ValueError("negative atom exponent")
            if atom.parity == 0:
                prev = evens.get(atom.key)
                if prev is None:
                    evens[atom.key] = (atom, exp)
                else:
                    evens[atom.key] = (atom, prev[1] + exp)
            else:
                if exp > 1:
                    dead = True
                    break
                odds.append(atom)
        if dead:
            continue

        # sin^2 -> 1 - cos^2 (restores canonical sin-degree <= 1)
        sin_key = None
        for k, (a, e) in evens.items():
            if e >= 2 and isinstance(a, Trig) and a.tag == "sin":
                sin_key = k
                break
        if sin_key is not None:
            a, e = evens[sin_key]
            rest = [(atom, exp) for k2, (atom, exp) in evens.items() if k2 != sin_key]
            if e > 2:
                rest.append((a, e - 2))
            rest_odd = [(o, 1) for o in odds]
            cos_atom = Trig("cos", a.arg)
            stack.append((coeff, tuple(rest) + tuple(rest_odd)))
            stack.append((-coeff, tuple(rest) + ((cos_atom, 2),) + tuple(rest_odd)))
            continue

        sign, odd_sorted = _sort_odd(odds)
        if sign == 0:
            continue
        if sign < 0:
            coeff = -coeff
        even_sorted = tuple(sorted(evens.values(), key=lambda t: t[0].key))
        mono = Monomial(coeff, even_sorted, tuple(odd_sorted))
        k = mono.atom_key()
        prev = acc.get(k)
        if prev is None:
            acc[k] = mono
        else:
            c = prev.coeff + coeff
            if c.is_zero():
                del acc[k]
            else:
                acc[k] = Monomial(c, prev.even, prev.odd)
    return Expr(acc) if acc else _EXPR_ZERO


def _sort_odd(odds):
    """Sort odd atoms by key; return (sign, sorted) with sign 0 on a repeat."""
    arr = list(odds)
    n = len(arr)
    if n <= 1:
        return 1, arr
    sign = 1
    # insertion sort counting transpositions; fine at these sizes
    for i in range(1, n):
        a = arr[i]
        j = i - 1
        while j >= 0 and arr[j].key > a.key:
            arr[j + 1] = arr[j]
            sign = -sign
            j -= 1
        arr[j + 1] = a
    for i in range(n - 1):
        if arr[i].key == arr[i + 1].key:
            return 0, arr
    return sign, arr


def expr_from_terms(terms) -> Expr:
    """Public raw constructor: terms are (coefficient-like, factor list)."""
    return _from_raw([(Coefficient.of(c), tuple(f)) for c, f in terms])


def normalize(e: Expr) -> Expr:
    """Re-normalize an expression (idempotent on canonical input)."""
    return _from_raw([(m.coeff, m.factors()) for m in e.monomials()])


# ---------------------------------------------------------------------------
# attachment blocks


def make_attach(pending, inner: Expr) -> Expr:
    """Attach ``inner`` at its own base point with the given pending total
    derivatives.  Linear in ``inner``; a pending derivative of a block with no
    atoms is zero, a bare attachment of a constant is that constant, and a
    bare attachment of a lone Attach atom is the atom itself."""
    pending = tuple(pending)
    labels = [lab for lab, _ in pending]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate channel labels in pending spec {pending!r}")
    out = _EXPR_ZERO
    for m in inner.monomials():
        content = m.factors()
        if not content:
            if pending:
                continue  # total derivative of a constant block
            out = out + Expr.scalar(m.coeff)
            continue
        if len(content) == 1 and isinstance(content[0][0], Attach) and content[0][1] == 1:
            a = content[0][0]
            merged = a.pending + pending
            if not pending:
                out = out + Expr.from_atom(a).scale(m.coeff)
                continue
            labs = [lab for lab, _ in merged]
            if len(set(labs)) != len(labs):
                raise ValueError("channel label reused across nested wrappers")
            atom = Attach(merged, a.inner)
            out = out + Expr.from_atom(atom).scale(m.coeff)
            continue
        unit = _from_raw([(Coefficient.one(), content)])
        atom = Attach(pending, unit)
        out = out + Expr.from_atom(atom).scale(m.coeff)
    return out


def split_monomial(m: Monomial, keep_out) -> Tuple[int, list, list]:
    """Split a monomial's factors into (kept, wrapped) parts.

    ``keep_out(atom)`` selects the factors that stay outside a new attachment
    (existing Attach blocks, externally-owned fields).  Returns the Koszul
    sign of reordering the odd sequence to kept-then-wrapped, together with
    the two factor lists in their original relative order.
    """
    kept = []
    wrapped = []
    for a, e in m.even:
        (kept if keep_out(a) else wrapped).append((a, e))
    sign = 1
    wrapped_odd_seen = 0
    for a in m.odd:
        if keep_out(a):
            if wrapped_odd_seen & 1:
                sign = -sign
            kept.append((a, 1))
        else:
            wrapped.append((a, 1))
            wrapped_odd_seen += 1
    return sign, kept, wrapped


def collect_channel_labels(e: Expr) -> set:
    labels = set()
    for a in e.atoms():
        if isinstance(a, Attach):
            labels.update(lab for lab, _ in a.pending)
            labels.update(collect_channel_labels(a.inner))
    return labels
