"""Independent numeric cross-check: evaluate functionals at explicit sections.

Even field components are trigonometric polynomials on the periodic box
[0, 2pi)^n; odd components carry coefficients in a finite Grassmann algebra.
Jet variables are substituted by exact symbolic derivatives of the section,
monomials evaluated in Grassmann arithmetic, and the result integrated by the
trapezoidal rule, which is exact for trigonometric polynomials once the grid
resolves every frequency.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import Attach, BaseVar, Expr, JetVar, Trig
from .cohomology import Functional
from .jetcalc import BvModel, collapse, total_derivative_multi

MAX_GENERATORS = 8


class GrassmannNumber:
    """Element of the exterior algebra on up to 8 generators over floats.

    Coefficients are keyed by subsets of generators encoded as bitmasks."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[Dict[int, float]] = None):
        self.coeffs = {}
        if coeffs:
            for mask, val in coeffs.items():
                if mask >= (1 << MAX_GENERATORS):
                    raise ValueError(f"more than {MAX_GENERATORS} Grassmann generators")
                if val != 0.0:
                    self.coeffs[int(mask)] = float(val)

    @staticmethod
    def scalar(value: float) -> "GrassmannNumber":
        return GrassmannNumber({0: float(value)})

    @staticmethod
    def generator(k: int) -> "GrassmannNumber":
        if not 0 <= k < MAX_GENERATORS:
            raise ValueError(f"generator index {k} out of range")
        return GrassmannNumber({1 << k: 1.0})

    def __add__(self, other):
        other = _as_grassmann(other)
        out = dict(self.coeffs)
        for m, v in other.coeffs.items():
            out[m] = out.get(m, 0.0) + v
        return GrassmannNumber(out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannNumber({m: -v for m, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_grassmann(other))

    def __rsub__(self, other):
        return _as_grassmann(other) + (-self)

    def __mul__(self, other):
        other = _as_grassmann(other)
        out: Dict[int, float] = {}
        for m1, v1 in self.coeffs.items():
            for m2, v2 in other.coeffs.items():
                if m1 & m2:
                    continue
                sign = _merge_sign(m1, m2)
                m = m1 | m2
                out[m] = out.get(m, 0.0) + sign * v1 * v2
        return GrassmannNumber(out)

    __rmul__ = __mul__

    def scale(self, s: float) -> "GrassmannNumber":
        return GrassmannNumber({m: s * v for m, v in self.coeffs.items()})

    def body(self) -> float:
        return self.coeffs.get(0, 0.0)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def is_close_to(self, other, tol: float) -> bool:
        return (self - _as_grassmann(other)).max_abs() <= tol

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for m in sorted(self.coeffs):
            v = self.coeffs[m]
            gens = "*".join(f"g{k + 1}" for k in range(MAX_GENERATORS) if m >> k & 1)
            parts.append(f"{v:+.6g}" + (f"*{gens}" if gens else ""))
        return " ".join(parts)


def _as_grassmann(x) -> GrassmannNumber:
    if isinstance(x, GrassmannNumber):
        return x
    return GrassmannNumber.scalar(float(x))


def _merge_sign(m1: int, m2: int) -> int:
    """Koszul sign of merging two disjoint sorted generator sets."""
    sign = 1
    for k in range(MAX_GENERATORS):
        if m2 >> k & 1:
            higher = m1 >> (k + 1)
            if bin(higher).count("1") & 1:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# trig-polynomial sections

# one term: (coefficient, factors) with factors a tuple of per-coordinate
# (kind, frequency) where kind is 'sin' | 'cos' | 'one'
TrigTerm = Tuple[GrassmannNumber, Tuple[Tuple[str, int], ...]]


class SectionSpec:
    """Per-variable trigonometric sections on [0, 2pi)^n.

    components maps (field, dagger) to a list of TrigTerm; odd variables
    should carry Grassmann coefficients of odd grade.  Missing variables
    evaluate to zero."""

    def __init__(self, model: BvModel, components):
        self.model = model
        self.components: Dict[Tuple[str, bool], List[TrigTerm]] = {}
        for key, terms in components.items():
            norm = []
            for coeff, factors in terms:
                factors = tuple(factors)
                if len(factors) != model.base_dim:
                    raise ValueError(
                        f"section term for {key} has {len(factors)} coordinate "
                        f"factors, base dimension is {model.base_dim}"
                    )
                norm.append((_as_grassmann(coeff), factors))
            self.components[key] = norm

    def max_frequency(self) -> int:
        best = 0
        for terms in self.components.values():
            for _, factors in terms:
                for kind, freq in factors:
                    if kind != "one":
                        best = max(best, abs(freq))
        return best

    def derivative(self, key, index: Sequence[int]) -> List[TrigTerm]:
        terms = self.components.get(key, [])
        for i, k in enumerate(index):
            for _ in range(k):
                terms = [t for t in (_diff_term(term, i) for term in terms) if t]
        return terms

    def value(self, terms: List[TrigTerm], x: Sequence[float]) -> GrassmannNumber:
        out = GrassmannNumber()
        for coeff, factors in terms:
            val = 1.0
            for (kind, freq), xi in zip(factors, x):
                if kind == "sin":
                    val *= math.sin(freq * xi)
                elif kind == "cos":
                    val *= math.cos(freq * xi)
            if val != 0.0:
                out = out + coeff.scale(val)
        return out


def _diff_term(term: TrigTerm, i: int) -> Optional[TrigTerm]:
    coeff, factors = term
    kind, freq = factors[i]
    if kind == "one" or freq == 0:
        return None
    if kind == "sin":
        new = ("cos", freq)
        scale = float(freq)
    else:
        new = ("sin", freq)
        scale = -float(freq)
    out = list(factors)
    out[i] = new
    return (coeff.scale(scale), tuple(out))


def constant_section_term(model: BvModel, coeff) -> List[TrigTerm]:
    return [(_as_grassmann(coeff), (("one", 0),) * model.base_dim)]


# ---------------------------------------------------------------------------
# evaluation


class FrequencyError(ValueError):
    pass


def _density_degree(e: Expr) -> int:
    """Maximal number of jet-variable factors in a monomial (counting
    exponents); used for the frequency bound of the restriction."""
    best = 0
    for m in e.monomials():
        deg = 0
        for a, k in m.even:
            deg += k * _atom_degree(a)
        for a in m.odd:
            deg += _atom_degree(a)
        best = max(best, deg)
    return best


def _atom_degree(a) -> int:
    if isinstance(a, JetVar):
        return 1
    if isinstance(a, Trig):
        return 1
    if isinstance(a, BaseVar):
        raise FrequencyError(
            "densities with explicit base coordinates are outside the "
            "periodic oracle's class"
        )
    if isinstance(a, Attach):
        raise AssertionError("collapse before evaluation")
    raise TypeError(f"unknown atom {a!r}")


def _has_trig(e: Expr) -> bool:
    return any(isinstance(a, Trig) for a in e.atoms())


def evaluate_density(
    model: BvModel,
    density: Expr,
    section: SectionSpec,
    points: int,
    shift=None,
) -> GrassmannNumber:
    """Integral of a wrapper-free density over [0, 2pi)^n at the section.

    ``shift`` optionally perturbs one even field: a triple (field, eps,
    shift_density) replaces every jet of the field by its section value plus
    eps times the matching total derivative of the shift density restricted
    to the section."""
    n = model.base_dim
    maxdeg = _density_degree(density)
    bound = 2 * maxdeg * max(section.max_frequency(), 1)
    if points < max(bound, 2):
        raise FrequencyError(
            f"{points} quadrature points cannot resolve the restricted "
            f"density (needs at least {max(bound, 2)})"
        )
    if _has_trig(density):
        a = _quadrature(model, density, section, points, shift)
        b = _quadrature(model, density, section, 2 * points, shift)
        if (a - b).max_abs() > 1e-9 * (1.0 + a.max_abs()):
            raise FrequencyError(
                "quadrature not converged for transcendental density; "
                "increase the point count"
            )
        return b
    return _quadrature(model, density, section, points, shift)


def _quadrature(model, density, section, points, shift) -> GrassmannNumber:
    n = model.base_dim
    # precompute symbolic derivatives of section components per jet variable
    jets = {}
    for m in density.monomials():
        for a, _ in m.even:
            _collect_jets(a, jets)
        for a in m.odd:
            _collect_jets(a, jets)
    derived = {}
    for (field, dagger, index) in jets:
        derived[(field, dagger, index)] = section.derivative((field, dagger), index)
    shift_derived = {}
    if shift is not None:
        sfield, eps, sdens = shift
        for (field, dagger, index) in jets:
            if field == sfield and not dagger:
                shift_derived[(field, dagger, index)] = total_derivative_multi(
                    sdens, index
                )

    total = GrassmannNumber()
    grid = [2.0 * math.pi * k / points for k in range(points)]
    for point_index in range(points ** n):
        rem = point_index
        x = []
        for _ in range(n):
            x.append(grid[rem % points])
            rem //= points
        cache = {}
        base_cache = {}

        def base_jet_value(field, dagger, index):
            key = (field, dagger, index)
            if key not in base_cache:
                terms = derived.get(key)
                if terms is None:
                    terms = section.derivative((field, dagger), index)
                    derived[key] = terms
                base_cache[key] = section.value(terms, x)
            return base_cache[key]

        def jet_value(field, dagger, index):
            key = (field, dagger, index)
            if key not in cache:
                val = base_jet_value(field, dagger, index)
                if key in shift_derived:
                    _, eps, _ = shift
                    val = val + eps * _eval_plain(
                        model, shift_derived[key], base_jet_value, x
                    )
                cache[key] = val
            return cache[key]

        total = total + _eval_density_at(model, density, jet_value, x)
    vol = (2.0 * math.pi / points) ** n
    return total.scale(vol)


def _collect_jets(a, jets: dict):
    if isinstance(a, JetVar):
        jets[(a.field, a.dagger, a.index)] = True
    elif isinstance(a, Trig):
        u = a.arg
        jets[(u.field, u.dagger, u.index)] = True


def _eval_plain(model, density, jet_value, x) -> GrassmannNumber:
    return _eval_density_at(model, density, jet_value, x)


def _eval_density_at(model, density: Expr, jet_value, x) -> GrassmannNumber:
    out = GrassmannNumber()
    for m in density.monomials():
        c = m.coeff.as_complex()
        if c.imag != 0.0:
            raise ValueError("cannot numerically evaluate a complex density")
        val = GrassmannNumber.scalar(c.real)
        for a, k in m.factors():
            fa = _eval_atom(a, jet_value, x)
            for _ in range(k):
                val = val * fa
            if not val.coeffs:
                break
        out = out + val
    return out


def _eval_atom(a, jet_value, x) -> GrassmannNumber:
    if isinstance(a, JetVar):
        return jet_value(a.field, a.dagger, a.index)
    if isinstance(a, Trig):
        u = jet_value(a.arg.field, a.arg.dagger, a.arg.index)
        if any(m for m in u.coeffs if m):
            raise ValueError("transcendental function of a Grassmann-valued section")
        v = u.body()
        if a.tag == "sin":
            return GrassmannNumber.scalar(math.sin(v))
        if a.tag == "cos":
            return GrassmannNumber.scalar(math.cos(v))
        return GrassmannNumber.scalar(math.exp(v))
    if isinstance(a, BaseVar):
        raise FrequencyError("explicit base coordinates are outside the oracle class")
    raise TypeError(f"unknown atom {a!r}")


def evaluate(
    F: Functional,
    section: SectionSpec,
    points: int,
    shift=None,
) -> GrassmannNumber:
    """Value of a functional at a section: densities are collapsed, each
    integral block evaluated by quadrature, block products multiplied in
    Grassmann arithmetic, and terms summed with their exact coefficients."""
    model = F.model
    total = GrassmannNumber()
    for blocks, coeff in F.terms.items():
        c = coeff.as_complex()
        if c.imag != 0.0:
            raise ValueError("cannot numerically evaluate a complex coefficient")
        val = GrassmannNumber.scalar(c.real)
        for b in blocks:
            val = val * evaluate_density(model, collapse(b), section, points,
                                         shift=shift)
            if not val.coeffs:
                break
        total = total + val
    return total
