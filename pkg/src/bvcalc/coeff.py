"""Exact scalar arithmetic: Laurent polynomials in hbar with Gaussian-rational
coefficients.

A Coefficient is a finite map {hbar-degree: (re, im)} with exact Fraction
entries.  Zero is the empty map, so equality and the zero test are structural.
Negative hbar degrees are allowed (hbar is invertible).
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class Coefficient:
    """Element of Q(i)[hbar, hbar^-1]."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        # terms: dict {degree: (Fraction re, Fraction im)} with zero entries dropped
        clean = {}
        if terms:
            for deg, (re, im) in terms.items():
                re = _as_fraction(re)
                im = _as_fraction(im)
                if re or im:
                    clean[int(deg)] = (re, im)
        self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------

    @staticmethod
    def of(value) -> "Coefficient":
        if isinstance(value, Coefficient):
            return value
        return Coefficient({0: (_as_fraction(value), Fraction(0))})

    @staticmethod
    def zero() -> "Coefficient":
        return Coefficient()

    @staticmethod
    def one() -> "Coefficient":
        return Coefficient.of(1)

    @staticmethod
    def imag_unit() -> "Coefficient":
        return Coefficient({0: (Fraction(0), Fraction(1))})

    @staticmethod
    def hbar(degree: int = 1) -> "Coefficient":
        return Coefficient({degree: (Fraction(1), Fraction(0))})

    # -- structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def key(self):
        return tuple(
            (d, re.numerator, re.denominator, im.numerator, im.denominator)
            for d, (re, im) in sorted(self.terms.items())
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Coefficient):
            try:
                other = Coefficient.of(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        other = Coefficient.of(other)
        out = dict(self.terms)
        for d, (re, im) in other.terms.items():
            r0, i0 = out.get(d, (Fraction(0), Fraction(0)))
            out[d] = (r0 + re, i0 + im)
        return Coefficient(out)

    __radd__ = __add__

    def __neg__(self):
        return Coefficient({d: (-re, -im) for d, (re, im) in self.terms.items()})

    def __sub__(self, other):
        return self + (-Coefficient.of(other))

    def __rsub__(self, other):
        return Coefficient.of(other) + (-self)

    def __mul__(self, other):
        other = Coefficient.of(other)
        out = {}
        for d1, (r1, i1) in self.terms.items():
            for d2, (r2, i2) in other.terms.items():
                d = d1 + d2
                re = r1 * r2 - i1 * i2
                im = r1 * i2 + i1 * r2
                r0, i0 = out.get(d, (Fraction(0), Fraction(0)))
                out[d] = (r0 + re, i0 + im)
        return Coefficient(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Coefficient.of(other)
        return self * other.inverse()

    def inverse(self) -> "Coefficient":
        """Inverse of a unit.  Units of the Laurent ring are the single-term
        coefficients c*hbar^k with c a nonzero Gaussian rational."""
        if len(self.terms) != 1:
            raise ZeroDivisionError(f"not invertible in Q(i)[hbar,hbar^-1]: {self!r}")
        (d, (re, im)), = self.terms.items()
        norm = re * re + im * im
        return Coefficient({-d: (re / norm, -im / norm)})

    # -- queries ------------------------------------------------------

    def hbar_degrees(self):
        return sorted(self.terms.keys())

    def is_rational(self) -> bool:
        return not self.terms or (
            set(self.terms) == {0} and self.terms[0][1] == 0
        )

    def as_complex(self) -> complex:
        """Numeric value; defined only for hbar-free coefficients."""
        if not self.terms:
            return 0j
        if set(self.terms) != {0}:
            raise ValueError(f"coefficient involves hbar: {self!r}")
        re, im = self.terms[0]
        return complex(re) + 1j * complex(im)

    def __repr__(self):
        return f"Coefficient({self.terms!r})"


ZERO = Coefficient.zero()
ONE = Coefficient.one()
I = Coefficient.imag_unit()
HBAR = Coefficient.hbar()
