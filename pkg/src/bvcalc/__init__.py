"""bvcalc: symbolic variational calculus for the Batalin-Vilkovisky setup on
jet spaces: graded jet expressions, Euler operators, the variational Schouten
bracket and BV-Laplacian in geometric (frozen-channel) and naive modes, with
machine checks of their canonical interrelations."""

from .coeff import Coefficient
from .algebra import (
    Atom,
    Attach,
    BaseVar,
    Expr,
    GhostNumberError,
    JetVar,
    ParityError,
    Trig,
    make_attach,
    normalize,
)
from .jetcalc import (
    BvModel,
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
from .grammar import ParseError, format_expr, parse_expr, parse_model_file
from .cohomology import (
    Functional,
    densities_equivalent,
    functional_equal,
    is_trivial,
)
from .bv import (
    GEOMETRIC,
    NAIVE,
    check_coboundary_preservation,
    check_cocycle_preservation,
    check_gauge_closure,
    check_laplacian_power,
    check_master_equation,
    check_omega_squared,
    check_schouten_power,
    laplacian,
    omega,
    schouten,
)
from .models import (
    LieAlgebraData,
    build_scalar_example,
    build_yang_mills_bv,
    random_functional,
)
from .oracle import GrassmannNumber, SectionSpec, evaluate

__all__ = [
    "Atom", "Attach", "BaseVar", "BvModel", "Coefficient", "Expr",
    "Functional", "GEOMETRIC", "GhostNumberError", "GrassmannNumber",
    "JetVar", "LieAlgebraData", "NAIVE", "ParityError", "ParseError",
    "SectionSpec", "Trig",
    "build_scalar_example", "build_yang_mills_bv", "canonicalize_channels",
    "check_coboundary_preservation", "check_cocycle_preservation",
    "check_gauge_closure", "check_laplacian_power", "check_master_equation",
    "check_omega_squared", "check_schouten_power", "collapse",
    "densities_equivalent", "euler_channelled", "euler_left", "euler_right",
    "evaluate", "format_expr", "fresh_label", "functional_equal",
    "is_trivial", "iterated_variation_geometric", "iterated_variation_naive",
    "laplacian", "make_attach", "normalize", "omega", "parse_expr",
    "parse_model_file", "partial_left", "partial_right", "random_functional",
    "schouten", "total_derivative",
]

__version__ = "0.1.0"
