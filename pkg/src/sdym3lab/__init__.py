"""Symbolic-numeric laboratory for SDYM3 and its potential form PSDYM3."""

from .expr import (
    Characteristic,
    Coordinate,
    Expr,
    Scalar,
    atom_expr,
    canonicalize,
    commutator,
    constant,
    equal,
    identity,
    pretty,
    to_dsl,
    trace_is_zero,
    zero,
)
from .parser import ParseError, UnknownSymbolError, parse
from .calculus import (
    FrechetContext,
    MissingCharacteristicError,
    PSDYM3,
    SDYM3,
    covariant_y,
    covariant_z,
    equation_system,
    formal_z_integral,
    frechet,
    psdym3_equation,
    reduce_mod,
    sdym3_equation,
    substitute_bt,
    total_derivative,
)

__version__ = "0.1.0"
