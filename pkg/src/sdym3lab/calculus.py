"""Jet-space calculus on canonical expressions.

Implements the derivative operators the whole laboratory rests on:

* total derivatives D_y, D_z, D_yb, acting as derivations that increment
  jet multi-indices, differentiate coordinate-polynomial coefficients and
  rewrite derivatives of Jinv via (A^-1)_x = -A^-1 A_x A^-1;
* the formal z-antiderivative Int_z, normalized to discard integration
  constants, which integrates recognizable exact z-derivatives (including
  coefficients polynomial in z, by parts) and wraps everything else;
* the Frechet derivative along symmetry characteristics;
* the covariant derivatives A_y = D_y + [X_z, .] and A_z = D_z - [X_yb, .]
  in either the X or the J connection regime;
* reduction modulo the equation ideal of SDYM3 or PSDYM3 (solved-form
  rewriting of leading jets plus all prolongations);
* the Backlund substitutions between X-jets and J-jets.

All functions are pure and return canonical expressions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .expr import (
    Coordinate,
    Characteristic,
    Expr,
    IntegralWrapper,
    JetAtom,
    Monomial,
    NO_POWERS,
    SCALAR_ONE,
    Scalar,
    as_coordinate,
    atom_expr,
    build,
    commutator,
    mono_expr,
    zero,
)

__all__ = [
    "total_derivative",
    "formal_z_integral",
    "FrechetContext",
    "MissingCharacteristicError",
    "frechet",
    "covariant_y",
    "covariant_z",
    "EquationSystem",
    "PSDYM3",
    "SDYM3",
    "equation_system",
    "reduce_mod",
    "substitute_bt",
    "psdym3_equation",
    "sdym3_equation",
]


class MissingCharacteristicError(ValueError):
    """An expression mentions a field whose characteristic was not supplied."""


def _splice(m: Monomial, index: int, replacement: Expr) -> Expr:
    """Replace factor ``index`` of a monomial by an arbitrary expression."""
    left = mono_expr(m.coeff, m.powers, m.factors[:index])
    right = mono_expr(SCALAR_ONE, NO_POWERS, m.factors[index + 1 :])
    return left * replacement * right


# ---------------------------------------------------------------------------
# total derivatives
# ---------------------------------------------------------------------------


def total_derivative(e: Expr, dir: "Coordinate | str") -> Expr:
    """Total derivative of a jet-space expression along one coordinate.

    Acts as a derivation: differentiates the coordinate-polynomial part of
    each coefficient, applies the Leibniz rule across the factor list,
    increments jet multi-indices, rewrites D(Jinv) as -Jinv*J_dir*Jinv and
    collapses D_z through an antiderivative wrapper.
    """
    c = as_coordinate(dir)
    idx = int(c)
    result = zero()
    for m in e.monomials:
        if m.powers[idx] > 0:
            p = list(m.powers)
            exponent = p[idx]
            p[idx] -= 1
            result = result + mono_expr(m.coeff * exponent, tuple(p), m.factors)
        for i, f in enumerate(m.factors):
            if isinstance(f, JetAtom):
                if f.is_constant:
                    continue
                if f.head == "Jinv":
                    repl = -(atom_expr("Jinv") * _j_deriv(c) * atom_expr("Jinv"))
                else:
                    repl = Expr((Monomial(SCALAR_ONE, NO_POWERS, (f.derived(c),)),))
                result = result + _splice(m, i, repl)
            else:
                if c is Coordinate.Z:
                    result = result + _splice(m, i, f.inner)
                else:
                    result = result + _splice(
                        m, i, formal_z_integral(total_derivative(f.inner, c))
                    )
    return result


def _j_deriv(c: Coordinate) -> Expr:
    m = [0, 0, 0]
    m[int(c)] = 1
    return atom_expr("J", tuple(m))


def derive_chain(e: Expr, multi: tuple[int, int, int]) -> Expr:
    """Apply D_y^a D_z^b D_yb^c for a derivative multi-index (a, b, c)."""
    out = e
    for coord, count in zip((Coordinate.Y, Coordinate.Z, Coordinate.YBAR), multi):
        for _ in range(count):
            out = total_derivative(out, coord)
    return out


# ---------------------------------------------------------------------------
# formal z-antiderivative
# ---------------------------------------------------------------------------


def _integrate_monomial(m: Monomial) -> Expr:
    k = m.powers[1]
    nonconstant = [
        (i, f)
        for i, f in enumerate(m.factors)
        if not (isinstance(f, JetAtom) and f.is_constant)
    ]

    if not nonconstant:
        # purely z-independent matrix part: integrate the coefficient
        p = list(m.powers)
        p[1] = k + 1
        return mono_expr(m.coeff / (k + 1), tuple(p), m.factors)

    if len(nonconstant) == 1:
        i, f = nonconstant[0]
        if isinstance(f, JetAtom) and f.multi[1] >= 1:
            lowered = JetAtom(f.head, (f.multi[0], f.multi[1] - 1, f.multi[2]))
            factors = m.factors[:i] + (lowered,) + m.factors[i + 1 :]
            if k == 0:
                return mono_expr(m.coeff, m.powers, factors)
            # integration by parts on z^k * D_z(G)
            p_same = list(m.powers)
            boundary = mono_expr(m.coeff, tuple(p_same), factors)
            p_down = list(m.powers)
            p_down[1] = k - 1
            tail = formal_z_integral(
                mono_expr(m.coeff * k, tuple(p_down), factors)
            )
            return boundary - tail

    # not a recognizable exact z-derivative: wrap, keeping only the z-power
    # of the coefficient inside (everything else commutes out of Int_z)
    inner = Expr((Monomial(SCALAR_ONE, (0, k, 0, 0), m.factors),))
    outer_powers = (m.powers[0], 0, m.powers[2], m.powers[3])
    return mono_expr(m.coeff, outer_powers, (IntegralWrapper(inner),))


def formal_z_integral(e: Expr) -> Expr:
    """Formal inverse of D_z with integration constants discarded.

    Linear over monomials.  A monomial integrates in closed form when its
    matrix part is z-independent (coefficient rule), or when exactly one
    factor carries a z-derivative and every other factor is a constant
    matrix; a z-polynomial coefficient is handled by parts.  Anything else
    is wrapped as a first-class antiderivative.
    """
    out = zero()
    for m in e.monomials:
        out = out + _integrate_monomial(m)
    return out


# ---------------------------------------------------------------------------
# Frechet derivative
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrechetContext:
    """Characteristics to differentiate along: Phi perturbs X, Q perturbs J.

    At least one must be present.  Mixed X/J expressions need both; the
    library never infers one from the other (that relation is the
    nontrivial isomorphism map, not an algebraic identity).
    """

    phi: Expr | None = None
    q: Expr | None = None

    def __post_init__(self) -> None:
        if self.phi is None and self.q is None:
            raise ValueError("a Frechet context needs at least one characteristic")

    @staticmethod
    def for_characteristic(char: Characteristic) -> "FrechetContext":
        if char.target == "X":
            return FrechetContext(phi=char.expr)
        return FrechetContext(q=char.expr)


def frechet(e: Expr, ctx: FrechetContext) -> Expr:
    """Linearization of ``e`` along the characteristics in ``ctx``.

    Kills coordinate polynomials, sends each X-jet to the matching total
    derivative of Phi (and J-jets to derivatives of Q), maps Jinv to
    -Jinv*Q*Jinv, satisfies the Leibniz rule over products and commutes
    through antiderivative wrappers.
    """
    cache: dict[tuple[str, tuple[int, int, int]], Expr] = {}

    def jet_variation(f: JetAtom) -> Expr:
        key = (f.head, f.multi)
        if key not in cache:
            if f.head == "X":
                if ctx.phi is None:
                    raise MissingCharacteristicError(
                        "expression contains X but no Phi characteristic was given"
                    )
                cache[key] = derive_chain(ctx.phi, f.multi)
            else:
                if ctx.q is None:
                    raise MissingCharacteristicError(
                        "expression contains J but no Q characteristic was given"
                    )
                if f.head == "Jinv":
                    jinv = atom_expr("Jinv")
                    cache[key] = -(jinv * ctx.q * jinv)
                else:
                    cache[key] = derive_chain(ctx.q, f.multi)
        return cache[key]

    result = zero()
    for m in e.monomials:
        for i, f in enumerate(m.factors):
            if isinstance(f, JetAtom):
                if f.is_constant:
                    continue
                result = result + _splice(m, i, jet_variation(f))
            else:
                result = result + _splice(m, i, formal_z_integral(frechet(f.inner, ctx)))
    return result


# ---------------------------------------------------------------------------
# covariant derivatives
# ---------------------------------------------------------------------------


def _connection_y(regime: str) -> Expr:
    if regime == "X":
        return atom_expr("X", (0, 1, 0))
    return atom_expr("Jinv") * atom_expr("J", (1, 0, 0))


def _connection_z(regime: str) -> Expr:
    if regime == "X":
        return -atom_expr("X", (0, 0, 1))
    return atom_expr("Jinv") * atom_expr("J", (0, 1, 0))


def covariant_y(e: Expr, regime: str = "X") -> Expr:
    """A_y e = D_y e + [connection, e]; the connection is X_z, or Jinv*J_y
    when the caller works in the J variable regime."""
    if regime not in ("X", "J"):
        raise ValueError(f"regime must be X or J, got {regime!r}")
    return total_derivative(e, Coordinate.Y) + commutator(_connection_y(regime), e)


def covariant_z(e: Expr, regime: str = "X") -> Expr:
    """A_z e = D_z e - [X_yb, e], equivalently D_z e + [Jinv*J_z, e]."""
    if regime not in ("X", "J"):
        raise ValueError(f"regime must be X or J, got {regime!r}")
    return total_derivative(e, Coordinate.Z) + commutator(_connection_z(regime), e)


# ---------------------------------------------------------------------------
# field equations and reduction mod the equation ideal
# ---------------------------------------------------------------------------


def psdym3_equation() -> Expr:
    """G[X] = X_yyb + X_zz + [X_z, X_yb]."""
    return (
        atom_expr("X", (1, 0, 1))
        + atom_expr("X", (0, 2, 0))
        + commutator(atom_expr("X", (0, 1, 0)), atom_expr("X", (0, 0, 1)))
    )


def sdym3_equation() -> Expr:
    """F[J] = D_yb(Jinv*J_y) + D_z(Jinv*J_z), fully expanded."""
    jinv = atom_expr("Jinv")
    return total_derivative(jinv * atom_expr("J", (1, 0, 0)), Coordinate.YBAR) + (
        total_derivative(jinv * atom_expr("J", (0, 1, 0)), Coordinate.Z)
    )


@dataclass
class EquationSystem:
    """Solved-form rewrite rules for one field equation and its prolongations.

    The leading jets are those with at least one y- and one yb-derivative;
    the base rule eliminates the (1,0,1) jet and prolongations are obtained
    by differentiating the solved form.  Repeated application terminates:
    every replacement strictly lowers the multiset of n_y*n_yb weights.
    """

    name: str
    head: str
    base_rhs: Expr
    _cache: dict[tuple[int, int, int], Expr] = field(default_factory=dict, repr=False)

    def is_leading(self, f: JetAtom) -> bool:
        return f.head == self.head and f.multi[0] >= 1 and f.multi[2] >= 1

    def solved_rhs(self, multi: tuple[int, int, int]) -> Expr:
        a, b, c = multi
        if (a, b, c) == (1, 0, 1):
            return self.base_rhs
        if multi not in self._cache:
            if a > 1:
                prev = self.solved_rhs((a - 1, b, c))
                self._cache[multi] = total_derivative(prev, Coordinate.Y)
            elif b > 0:
                prev = self.solved_rhs((a, b - 1, c))
                self._cache[multi] = total_derivative(prev, Coordinate.Z)
            else:
                prev = self.solved_rhs((a, b, c - 1))
                self._cache[multi] = total_derivative(prev, Coordinate.YBAR)
        return self._cache[multi]


PSDYM3 = EquationSystem(
    "PSDYM3",
    "X",
    -atom_expr("X", (0, 2, 0))
    - commutator(atom_expr("X", (0, 1, 0)), atom_expr("X", (0, 0, 1))),
)

SDYM3 = EquationSystem(
    "SDYM3",
    "J",
    atom_expr("J", (0, 0, 1)) * atom_expr("Jinv") * atom_expr("J", (1, 0, 0))
    + atom_expr("J", (0, 1, 0)) * atom_expr("Jinv") * atom_expr("J", (0, 1, 0))
    - atom_expr("J", (0, 2, 0)),
)


def equation_system(name: str) -> EquationSystem:
    systems = {"PSDYM3": PSDYM3, "SDYM3": SDYM3}
    try:
        return systems[name]
    except KeyError:
        raise ValueError(f"unknown equation system {name!r}") from None


def _reduce_wrappers(e: Expr, sys: EquationSystem, rng: random.Random | None) -> Expr:
    changed = False
    result = zero()
    for m in e.monomials:
        term = None
        for i, f in enumerate(m.factors):
            if isinstance(f, IntegralWrapper):
                reduced = reduce_mod(f.inner, sys, rng)
                if reduced != f.inner:
                    term = _splice(m, i, formal_z_integral(reduced))
                    changed = True
                    break
        result = result + (term if term is not None else Expr((m,)))
    return result if changed else e


def reduce_mod(
    e: Expr, sys: EquationSystem, rng: random.Random | None = None, max_steps: int = 100000
) -> Expr:
    """Rewrite leading jets by the solved form until none remain.

    Sound for ideal membership: a zero result means the expression lies in
    the equation ideal as far as solved-form rewriting can see.  ``rng``
    randomizes which candidate jet is rewritten first; the result is
    independent of that order (checked by the property suite).
    """
    current = e
    # antiderivative wrappers may hide leading jets; reduce them first
    while True:
        reduced = _reduce_wrappers(current, sys, rng)
        if reduced == current:
            break
        current = reduced

    for _ in range(max_steps):
        candidates = []
        for mi, m in enumerate(current.monomials):
            for fi, f in enumerate(m.factors):
                if isinstance(f, JetAtom) and sys.is_leading(f):
                    candidates.append((mi, fi, f))
        if not candidates:
            return current
        mi, fi, f = rng.choice(candidates) if rng is not None else candidates[0]
        m = current.monomials[mi]
        rest = build(
            [mm for k, mm in enumerate(current.monomials) if k != mi]
        )
        current = rest + _splice(m, fi, sys.solved_rhs(f.multi))
    raise RuntimeError(f"reduction did not terminate within {max_steps} steps")


# ---------------------------------------------------------------------------
# Backlund substitution
# ---------------------------------------------------------------------------

_BT_CHAIN_CACHE: dict[tuple[str, tuple[int, int, int]], Expr] = {}


def _bt_replacement(f: JetAtom) -> Expr | None:
    """J-form of a single X-jet, obtained by peeling one z or yb derivative.

    X_z = Jinv*J_y and X_yb = -Jinv*J_z; jets with only y-derivatives are
    nonlocal in J and stay untouched.
    """
    a, b, c = f.multi
    if b >= 1:
        key = ("z", (a, b - 1, c))
        if key not in _BT_CHAIN_CACHE:
            base = atom_expr("Jinv") * atom_expr("J", (1, 0, 0))
            _BT_CHAIN_CACHE[key] = derive_chain(base, (a, b - 1, c))
        return _BT_CHAIN_CACHE[key]
    if c >= 1:
        key = ("yb", (a, b, c - 1))
        if key not in _BT_CHAIN_CACHE:
            base = -(atom_expr("Jinv") * atom_expr("J", (0, 1, 0)))
            _BT_CHAIN_CACHE[key] = derive_chain(base, (a, b, c - 1))
        return _BT_CHAIN_CACHE[key]
    return None


def _substitute_to_j(e: Expr) -> Expr:
    result = zero()
    for m in e.monomials:
        term = None
        for i, f in enumerate(m.factors):
            if isinstance(f, JetAtom) and f.head == "X":
                repl = _bt_replacement(f)
                if repl is not None:
                    term = _substitute_to_j(_splice(m, i, repl))
                    break
            elif isinstance(f, IntegralWrapper):
                inner = _substitute_to_j(f.inner)
                if inner != f.inner:
                    term = _substitute_to_j(_splice(m, i, formal_z_integral(inner)))
                    break
        result = result + (term if term is not None else Expr((m,)))
    return result


def _substitute_to_x(e: Expr) -> Expr:
    result = zero()
    for m in e.monomials:
        coeff = m.coeff
        factors = list(m.factors)
        changed = True
        while changed:
            changed = False
            for i in range(len(factors) - 1):
                a, b = factors[i], factors[i + 1]
                if (
                    isinstance(a, JetAtom)
                    and a.head == "Jinv"
                    and isinstance(b, JetAtom)
                    and b.head == "J"
                ):
                    if b.multi == (1, 0, 0):
                        factors[i : i + 2] = [JetAtom("X", (0, 1, 0))]
                        changed = True
                        break
                    if b.multi == (0, 1, 0):
                        factors[i : i + 2] = [JetAtom("X", (0, 0, 1))]
                        coeff = -coeff
                        changed = True
                        break
        term = mono_expr(coeff, m.powers, tuple(factors))
        # recurse into wrappers, re-integrating since the swap may resolve them
        rebuilt = zero()
        for mm in term.monomials:
            inner_done = None
            for i, f in enumerate(mm.factors):
                if isinstance(f, IntegralWrapper):
                    inner = _substitute_to_x(f.inner)
                    if inner != f.inner:
                        inner_done = _splice(mm, i, formal_z_integral(inner))
                        break
            rebuilt = rebuilt + (inner_done if inner_done is not None else Expr((mm,)))
        result = result + rebuilt
    return result


def substitute_bt(e: Expr, direction: str) -> Expr:
    """Move an expression across the Backlund transformation.

    ``to_J`` rewrites every X-jet carrying a z- or yb-derivative through
    X_z = Jinv*J_y and X_yb = -Jinv*J_z (pure y-jets of X stay, being
    nonlocal in J).  ``to_X`` replaces the exact adjacent factor pairs
    Jinv*J_y -> X_z and Jinv*J_z -> -X_yb wherever they occur.
    """
    if direction == "to_J":
        return _substitute_to_j(e)
    if direction == "to_X":
        return _substitute_to_x(e)
    raise ValueError(f"direction must be 'to_J' or 'to_X', got {direction!r}")
