"""Noncommutative symbolic core for matrix-valued jet-space expressions.

Expressions live in a canonical sum-of-monomials form.  A monomial is an
exact scalar coefficient (a rational complex number times a monomial in
the coordinate symbols y, z, yb and the spectral parameter lam)
multiplying an ordered, noncommutative product of factors.  A factor is
either a jet atom (dependent-variable head plus a derivative multi-index)
or a formal z-antiderivative wrapper created by the calculus layer.

Canonicalization expands all linear structure, cancels adjacent J*Jinv
and Jinv*J pairs, merges like monomials and sorts everything by a fixed
total order.  Structural equality of canonical forms is therefore a
sound equality test; it is incomplete when unresolved antiderivative
wrappers are present (two wrappers may denote the same function modulo a
z-independent term).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

__all__ = [
    "Coordinate",
    "Scalar",
    "JetAtom",
    "IntegralWrapper",
    "Monomial",
    "Expr",
    "Characteristic",
    "atom_expr",
    "constant",
    "identity",
    "zero",
    "scalar_expr",
    "coord_expr",
    "lam_expr",
    "commutator",
    "canonicalize",
    "equal",
    "trace_is_zero",
    "to_dsl",
    "pretty",
]


class Coordinate(enum.IntEnum):
    """The three independent variables, with the fixed order y < z < yb."""

    Y = 0
    Z = 1
    YBAR = 2

    @property
    def symbol(self) -> str:
        return ("y", "z", "yb")[int(self)]


_COORD_BY_SYMBOL = {"y": Coordinate.Y, "z": Coordinate.Z, "yb": Coordinate.YBAR}


def as_coordinate(dir: "Coordinate | str") -> Coordinate:
    if isinstance(dir, Coordinate):
        return dir
    try:
        return _COORD_BY_SYMBOL[dir]
    except KeyError:
        raise ValueError(f"unknown coordinate {dir!r}; expected y, z or yb") from None


# ---------------------------------------------------------------------------
# exact scalars
# ---------------------------------------------------------------------------

_FractionLike = Union[int, Fraction]


@dataclass(frozen=True)
class Scalar:
    """A rational complex number, kept exact so equality never rounds."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value: "Scalar | _FractionLike") -> "Scalar":
        if isinstance(value, Scalar):
            return value
        return Scalar(Fraction(value))

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Scalar":
        return Scalar(-self.re, -self.im)

    def __mul__(self, other: "Scalar | _FractionLike") -> "Scalar":
        o = Scalar.of(other)
        return Scalar(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: _FractionLike) -> "Scalar":
        q = Fraction(other)
        return Scalar(self.re / q, self.im / q)

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def _key(self) -> tuple:
        return (
            self.re.numerator,
            self.re.denominator,
            self.im.numerator,
            self.im.denominator,
        )


SCALAR_ZERO = Scalar()
SCALAR_ONE = Scalar(Fraction(1))

# powers of (y, z, yb, lam) carried in the coefficient
Powers = tuple[int, int, int, int]
NO_POWERS: Powers = (0, 0, 0, 0)
ZERO_MULTI = (0, 0, 0)

# heads whose atoms depend on the fields; anything else is a constant matrix
DEPENDENT_HEADS = frozenset({"X", "J", "Jinv"})
_HEAD_RANK = {"X": 0, "J": 1, "Jinv": 2}


# ---------------------------------------------------------------------------
# factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JetAtom:
    """A dependent-variable symbol with a total-derivative multi-index.

    Constant matrices and Jinv always carry the zero multi-index; the
    calculus layer rewrites derivatives of Jinv eagerly so they are never
    stored.
    """

    head: str
    multi: tuple[int, int, int] = ZERO_MULTI

    def __post_init__(self) -> None:
        if not self.head or not self.head[0].isalpha():
            raise ValueError(f"invalid atom head {self.head!r}")
        if any(n < 0 for n in self.multi):
            raise ValueError(f"negative derivative count in {self.multi}")
        if self.head == "Jinv" and self.multi != ZERO_MULTI:
            raise ValueError("Jinv never carries derivatives; rewrite them first")
        if self.is_constant and self.multi != ZERO_MULTI:
            raise ValueError(f"constant matrix {self.head} cannot carry derivatives")

    @property
    def is_constant(self) -> bool:
        return self.head not in DEPENDENT_HEADS

    def derived(self, dir: Coordinate) -> "JetAtom":
        m = list(self.multi)
        m[int(dir)] += 1
        return JetAtom(self.head, tuple(m))

    def _key(self) -> tuple:
        return (0, _HEAD_RANK.get(self.head, 3), self.head, self.multi)

    def __str__(self) -> str:
        a, b, c = self.multi
        if a == b == c == 0:
            return self.head
        return self.head + "_" + "y" * a + "z" * b + "yb" * c


@dataclass(frozen=True)
class IntegralWrapper:
    """One formal application of the z-antiderivative to a canonical Expr.

    The inner expression is never itself an exact z-derivative; the smart
    constructor in the calculus layer integrates those away first.
    """

    inner: "Expr"

    def _key(self) -> tuple:
        return (1, self.inner._key())

    def __str__(self) -> str:
        return f"Int_z({to_dsl(self.inner)})"


Factor = Union[JetAtom, IntegralWrapper]


# ---------------------------------------------------------------------------
# monomials and expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    coeff: Scalar
    powers: Powers = NO_POWERS
    factors: tuple[Factor, ...] = ()

    def key(self) -> tuple:
        return (self.powers, self.factors)

    def sort_key(self) -> tuple:
        return (self.powers, tuple(f._key() for f in self.factors))

    def full_key(self) -> tuple:
        return (self.powers, tuple(f._key() for f in self.factors), self.coeff._key())


def _cancel_inverse_pairs(factors: Iterable[Factor]) -> tuple[Factor, ...]:
    out: list[Factor] = []
    for f in factors:
        if out and isinstance(f, JetAtom) and isinstance(out[-1], JetAtom):
            prev = out[-1]
            if (
                prev.head == "J"
                and prev.multi == ZERO_MULTI
                and f.head == "Jinv"
            ) or (
                prev.head == "Jinv" and f.head == "J" and f.multi == ZERO_MULTI
            ):
                out.pop()
                continue
        out.append(f)
    return tuple(out)


@dataclass(frozen=True)
class Expr:
    """Canonical sum of monomials; the zero expression is the empty sum."""

    monomials: tuple[Monomial, ...] = ()

    @property
    def is_zero(self) -> bool:
        return not self.monomials

    def _key(self) -> tuple:
        return tuple(m.full_key() for m in self.monomials)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "Expr") -> "Expr":
        return build(list(self.monomials) + list(other.monomials))

    def __sub__(self, other: "Expr") -> "Expr":
        return self + (-other)

    def __neg__(self) -> "Expr":
        return Expr(tuple(Monomial(-m.coeff, m.powers, m.factors) for m in self.monomials))

    def __mul__(self, other: "Expr") -> "Expr":
        out = []
        for a in self.monomials:
            for b in other.monomials:
                powers = tuple(x + y for x, y in zip(a.powers, b.powers))
                out.append(Monomial(a.coeff * b.coeff, powers, a.factors + b.factors))
        return build(out)

    def scale(self, value: "Scalar | _FractionLike") -> "Expr":
        s = Scalar.of(value)
        if s.is_zero:
            return Expr()
        return Expr(tuple(Monomial(m.coeff * s, m.powers, m.factors) for m in self.monomials))

    def __rmul__(self, value: _FractionLike) -> "Expr":
        return self.scale(value)

    def __str__(self) -> str:
        return to_dsl(self)

    def __repr__(self) -> str:
        return f"Expr({to_dsl(self)!r})"


def build(monomials: Iterable[Monomial]) -> Expr:
    """Merge, cancel and sort raw monomials into canonical form."""
    merged: dict[tuple, tuple[Scalar, Powers, tuple[Factor, ...]]] = {}
    for m in monomials:
        if m.coeff.is_zero:
            continue
        factors = _cancel_inverse_pairs(m.factors)
        key = (m.powers, factors)
        if key in merged:
            c, p, f = merged[key]
            merged[key] = (c + m.coeff, p, f)
        else:
            merged[key] = (m.coeff, m.powers, factors)
    kept = [Monomial(c, p, f) for (c, p, f) in merged.values() if not c.is_zero]
    kept.sort(key=Monomial.sort_key)
    return Expr(tuple(kept))


def mono_expr(coeff: Scalar, powers: Powers, factors: tuple[Factor, ...]) -> Expr:
    return build([Monomial(coeff, powers, factors)])


# -- public constructors -----------------------------------------------------


def zero() -> Expr:
    return Expr()


def identity() -> Expr:
    return Expr((Monomial(SCALAR_ONE),))


def scalar_expr(value: "Scalar | _FractionLike") -> Expr:
    s = Scalar.of(value)
    if s.is_zero:
        return Expr()
    return Expr((Monomial(s),))


def coord_expr(dir: "Coordinate | str", power: int = 1) -> Expr:
    c = as_coordinate(dir)
    powers = [0, 0, 0, 0]
    powers[int(c)] = power
    return Expr((Monomial(SCALAR_ONE, tuple(powers)),))


def lam_expr(power: int = 1) -> Expr:
    return Expr((Monomial(SCALAR_ONE, (0, 0, 0, power)),))


def atom_expr(head: str, multi: tuple[int, int, int] = ZERO_MULTI) -> Expr:
    return Expr((Monomial(SCALAR_ONE, NO_POWERS, (JetAtom(head, multi),)),))


def constant(name: str) -> Expr:
    if name in DEPENDENT_HEADS:
        raise ValueError(f"{name} is a dependent variable, not a constant matrix")
    return atom_expr(name)


def commutator(a: Expr, b: Expr) -> Expr:
    return a * b - b * a


def canonicalize(e: Expr) -> Expr:
    """Rebuild the canonical form; idempotent on already-canonical input."""
    return build(e.monomials)


def equal(a: Expr, b: Expr) -> bool:
    return a == b or (a - b).is_zero


# ---------------------------------------------------------------------------
# trace decision procedure
# ---------------------------------------------------------------------------


def _monomial_traceless(m: Monomial, traceless: frozenset[str]) -> bool:
    """True when the trace of this single monomial provably vanishes."""
    if len(m.factors) != 1:
        return False
    f = m.factors[0]
    if isinstance(f, JetAtom):
        return f.head == "X" or f.head in traceless
    return trace_is_zero(f.inner, traceless) == "yes"


def _cyclic_class(m: Monomial) -> tuple:
    keys = tuple(f._key() for f in m.factors)
    n = len(keys)
    return (m.powers, min(keys[i:] + keys[:i] for i in range(n)))


def trace_is_zero(e: Expr, traceless_symbols: Iterable[str] = ()) -> str:
    """Decide tr(e) = 0 by linearity, cyclicity and tracelessness assumptions.

    X is always assumed traceless; constant matrices only when listed in
    ``traceless_symbols``.  Returns "yes", "no" or "unknown" and never a
    wrong "yes": commutator-structured sums cancel under the cyclic
    property of the trace, single traceless atoms vanish directly, and a
    bare identity term with nonzero coefficient is a provable "no".
    """
    traceless = frozenset(traceless_symbols)
    identity_terms = []
    residual = []
    for m in e.monomials:
        if not m.factors:
            identity_terms.append(m)
        elif not _monomial_traceless(m, traceless):
            residual.append(m)
    classes: dict[tuple, Scalar] = {}
    for m in residual:
        key = _cyclic_class(m)
        classes[key] = classes.get(key, SCALAR_ZERO) + m.coeff
    all_cancel = all(c.is_zero for c in classes.values())
    if all_cancel:
        return "no" if identity_terms else "yes"
    return "unknown"


# ---------------------------------------------------------------------------
# characteristics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Characteristic:
    """A symmetry characteristic: a perturbation of X (Phi) or of J (Q)."""

    target: str
    expr: Expr

    def __post_init__(self) -> None:
        if self.target not in ("X", "J"):
            raise ValueError(f"characteristic target must be X or J, got {self.target!r}")

    def trace_status(self, traceless_symbols: Iterable[str] = ()) -> str:
        """Trace check of Phi for X-targets and of Jinv*Q for J-targets."""
        if self.target == "X":
            return trace_is_zero(self.expr, traceless_symbols)
        return trace_is_zero(atom_expr("Jinv") * self.expr, traceless_symbols)

    def __str__(self) -> str:
        return f"{self.target}: {to_dsl(self.expr)}"


def phi_characteristic(e: Expr) -> Characteristic:
    return Characteristic("X", e)


def q_characteristic(e: Expr) -> Characteristic:
    return Characteristic("J", e)


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------


def _fraction_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _scalar_body(s: Scalar) -> str:
    """Render a scalar with nonnegative leading part; sign handled by caller."""
    if s.im == 0:
        return _fraction_str(s.re)
    if s.re == 0:
        if s.im == 1:
            return "i"
        return f"{_fraction_str(s.im)}*i"
    im = s.im
    op = "+" if im > 0 else "-"
    im_abs = abs(im)
    im_part = "i" if im_abs == 1 else f"{_fraction_str(im_abs)}*i"
    return f"({_fraction_str(s.re)}{op}{im_part})"


def _power_parts(powers: Powers) -> list[str]:
    names = ("y", "z", "yb", "lam")
    parts = []
    for name, p in zip(names, powers):
        if p == 1:
            parts.append(name)
        elif p > 1:
            parts.append(f"{name}^{p}")
    return parts


def _monomial_body(m: Monomial) -> tuple[bool, str]:
    """Return (negative, body-without-sign) for one monomial."""
    c = m.coeff
    negative = c.re < 0 or (c.re == 0 and c.im < 0)
    mag = -c if negative else c
    parts = _power_parts(m.powers) + [str(f) for f in m.factors]
    if mag != SCALAR_ONE or not parts:
        parts.insert(0, _scalar_body(mag))
    if not m.factors and not any(m.powers) and mag == SCALAR_ONE:
        return negative, "Id"
    return negative, "*".join(parts)


def to_dsl(e: Expr) -> str:
    """Canonical printer; parse(to_dsl(e)) reproduces e exactly."""
    if e.is_zero:
        return "0"
    pieces = []
    for i, m in enumerate(e.monomials):
        negative, body = _monomial_body(m)
        if i == 0:
            pieces.append(("-" if negative else "") + body)
        else:
            pieces.append(("- " if negative else "+ ") + body)
    return " ".join(pieces)


def _fold_commutators(e: Expr) -> list[tuple[bool, str]]:
    """Greedy [u,v] detection for display; returns signed rendered terms."""
    remaining = {i: m for i, m in enumerate(e.monomials)}
    rendered: list[tuple[bool, str]] = []
    for i in sorted(remaining):
        if i not in remaining:
            continue
        m = remaining[i]
        folded = False
        if len(m.factors) >= 2:
            for cut in range(1, len(m.factors)):
                u, v = m.factors[:cut], m.factors[cut:]
                partner_key = (m.powers, v + u)
                for j, other in list(remaining.items()):
                    if j == i:
                        continue
                    if other.key() == partner_key and (other.coeff + m.coeff).is_zero:
                        u_str = "*".join(str(f) for f in u)
                        v_str = "*".join(str(f) for f in v)
                        neg, prefix = _monomial_body(Monomial(m.coeff, m.powers, ()))
                        label = f"[{u_str}, {v_str}]"
                        body = label if prefix == "Id" else f"{prefix}*{label}"
                        rendered.append((neg, body))
                        del remaining[j]
                        del remaining[i]
                        folded = True
                        break
                if folded:
                    break
        if not folded and i in remaining:
            rendered.append(_monomial_body(m))
            del remaining[i]
    return rendered


def pretty(e: Expr) -> str:
    """Display form that folds A*B - B*A pairs back into commutators."""
    if e.is_zero:
        return "0"
    pieces = []
    for k, (negative, body) in enumerate(_fold_commutators(e)):
        if k == 0:
            pieces.append(("-" if negative else "") + body)
        else:
            pieces.append(("- " if negative else "+ ") + body)
    return " ".join(pieces)
