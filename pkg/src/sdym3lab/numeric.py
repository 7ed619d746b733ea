"""Grid-based evaluation backend.

Realizes the complex coordinates on real slices: every formula in play is
polynomial or analytic in the coordinates, so vanishing of a residual on
a real box is the desk-scale check.  Fields are complex N x N matrices
sampled on a uniform tensor grid in (y, z, yb).

Jets are evaluated analytically for the built-in solution families and by
second-order central finite differences otherwise; the formal
z-antiderivative becomes cumulative trapezoidal integration from the
first z-plane, with that plane set to zero (the numeric counterpart of
the symbolic kernel normalization, so comparisons against symbolic closed
forms quotient out z-independent offsets).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import expm

from .expr import Expr, IntegralWrapper, JetAtom
from . import calculus
from .calculus import covariant_y, covariant_z, total_derivative

__all__ = [
    "Grid",
    "NumericField",
    "NumericSolution",
    "make_abelian_solution",
    "make_manufactured_solution",
    "eval_expr",
    "UnboundConstantError",
    "GridMarginError",
    "residual_F",
    "residual_G",
    "bt_residual",
    "det_deviation",
    "trace_deviation",
    "lax_residual",
    "conservation_residual",
    "convergence_order",
    "ConvergenceReport",
    "CONVERGENCE_CHECKS",
    "max_norm_mod_z_offset",
    "save_solution",
    "load_solution",
]


class UnboundConstantError(KeyError):
    pass


class GridMarginError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform sample arrays for the three coordinates."""

    y: np.ndarray
    z: np.ndarray
    yb: np.ndarray

    def __post_init__(self) -> None:
        for name, axis in (("y", self.y), ("z", self.z), ("yb", self.yb)):
            if axis.ndim != 1 or len(axis) < 8:
                raise ValueError(f"axis {name} needs at least 8 samples")
            steps = np.diff(axis)
            if not np.all(steps > 0) or not np.allclose(steps, steps[0]):
                raise ValueError(f"axis {name} must be uniform and increasing")

    @classmethod
    def cube(cls, n: int = 16, lo: float = -1.0, hi: float = 1.0) -> "Grid":
        axis = np.linspace(lo, hi, n)
        return cls(axis, axis.copy(), axis.copy())

    @property
    def shape(self) -> tuple[int, int, int]:
        return (len(self.y), len(self.z), len(self.yb))

    @property
    def spacing(self) -> tuple[float, float, float]:
        return (
            float(self.y[1] - self.y[0]),
            float(self.z[1] - self.z[0]),
            float(self.yb[1] - self.yb[0]),
        )

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(self.y, self.z, self.yb, indexing="ij")


@dataclass
class NumericField:
    """A complex matrix field plus the per-axis stencil margins."""

    data: np.ndarray
    margin: tuple[int, int, int] = (0, 0, 0)
    label: str = ""

    def interior(self) -> np.ndarray:
        sl = []
        for m, n in zip(self.margin, self.data.shape[:3]):
            if 2 * m >= n:
                raise GridMarginError(
                    f"margin {self.margin} leaves no interior on shape {self.data.shape[:3]}"
                )
            sl.append(slice(m, n - m) if m else slice(None))
        return self.data[tuple(sl)]

    def max_norm(self) -> float:
        inner = self.interior()
        return float(np.sqrt((np.abs(inner) ** 2).sum(axis=(-2, -1))).max())

    def __add__(self, other: "NumericField") -> "NumericField":
        return NumericField(self.data + other.data, _merge_margin(self.margin, other.margin))

    def __sub__(self, other: "NumericField") -> "NumericField":
        return NumericField(self.data - other.data, _merge_margin(self.margin, other.margin))


def _merge_margin(a: tuple[int, int, int], b: tuple[int, int, int]) -> tuple[int, int, int]:
    return tuple(max(x, y) for x, y in zip(a, b))


def max_norm_mod_z_offset(f: NumericField) -> float:
    """Max interior norm after removing the field's first-z-plane values.

    Used when two expressions should agree up to a z-independent term,
    i.e. up to the kernel of D_z.
    """
    shifted = f.data - f.data[:, :1]
    return NumericField(shifted, f.margin).max_norm()


def _fd(data: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second-order central difference; one-sided at the two boundary planes."""
    out = np.empty_like(data)
    n = data.shape[axis]
    sl = lambda s: tuple(s if k == axis else slice(None) for k in range(data.ndim))
    out[sl(slice(1, n - 1))] = (
        data[sl(slice(2, n))] - data[sl(slice(0, n - 2))]
    ) / (2 * h)
    out[sl(slice(0, 1))] = (
        -3 * data[sl(slice(0, 1))] + 4 * data[sl(slice(1, 2))] - data[sl(slice(2, 3))]
    ) / (2 * h)
    out[sl(slice(n - 1, n))] = (
        3 * data[sl(slice(n - 1, n))]
        - 4 * data[sl(slice(n - 2, n - 1))]
        + data[sl(slice(n - 3, n - 2))]
    ) / (2 * h)
    return out


# ---------------------------------------------------------------------------
# solutions
# ---------------------------------------------------------------------------


@dataclass
class NumericSolution:
    """Sampled (X, J) fields, optionally with closed-form jet evaluators."""

    n: int
    grid: Grid
    x_field: np.ndarray | None = None
    j_field: np.ndarray | None = None
    provenance: str = "user"
    params: dict = dc_field(default_factory=dict)
    constants: dict = dc_field(default_factory=dict)

    def x_jet(self, multi: tuple[int, int, int]) -> np.ndarray | None:
        return None

    def j_jet(self, multi: tuple[int, int, int]) -> np.ndarray | None:
        return None

    def jinv(self) -> np.ndarray | None:
        return None


def _vectorized_expm(t: np.ndarray, h: np.ndarray) -> np.ndarray:
    """exp(t*H) per grid point for a scalar field t and constant matrix H."""
    n = h.shape[0]
    if not np.any(h):
        out = np.zeros(t.shape + (n, n), dtype=complex)
        out[...] = np.eye(n)
        return out
    w, v = np.linalg.eig(h)
    if np.linalg.cond(v) < 1e8:
        vinv = np.linalg.inv(v)
        phases = np.exp(np.multiply.outer(t, w))
        return np.einsum("...k,ik,kj->...ij", phases, v, vinv)
    out = np.empty(t.shape + (n, n), dtype=complex)
    for idx in np.ndindex(t.shape):
        out[idx] = expm(t[idx] * h)
    return out


class _PolyField:
    """A small exact polynomial in (y, z, yb): enough for the built-in family."""

    def __init__(self, terms: dict[tuple[int, int, int], complex]):
        self.terms = {k: v for k, v in terms.items() if v != 0}

    def derive(self, axis: int) -> "_PolyField":
        out: dict[tuple[int, int, int], complex] = {}
        for exps, c in self.terms.items():
            if exps[axis] == 0:
                continue
            new = list(exps)
            new[axis] -= 1
            out[tuple(new)] = out.get(tuple(new), 0) + c * exps[axis]
        return _PolyField(out)

    def derive_multi(self, multi: tuple[int, int, int]) -> "_PolyField":
        p = self
        for axis, count in enumerate(multi):
            for _ in range(count):
                p = p.derive(axis)
        return p

    def sample(self, grid: Grid) -> np.ndarray:
        yy, zz, bb = grid.mesh()
        out = np.zeros(grid.shape, dtype=complex)
        for (a, b, c), coeff in self.terms.items():
            out += coeff * yy**a * zz**b * bb**c
        return out


class AbelianSolution(NumericSolution):
    """X = H*(y*yb - z^2/2), J = exp(-y*z*H) for a constant traceless H.

    Both field equations and the Backlund relations hold identically:
    X_yyb = H, X_zz = -H, the connections are -z*H and y*H (all multiples
    of H, so every commutator vanishes) and Jinv*J_y = -z*H = X_z,
    Jinv*J_z = -y*H = -X_yb.
    """

    def __init__(self, h: np.ndarray, grid: Grid):
        h = np.asarray(h, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("H must be a square matrix")
        if abs(np.trace(h)) > 1e-12 * max(1.0, float(np.abs(h).max())):
            raise ValueError("H must be traceless")
        self._h = h
        self._q = _PolyField({(1, 0, 1): 1.0, (0, 2, 0): -0.5})
        yy, zz, _ = grid.mesh()
        t = -(yy * zz)
        j = _vectorized_expm(t, h)
        x = self._q.sample(grid)[..., None, None] * h
        super().__init__(
            n=h.shape[0],
            grid=grid,
            x_field=x,
            j_field=j,
            provenance="abelian",
            params={"H": h},
            constants={"H": h},
        )
        self._jinv = _vectorized_expm(-t, h)
        self._hpow: dict[int, np.ndarray] = {0: np.eye(self.n, dtype=complex)}

    def _h_power(self, k: int) -> np.ndarray:
        if k not in self._hpow:
            self._hpow[k] = self._hpow[k - 1] @ self._h
        return self._hpow[k]

    def x_jet(self, multi: tuple[int, int, int]) -> np.ndarray:
        scalar = self._q.derive_multi(multi).sample(self.grid)
        return scalar[..., None, None] * self._h

    def j_jet(self, multi: tuple[int, int, int]) -> np.ndarray:
        a, b, c = multi
        if c > 0:
            return np.zeros(self.grid.shape + (self.n, self.n), dtype=complex)
        # d^a/dy^a d^b/dz^b exp(-yzH) = P(y, z; H) exp(-yzH) with P built by
        # the recursions P -> dP/dy - zH P and P -> dP/dz - yH P
        poly: dict[tuple[int, int, int], complex] = {(0, 0, 0): 1.0}
        for axis in (0, 1):
            count = (a, b)[axis]
            for _ in range(count):
                nxt: dict[tuple[int, int, int], complex] = {}
                for (py, pz, hk), coeff in poly.items():
                    if axis == 0 and py > 0:
                        key = (py - 1, pz, hk)
                        nxt[key] = nxt.get(key, 0) + coeff * py
                    if axis == 1 and pz > 0:
                        key = (py, pz - 1, hk)
                        nxt[key] = nxt.get(key, 0) + coeff * pz
                    key = (py + (axis == 1), pz + (axis == 0), hk + 1)
                    nxt[key] = nxt.get(key, 0) - coeff
                poly = nxt
        yy, zz, _ = self.grid.mesh()
        out = np.zeros(self.grid.shape + (self.n, self.n), dtype=complex)
        for (py, pz, hk), coeff in poly.items():
            scalar = coeff * yy**py * zz**pz
            out += scalar[..., None, None] * self._h_power(hk)
        return np.einsum("...ij,...jk->...ik", out, self.j_field)

    def jinv(self) -> np.ndarray:
        return self._jinv


class ManufacturedSolution(NumericSolution):
    """X = H * exp(alpha*y + beta*z + gamma*yb): every jet in closed form.

    Not a solution of any field equation; used for finite-difference
    convergence studies where exact jets of a generic field are needed.
    """

    def __init__(
        self,
        h: np.ndarray,
        grid: Grid,
        alpha: float = 0.4,
        beta: float = 0.3,
        gamma: float = -0.2,
    ):
        h = np.asarray(h, dtype=complex)
        self._h = h
        self._rates = (alpha, beta, gamma)
        yy, zz, bb = grid.mesh()
        scalar = np.exp(alpha * yy + beta * zz + gamma * bb)
        x = scalar[..., None, None] * h
        super().__init__(
            n=h.shape[0],
            grid=grid,
            x_field=x,
            provenance="manufactured",
            params={"H": h, "rates": self._rates},
            constants={"H": h},
        )

    def x_jet(self, multi: tuple[int, int, int]) -> np.ndarray:
        a, b, c = multi
        al, be, ga = self._rates
        return (al**a) * (be**b) * (ga**c) * self.x_field


def make_abelian_solution(h: np.ndarray, grid: Grid) -> AbelianSolution:
    return AbelianSolution(h, grid)


def make_manufactured_solution(h: np.ndarray, grid: Grid, **rates) -> ManufacturedSolution:
    return ManufacturedSolution(h, grid, **rates)


# ---------------------------------------------------------------------------
# expression evaluation
# ---------------------------------------------------------------------------


class _Evaluator:
    def __init__(
        self,
        sol: NumericSolution,
        constants: dict | None,
        lam: complex | None,
        mode: str,
    ):
        if mode not in ("auto", "analytic", "fd"):
            raise ValueError(f"mode must be auto, analytic or fd, got {mode!r}")
        self.sol = sol
        self.constants = dict(sol.constants)
        if constants:
            self.constants.update(constants)
        self.lam = lam
        self.mode = mode
        self.grid = sol.grid
        self._cache: dict = {}
        yy, zz, bb = sol.grid.mesh()
        self._coords = (yy, zz, bb)

    def _field_for_head(self, head: str) -> np.ndarray:
        f = self.sol.x_field if head == "X" else self.sol.j_field
        if f is None:
            raise UnboundConstantError(f"solution has no {head} field")
        return f

    def _fd_jet(self, head: str, multi: tuple[int, int, int]) -> tuple[np.ndarray, tuple]:
        data = self._field_for_head(head)
        margin = [0, 0, 0]
        hs = self.grid.spacing
        for axis, count in enumerate(multi):
            for _ in range(count):
                data = _fd(data, axis, hs[axis])
                margin[axis] += 1
        return data, tuple(margin)

    def jet(self, atom: JetAtom) -> tuple[np.ndarray, tuple]:
        key = (atom.head, atom.multi)
        if key in self._cache:
            return self._cache[key]
        if atom.is_constant:
            try:
                c = np.asarray(self.constants[atom.head], dtype=complex)
            except KeyError:
                raise UnboundConstantError(
                    f"constant matrix {atom.head!r} is not bound"
                ) from None
            data = np.broadcast_to(c, self.grid.shape + c.shape)
            result = (data, (0, 0, 0))
        elif atom.head == "Jinv":
            analytic = self.sol.jinv() if self.mode != "fd" else None
            if analytic is not None:
                result = (analytic, (0, 0, 0))
            else:
                j = self._field_for_head("J")
                result = (np.linalg.inv(j), (0, 0, 0))
        else:
            analytic = None
            if self.mode != "fd":
                analytic = (
                    self.sol.x_jet(atom.multi)
                    if atom.head == "X"
                    else self.sol.j_jet(atom.multi)
                )
            if analytic is not None:
                result = (analytic, (0, 0, 0))
            elif self.mode == "analytic":
                raise ValueError(
                    f"no analytic jets available for {atom.head} on this solution"
                )
            else:
                result = self._fd_jet(atom.head, atom.multi)
        self._cache[key] = result
        return result

    def wrapper(self, w: IntegralWrapper) -> tuple[np.ndarray, tuple]:
        inner = self.expr(w.inner)
        data = cumulative_trapezoid(inner.data, x=self.grid.z, axis=1, initial=0)
        return data, inner.margin

    def expr(self, e: Expr) -> NumericField:
        n = self.sol.n
        total = np.zeros(self.grid.shape + (n, n), dtype=complex)
        margin = (0, 0, 0)
        eye = np.eye(n, dtype=complex)
        for m in e.monomials:
            coeff = m.coeff.to_complex() * np.ones(self.grid.shape, dtype=complex)
            for axis in range(3):
                if m.powers[axis]:
                    coeff = coeff * self._coords[axis] ** m.powers[axis]
            if m.powers[3]:
                if self.lam is None:
                    raise ValueError(
                        "expression contains the spectral parameter; pass lam="
                    )
                coeff = coeff * self.lam ** m.powers[3]
            acc = np.broadcast_to(eye, self.grid.shape + (n, n)).copy()
            for f in m.factors:
                data, fm = self.jet(f) if isinstance(f, JetAtom) else self.wrapper(f)
                acc = acc @ data
                margin = _merge_margin(margin, fm)
            total = total + coeff[..., None, None] * acc
        if not np.all(np.isfinite(total)):
            raise FloatingPointError("non-finite entries in evaluated field")
        return NumericField(total, margin)


def eval_expr(
    e: Expr,
    sol: NumericSolution,
    constants: dict | None = None,
    lam: complex | None = None,
    mode: str = "auto",
) -> NumericField:
    """Evaluate a canonical expression on a sampled solution.

    Jets come from the solution's closed forms when available (unless
    ``mode="fd"`` forces stencils); antiderivative wrappers integrate
    cumulatively along z with the first plane pinned to zero.
    """
    return _Evaluator(sol, constants, lam, mode).expr(e)


# ---------------------------------------------------------------------------
# residuals of the defining equations
# ---------------------------------------------------------------------------


def residual_G(sol: NumericSolution, mode: str = "auto") -> float:
    return eval_expr(calculus.psdym3_equation(), sol, mode=mode).max_norm()


def residual_F(sol: NumericSolution, mode: str = "auto") -> float:
    return eval_expr(calculus.sdym3_equation(), sol, mode=mode).max_norm()


def bt_residual(sol: NumericSolution, mode: str = "auto") -> float:
    """Max norm over both relations Jinv*J_y = X_z and Jinv*J_z = -X_yb."""
    from .expr import atom_expr

    first = atom_expr("Jinv") * atom_expr("J", (1, 0, 0)) - atom_expr("X", (0, 1, 0))
    second = atom_expr("Jinv") * atom_expr("J", (0, 1, 0)) + atom_expr("X", (0, 0, 1))
    return max(
        eval_expr(first, sol, mode=mode).max_norm(),
        eval_expr(second, sol, mode=mode).max_norm(),
    )


def det_deviation(sol: NumericSolution) -> float:
    if sol.j_field is None:
        raise ValueError("solution has no J field")
    return float(np.abs(np.linalg.det(sol.j_field) - 1.0).max())


def trace_deviation(sol: NumericSolution) -> float:
    if sol.x_field is None:
        raise ValueError("solution has no X field")
    return float(np.abs(np.trace(sol.x_field, axis1=-2, axis2=-1)).max())


# ---------------------------------------------------------------------------
# Lax pair on the abelian family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaxNumericReport:
    first: float
    second: float
    compatibility: float


def lax_residual(sol: AbelianSolution, a: complex, lam: complex) -> LaxNumericReport:
    """Evaluate the linear system for Psi = J*W, W = H*exp(a(y + lam z - lam^2 yb)).

    On the abelian family the connections are multiples of H, so all
    commutators with W vanish and W_z = lam*W_y, W_yb = -lam*W_z hold
    identically; both residuals sit at the rounding floor.
    """
    if not isinstance(sol, AbelianSolution):
        raise ValueError("the Lax solution family is defined on the abelian solution")
    h = sol.params["H"]
    yy, zz, bb = sol.grid.mesh()
    scalar = np.exp(a * (yy + lam * zz - lam**2 * bb))
    w = scalar[..., None, None] * h

    def jet(i: int, j: int, k: int) -> np.ndarray:
        return (a ** (i + j + k)) * (lam**j) * ((-(lam**2)) ** k) * w

    xz = sol.x_jet((0, 1, 0))
    xyb = sol.x_jet((0, 0, 1))
    comm_y = xz @ w - w @ xz
    comm_z = xyb @ w - w @ xyb
    first = jet(0, 1, 0) - lam * (jet(1, 0, 0) + comm_y)
    second = jet(0, 0, 1) + lam * (jet(0, 1, 0) - comm_z)
    ay = jet(1, 0, 0) + comm_y
    az = jet(0, 1, 0) - comm_z
    compat = (
        -a * lam**2 * ay  # d/dyb of A_y W, using the closed form of W
        + a * lam * az
    )
    norm = lambda f: NumericField(f).max_norm()
    return LaxNumericReport(norm(first), norm(second), norm(compat))


# ---------------------------------------------------------------------------
# conservation laws (numeric side)
# ---------------------------------------------------------------------------


def conservation_residual(
    sol: NumericSolution,
    q,
    constants: dict | None = None,
    mode: str = "auto",
) -> float:
    """Max interior norm of the divergence of one conserved charge."""
    from .operators import conservation_divergence

    div = conservation_divergence(q)
    return eval_expr(div, sol, constants=constants, mode=mode).max_norm()


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------


def _conv_solution(grid: Grid) -> ManufacturedSolution:
    h = np.array([[1.0, 0.0], [0.0, -1.0]])
    return ManufacturedSolution(h, grid)


def _check_int_roundtrip(grid: Grid) -> float:
    sol = _conv_solution(grid)
    hz = grid.spacing[1]
    integral = cumulative_trapezoid(sol.x_field, x=grid.z, axis=1, initial=0)
    back = _fd(integral, 1, hz)
    return NumericField(back - sol.x_field, (0, 1, 0)).max_norm()


def _check_int_of_derivative(grid: Grid) -> float:
    sol = _conv_solution(grid)
    hz = grid.spacing[1]
    dz = _fd(sol.x_field, 1, hz)
    integral = cumulative_trapezoid(dz, x=grid.z, axis=1, initial=0)
    expected = sol.x_field - sol.x_field[:, :1]
    return NumericField(integral - expected, (0, 1, 0)).max_norm()


def _check_fd_derivative(grid: Grid) -> float:
    sol = _conv_solution(grid)
    hy = grid.spacing[0]
    fd = _fd(sol.x_field, 0, hy)
    return NumericField(fd - sol.x_jet((1, 0, 0)), (1, 0, 0)).max_norm()


def _check_inconsistent(grid: Grid) -> float:
    sol = _conv_solution(grid)
    hy = grid.spacing[0]
    fd = _fd(sol.x_field, 0, hy)
    return NumericField(fd - sol.x_jet((0, 1, 0)), (1, 0, 0)).max_norm()


def _check_analytic_floor(grid: Grid) -> float:
    sol = _conv_solution(grid)
    diff = sol.x_jet((1, 0, 0)) - 0.4 * sol.x_field
    return NumericField(diff).max_norm()


CONVERGENCE_CHECKS = {
    "int-roundtrip": _check_int_roundtrip,
    "int-of-derivative": _check_int_of_derivative,
    "fd-derivative": _check_fd_derivative,
    "inconsistent": _check_inconsistent,
    "analytic-floor": _check_analytic_floor,
}


@dataclass
class ConvergenceReport:
    opname: str
    spacings: list[float]
    residuals: list[float]
    order: float
    floored: bool

    @property
    def converged(self) -> bool:
        return self.floored or abs(self.order - 2.0) <= 0.3


def convergence_order(opname: str, grids: list[Grid]) -> ConvergenceReport:
    """Least-squares slope of log residual against log spacing.

    Expects roughly 2 for the second-order stencils; residuals at the
    rounding floor mark the report as floored and skip the slope test.
    """
    if len(grids) < 3:
        raise ValueError("need at least 3 grids for a convergence estimate")
    try:
        check = CONVERGENCE_CHECKS[opname]
    except KeyError:
        raise ValueError(f"unknown convergence check {opname!r}") from None
    residuals = [check(g) for g in grids]
    spacings = [g.spacing[0] for g in grids]
    if max(residuals) < 1e-13:
        return ConvergenceReport(opname, spacings, residuals, float("nan"), True)
    slope = float(np.polyfit(np.log(spacings), np.log(residuals), 1)[0])
    return ConvergenceReport(opname, spacings, residuals, slope, False)


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------


def save_solution(sol: NumericSolution, path: str) -> None:
    """Textual snapshot: one JSON header line, then row-major 're im' pairs.

    Entries are written per field in grid order (y fastest to slowest:
    index order y, z, yb) and row-major within each N x N matrix.
    """
    fields = []
    if sol.x_field is not None:
        fields.append("X")
    if sol.j_field is not None:
        fields.append("J")
    header = {
        "format": "sdym3lab-snapshot",
        "version": 1,
        "n": sol.n,
        "shape": list(sol.grid.shape),
        "origin": [float(sol.grid.y[0]), float(sol.grid.z[0]), float(sol.grid.yb[0])],
        "spacing": list(sol.grid.spacing),
        "provenance": sol.provenance,
        "fields": fields,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for name in fields:
            data = sol.x_field if name == "X" else sol.j_field
            flat = data.reshape(-1)
            for v in flat:
                fh.write(f"{v.real!r} {v.imag!r}\n")


def load_solution(path: str) -> NumericSolution:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "sdym3lab-snapshot":
            raise ValueError("not a solution snapshot file")
        shape = tuple(header["shape"])
        n = header["n"]
        origin = header["origin"]
        spacing = header["spacing"]
        axes = [
            np.linspace(o, o + (s - 1) * h, s)
            for o, h, s in zip(origin, spacing, shape)
        ]
        grid = Grid(*axes)
        count = shape[0] * shape[1] * shape[2] * n * n
        fields = {}
        for name in header["fields"]:
            values = np.empty(count, dtype=complex)
            for k in range(count):
                re, im = fh.readline().split()
                values[k] = float(re) + 1j * float(im)
            fields[name] = values.reshape(shape + (n, n))
    return NumericSolution(
        n=n,
        grid=grid,
        x_field=fields.get("X"),
        j_field=fields.get("J"),
        provenance=header.get("provenance", "snapshot"),
    )
