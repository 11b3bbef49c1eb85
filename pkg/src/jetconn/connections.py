"""First and second order connections as symbolic coefficient grids.

A first order connection on an (m, n) universe is the grid F_i^p(x, y):
fiber index p counts rows, base index i counts columns.  A second order
connection adds G_i^p and H_ij^p.  The product of two first order
connections has

    F' = F,   G' = Gbar,   H'_ij^p = dF_i^p/dx^j + sum_q dF_i^p/dy^q * Gbar_j^q

with i inherited from the first factor and j the differentiation direction.
Everything downstream (curvature, exchange, the one-parameter family,
classification) is index bookkeeping over these grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from .errors import DimensionMismatchError
from .evaluate import PROBABILISTIC, SYMBOLIC, SamplePolicy, expr_equal
from .expr import Const, Expr, SymbolUniverse, as_expr, diff, simplify, substitute

HOLONOMIC = "holonomic"
SEMIHOLONOMIC = "semiholonomic"
NONHOLONOMIC = "nonholonomic"


def _entry(value, universe: SymbolUniverse, what: str, base_only=False) -> Expr:
    e = as_expr(value)
    allowed = set(universe.base_names)
    if not base_only:
        allowed |= set(universe.fiber_names)
    stray = sorted(e.free_vars() - allowed)
    if stray:
        raise ValueError(f"{what} references variables {stray} outside the universe")
    return e


def _grid2(rows, universe, shape, what, base_only=False) -> Tuple:
    n, m = shape
    rows = tuple(tuple(row) for row in rows)
    if len(rows) != n or any(len(row) != m for row in rows):
        raise DimensionMismatchError(f"{what} must be a {n}x{m} grid")
    return tuple(
        tuple(_entry(e, universe, what, base_only) for e in row) for row in rows
    )


def _grid3(rows, universe, shape, what, base_only=False) -> Tuple:
    n, m, k = shape
    rows = tuple(tuple(tuple(inner) for inner in row) for row in rows)
    if len(rows) != n or any(len(row) != m for row in rows) or any(
        len(inner) != k for row in rows for inner in row
    ):
        raise DimensionMismatchError(f"{what} must be a {n}x{m}x{k} grid")
    return tuple(
        tuple(
            tuple(_entry(e, universe, what, base_only) for e in inner) for inner in row
        )
        for row in rows
    )


@dataclass(frozen=True)
class Connection1:
    """First order connection: y_i^p = F_i^p(x, y)."""

    universe: SymbolUniverse
    F: Tuple

    def __post_init__(self):
        shape = (self.universe.fiber_dim, self.universe.base_dim)
        object.__setattr__(self, "F", _grid2(self.F, self.universe, shape, "F"))


@dataclass(frozen=True)
class Connection2:
    """Second order connection: y_i^p = F, y_0i^p = G, y_ij^p = H."""

    universe: SymbolUniverse
    F: Tuple
    G: Tuple
    H: Tuple

    def __post_init__(self):
        n, m = self.universe.fiber_dim, self.universe.base_dim
        object.__setattr__(self, "F", _grid2(self.F, self.universe, (n, m), "F"))
        object.__setattr__(self, "G", _grid2(self.G, self.universe, (n, m), "G"))
        object.__setattr__(self, "H", _grid3(self.H, self.universe, (n, m, m), "H"))


@dataclass(frozen=True)
class LinearConnection1:
    """Linear first order connection, coefficients F_iq^p over the base.

    ``coeff[p-1][i-1][q-1]`` multiplies y^q in F_i^p.
    """

    universe: SymbolUniverse
    coeff: Tuple

    def __post_init__(self):
        n, m = self.universe.fiber_dim, self.universe.base_dim
        object.__setattr__(
            self,
            "coeff",
            _grid3(self.coeff, self.universe, (n, m, n), "coeff", base_only=True),
        )


@dataclass(frozen=True)
class AffineConnection:
    """Classical affine connection via Christoffel symbols Gamma^i_jk(x).

    ``christoffel[i-1][j-1][k-1]`` is Gamma^i_jk; no symmetry in (j, k) is
    assumed, so torsion is allowed.
    """

    dim: int
    christoffel: Tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        u = self.universe
        object.__setattr__(
            self,
            "christoffel",
            _grid3(
                self.christoffel, u, (self.dim, self.dim, self.dim),
                "christoffel", base_only=True,
            ),
        )

    @property
    def universe(self) -> SymbolUniverse:
        # Tangent-bundle picture: y variables are the fiber velocities.
        return SymbolUniverse(self.dim, self.dim)


@dataclass(frozen=True)
class Classification:
    """Verdict plus how it was decided.

    ``confidence`` is "symbolic" only when every comparison that fed the
    verdict was settled symbolically; one sampled comparison degrades the
    whole result to "probabilistic".
    """

    verdict: str
    confidence: str

    def __str__(self):
        return f"{self.verdict} ({self.confidence})"


def product(gamma: Connection1, gamma_bar: Connection1) -> Connection2:
    """Product of two first order connections, a second order connection.

    The H block follows the displayed coordinate law: differentiate the
    first factor's F along x^j and along the fibers, contracting the fiber
    derivative with the second factor's coefficients.
    """
    if gamma.universe != gamma_bar.universe:
        raise DimensionMismatchError(
            "connections live on different universes: "
            f"({gamma.universe.base_dim},{gamma.universe.fiber_dim}) vs "
            f"({gamma_bar.universe.base_dim},{gamma_bar.universe.fiber_dim})"
        )
    u = gamma.universe
    m, n = u.base_dim, u.fiber_dim
    H = []
    for p in range(1, n + 1):
        rows = []
        for i in range(1, m + 1):
            f = gamma.F[p - 1][i - 1]
            row = []
            for j in range(1, m + 1):
                total = diff(f, f"x{j}")
                for q in range(1, n + 1):
                    total = total + diff(f, f"y{q}") * gamma_bar.F[q - 1][j - 1]
                row.append(simplify(total))
            rows.append(tuple(row))
        H.append(tuple(rows))
    return Connection2(u, gamma.F, gamma_bar.F, tuple(H))


def ehresmann_prolongation(gamma: Connection1) -> Connection2:
    """Self-product; semiholonomic by construction."""
    return product(gamma, gamma)


def curvature(gamma: Connection1) -> Tuple:
    """Antisymmetric part R_ij^p = H_ij^p - H_ji^p of the self-product's H."""
    H = ehresmann_prolongation(gamma).H
    n = gamma.universe.fiber_dim
    m = gamma.universe.base_dim
    return tuple(
        tuple(
            tuple(
                simplify(H[p][i][j] - H[p][j][i]) for j in range(m)
            )
            for i in range(m)
        )
        for p in range(n)
    )


def exchange(delta: Connection2) -> Connection2:
    """Swap the two first order parts and transpose H.  An involution."""
    m = delta.universe.base_dim
    n = delta.universe.fiber_dim
    transposed = tuple(
        tuple(tuple(delta.H[p][j][i] for j in range(m)) for i in range(m))
        for p in range(n)
    )
    return Connection2(delta.universe, delta.G, delta.F, transposed)


def family(gamma: Connection1, k) -> Connection2:
    """Member k of the one-parameter family k*(G*G) + (1-k)*e(G*G).

    The affine combination acts on the H grid only; both endpoints share
    the first order parts, which is what makes it well defined.
    """
    if isinstance(k, bool) or not isinstance(k, (int, float, Fraction)):
        raise TypeError("family parameter must be a real number")
    delta = ehresmann_prolongation(gamma)
    m = delta.universe.base_dim
    n = delta.universe.fiber_dim
    ck = as_expr(k)
    cj = as_expr(1 - k)
    H = tuple(
        tuple(
            tuple(
                simplify(ck * delta.H[p][i][j] + cj * delta.H[p][j][i])
                for j in range(m)
            )
            for i in range(m)
        )
        for p in range(n)
    )
    return Connection2(delta.universe, delta.F, delta.G, H)


def classify(delta: Connection2, policy: SamplePolicy = None) -> Classification:
    """Sort a second order connection into the holonomy hierarchy.

    Semiholonomic when F and G agree entrywise; holonomic when H is
    additionally symmetric in its two lower indices.  Every comparison is
    carried out (no short-circuiting) so the confidence label reflects the
    whole decision.
    """
    u = delta.universe
    m, n = u.base_dim, u.fiber_dim
    checks = [
        expr_equal(delta.F[p][i], delta.G[p][i], policy)
        for p in range(n)
        for i in range(m)
    ]
    semi = all(c.equal for c in checks)
    if semi:
        symmetric = [
            expr_equal(delta.H[p][i][j], delta.H[p][j][i], policy)
            for p in range(n)
            for i in range(m)
            for j in range(i + 1, m)
        ]
        checks.extend(symmetric)
        verdict = HOLONOMIC if all(c.equal for c in symmetric) else SEMIHOLONOMIC
    else:
        verdict = NONHOLONOMIC
    confidence = (
        SYMBOLIC if all(c.confidence == SYMBOLIC for c in checks) else PROBABILISTIC
    )
    return Classification(verdict, confidence)


def linear_to_general(linear: LinearConnection1) -> Connection1:
    """Expand F_i^p = sum_q F_iq^p * y^q into a general connection."""
    u = linear.universe
    m, n = u.base_dim, u.fiber_dim
    F = tuple(
        tuple(
            simplify(
                _dot(
                    [linear.coeff[p][i][q] for q in range(n)],
                    [u.y(q + 1) for q in range(n)],
                )
            )
            for i in range(m)
        )
        for p in range(n)
    )
    return Connection1(u, F)


def affine_to_general(affine: AffineConnection) -> Connection1:
    """View an affine connection as a linear connection on TM -> M.

    The fiber variables y^l stand for the tangent coordinates, and the sign
    flips to match the classical transport equation: F (fiber row k, base
    column j) = -sum_l Gamma^k_jl * y^l.
    """
    u = affine.universe
    d = affine.dim
    F = tuple(
        tuple(
            simplify(
                -_dot(
                    [affine.christoffel[k][j][l] for l in range(d)],
                    [u.y(l + 1) for l in range(d)],
                )
            )
            for j in range(d)
        )
        for k in range(d)
    )
    return Connection1(u, F)


def _dot(coeffs: Sequence[Expr], variables: Sequence[Expr]) -> Expr:
    total = None
    for c, v in zip(coeffs, variables):
        term = c * v
        total = term if total is None else total + term
    return total if total is not None else Const(0)


def is_fiber_linear(gamma: Connection1) -> bool:
    """Structural test that every F_i^p is linear homogeneous in y.

    Checks that all second fiber derivatives vanish and that F is zero at
    y = 0.  Conservative: exotic but linear expressions the simplifier
    cannot collapse are reported nonlinear.
    """
    u = gamma.universe
    fiber = u.fiber_names
    at_zero = {name: Const(0) for name in fiber}
    for row in gamma.F:
        for e in row:
            if not _is_zero(simplify(substitute(e, at_zero))):
                return False
            for a in fiber:
                first = diff(e, a)
                for b in fiber:
                    if not _is_zero(diff(first, b)):
                        return False
    return True


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0
