"""Index combinatorics for nonholonomic jets and iterated tangent coordinates.

A jet coordinate of order r over an m-dimensional base is addressed by a
sequence (k1, ..., kr) with each entry in {0, 1, ..., m}; 0 means "no
differentiation at that slot".  The subsequence of nonzero entries, in
order, is the core written <k1, ..., kr>.  A stored point is semiholonomic
when coordinates with equal cores carry equal values, and holonomic when
the value depends only on the multiset of core entries.

Tangent-coordinate points model T^k M: one n-vector per subset S of
{1, ..., k}, with the projections rho_s dropping every subset containing s.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Tuple

from .errors import DimensionMismatchError
from .expr import Expr, SymbolUniverse, diff, simplify

MAX_ORDER = 4
MAX_BASE_DIM = 3
VALUE_TOL = 1e-12


def _check_bounds(order: int, base_dim: int):
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"jet order {order} outside the supported range 0..{MAX_ORDER}")
    if base_dim < 1 or base_dim > MAX_BASE_DIM:
        raise ValueError(
            f"base dimension {base_dim} outside the supported range 1..{MAX_BASE_DIM}"
        )


def all_sequences(order: int, base_dim: int) -> Tuple[Tuple[int, ...], ...]:
    """All (base_dim+1)^order index sequences, in odometer order."""
    _check_bounds(order, base_dim)
    return tuple(itertools.product(range(base_dim + 1), repeat=order))


@dataclass(frozen=True)
class JetSequence:
    """One index sequence (k1, ..., kr) with entries in 0..base_dim."""

    entries: Tuple[int, ...]
    base_dim: int

    def __post_init__(self):
        entries = tuple(int(k) for k in self.entries)
        object.__setattr__(self, "entries", entries)
        _check_bounds(len(entries), self.base_dim)
        for k in entries:
            if not 0 <= k <= self.base_dim:
                raise ValueError(f"index {k} outside 0..{self.base_dim}")

    @property
    def order(self) -> int:
        return len(self.entries)


def nonzero_core(seq) -> Tuple[int, ...]:
    """The subsequence of nonzero entries, original order kept."""
    entries = seq.entries if isinstance(seq, JetSequence) else tuple(seq)
    return tuple(k for k in entries if k != 0)


class JetPoint:
    """A point of the order-r nonholonomic jet space, stored densely.

    ``values`` maps (fiber index p, index sequence) to a real; the all-zero
    sequence slot holds y^p itself.  The table must cover every sequence for
    every p.  Instances are treated as immutable.
    """

    __slots__ = ("order", "base_dim", "fiber_dim", "base", "values")

    def __init__(self, order, base_dim, fiber_dim, base, values):
        _check_bounds(order, base_dim)
        if fiber_dim < 1:
            raise ValueError("fiber dimension must be positive")
        base = tuple(float(v) for v in base)
        if len(base) != base_dim:
            raise DimensionMismatchError(
                f"base point has {len(base)} coordinates, expected {base_dim}"
            )
        table = {}
        for key, value in values.items():
            p, seq = key
            table[(int(p), tuple(int(k) for k in seq))] = float(value)
        expected = {
            (p, seq)
            for p in range(1, fiber_dim + 1)
            for seq in all_sequences(order, base_dim)
        }
        if set(table) != expected:
            missing = sorted(expected - set(table))[:3]
            extra = sorted(set(table) - expected)[:3]
            raise ValueError(
                f"jet point table mismatch; missing {missing}, unexpected {extra}"
            )
        for key, value in table.items():
            if not math.isfinite(value):
                raise ValueError(f"non-finite value at {key}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "base_dim", base_dim)
        object.__setattr__(self, "fiber_dim", fiber_dim)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "values", table)

    def __setattr__(self, name, value):
        raise AttributeError("jet points are immutable")

    def __eq__(self, other):
        if not isinstance(other, JetPoint):
            return NotImplemented
        return (
            self.order == other.order
            and self.base_dim == other.base_dim
            and self.fiber_dim == other.fiber_dim
            and self.base == other.base
            and self.values == other.values
        )

    def __repr__(self):
        return (
            f"JetPoint(order={self.order}, base_dim={self.base_dim}, "
            f"fiber_dim={self.fiber_dim})"
        )


def _constant_on_groups(point: JetPoint, key, tol: float) -> bool:
    # True when stored values are constant (within tol) on each key-class.
    spans = {}
    for (p, seq), value in point.values.items():
        k = (p, key(seq))
        lo, hi = spans.get(k, (value, value))
        spans[k] = (min(lo, value), max(hi, value))
    return all(hi - lo <= tol for lo, hi in spans.values())


def is_semiholonomic_point(point: JetPoint, tol: float = VALUE_TOL) -> bool:
    """Equal nonzero cores force equal values, within abs tolerance."""
    return _constant_on_groups(point, nonzero_core, tol)


def is_holonomic_point(point: JetPoint, tol: float = VALUE_TOL) -> bool:
    """Semiholonomic, and invariant under permuting the core."""
    return is_semiholonomic_point(point, tol) and _constant_on_groups(
        point, lambda seq: tuple(sorted(nonzero_core(seq))), tol
    )


def target_projection(point: JetPoint, q: int) -> JetPoint:
    """Project to order q by keeping sequences whose last r-q slots are 0."""
    r = point.order
    if not 0 <= q <= r:
        raise ValueError(f"target order {q} outside 0..{r}")
    tail = (0,) * (r - q)
    values = {
        (p, seq): point.values[(p, seq + tail)]
        for p in range(1, point.fiber_dim + 1)
        for seq in all_sequences(q, point.base_dim)
    }
    return JetPoint(q, point.base_dim, point.fiber_dim, point.base, values)


def prolonged_projection(point: JetPoint, k: int, q: int) -> JetPoint:
    """Apply the prolonged projection J^k pi^{r-k}_{q-k} to the stored table.

    Keeps sequences whose entries at 1-based positions q-k+1 .. r-k vanish,
    deletes those positions (the outer k slots and the leading q-k slots
    survive), and reindexes the result as an order-q point.
    """
    r = point.order
    if not 1 <= k <= q <= r:
        raise ValueError(f"need 1 <= k <= q <= r, got k={k}, q={q}, r={r}")
    dropped = range(q - k, r - k)  # 0-based slots that must hold 0
    values = {}
    for (p, seq), value in point.values.items():
        if all(seq[pos] == 0 for pos in dropped):
            kept = tuple(seq[pos] for pos in range(r) if pos not in dropped)
            values[(p, kept)] = value
    return JetPoint(q, point.base_dim, point.fiber_dim, point.base, values)


def jet_points_close(a: JetPoint, b: JetPoint, tol: float = VALUE_TOL) -> bool:
    """Same shape and every stored value within abs tolerance."""
    if (a.order, a.base_dim, a.fiber_dim) != (b.order, b.base_dim, b.fiber_dim):
        return False
    if any(abs(x - y) > tol for x, y in zip(a.base, b.base)):
        return False
    return all(abs(value - b.values[key]) <= tol for key, value in a.values.items())


def projections_agree(point: JetPoint, tol: float = VALUE_TOL) -> bool:
    """Cross-check of semiholonomy through projection agreement.

    True when the prolonged projection matches the target projection for
    every pair 1 <= k <= q <= r.  Equivalent to the core-based test; the
    equivalence is exercised by the test suite rather than assumed.
    """
    r = point.order
    for q in range(1, r + 1):
        target = target_projection(point, q)
        for k in range(1, q + 1):
            if not jet_points_close(prolonged_projection(point, k, q), target, tol):
                return False
    return True


class TangentCoordPoint:
    """A point of the k-th iterated tangent bundle in subset coordinates.

    ``values`` maps each subset of {1, ..., level}, given as a sorted tuple,
    to an n-vector.  No consistency between the slots is assumed.
    """

    __slots__ = ("level", "dim", "values")

    def __init__(self, level, dim, values):
        if level < 0:
            raise ValueError("level must be non-negative")
        if dim < 1:
            raise ValueError("dimension must be positive")
        table = {}
        for subset, vec in values.items():
            key = tuple(sorted(int(s) for s in subset))
            vec = tuple(float(v) for v in vec)
            if len(vec) != dim:
                raise DimensionMismatchError(
                    f"vector at subset {key} has length {len(vec)}, expected {dim}"
                )
            table[key] = vec
        expected = {
            tuple(sorted(s))
            for size in range(level + 1)
            for s in itertools.combinations(range(1, level + 1), size)
        }
        if set(table) != expected:
            raise ValueError("subset table must cover all subsets of {1..level} exactly")
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "values", table)

    def __setattr__(self, name, value):
        raise AttributeError("tangent coordinate points are immutable")

    def __eq__(self, other):
        if not isinstance(other, TangentCoordPoint):
            return NotImplemented
        return (
            self.level == other.level
            and self.dim == other.dim
            and self.values == other.values
        )

    def __repr__(self):
        return f"TangentCoordPoint(level={self.level}, dim={self.dim})"


def rho_projection(point: TangentCoordPoint, s: int) -> TangentCoordPoint:
    """Drop every subset containing s; shift indices above s down by one."""
    if not 1 <= s <= point.level:
        raise ValueError(f"projection index {s} outside 1..{point.level}")
    values = {}
    for subset, vec in point.values.items():
        if s in subset:
            continue
        values[tuple(x - 1 if x > s else x for x in subset)] = vec
    return TangentCoordPoint(point.level - 1, point.dim, values)


@dataclass(frozen=True)
class FunctionDifferentials:
    """Differentials of a base function on T M or T^2 M.

    ``d1`` is f_1 = f_i x{i}_1; at level 2, ``d2`` is the same along the
    second tangent copy and ``d12`` = f_ij x{i}_1 x{j}_2 + f_i x{i}_12.
    The extended universe carries the velocity variables.
    """

    universe: SymbolUniverse
    level: int
    d1: Expr
    d2: Expr = None
    d12: Expr = None


def tangent_universe(universe: SymbolUniverse, level: int) -> SymbolUniverse:
    """The universe extended with velocity variables x{i}_1 [, x{i}_2, x{i}_12]."""
    suffixes = ("1",) if level == 1 else ("1", "2", "12")
    extras = set(universe.extra_symbols)
    extras.update(
        f"x{i}_{s}" for i in range(1, universe.base_dim + 1) for s in suffixes
    )
    return SymbolUniverse(universe.base_dim, universe.fiber_dim, frozenset(extras))


def function_differentials(
    f: Expr, level: int, universe: SymbolUniverse
) -> FunctionDifferentials:
    """Symbolic differentials of a function of the base coordinates.

    Level 1 returns f_1 only; level 2 adds f_2 and the second differential
    f_12.  Raises when f touches anything but base variables.
    """
    if level not in (1, 2):
        raise ValueError("level must be 1 or 2")
    allowed = set(universe.base_names)
    stray = sorted(f.free_vars() - allowed)
    if stray:
        raise ValueError(f"function must use base variables only, found {stray}")
    extended = tangent_universe(universe, level)
    m = universe.base_dim
    grad = [diff(f, f"x{i}") for i in range(1, m + 1)]

    def contract(suffix):
        total = None
        for i in range(1, m + 1):
            term = grad[i - 1] * extended.var(f"x{i}_{suffix}")
            total = term if total is None else total + term
        return simplify(total)

    d1 = contract("1")
    if level == 1:
        return FunctionDifferentials(extended, 1, d1)
    d2 = contract("2")
    pieces = None
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            second = diff(grad[i - 1], f"x{j}")
            term = second * extended.var(f"x{i}_1") * extended.var(f"x{j}_2")
            pieces = term if pieces is None else pieces + term
    for i in range(1, m + 1):
        term = grad[i - 1] * extended.var(f"x{i}_12")
        pieces = pieces + term
    return FunctionDifferentials(extended, 2, d1, d2, simplify(pieces))
