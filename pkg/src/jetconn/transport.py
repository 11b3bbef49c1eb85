"""Parallel transport along base curves via fixed-step RK4.

The fiber ODEs are assembled from connection coefficient grids evaluated
at (x(t), y); curve derivatives come from symbolic differentiation, so the
integrator is the only source of numerical error.  Classical fourth order
Runge-Kutta with a fixed step keeps runs deterministic and makes the
convergence order testable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ._tape import STATUS_MESSAGES, Program, compile_program
from .connections import Connection1, Connection2, is_fiber_linear
from .errors import DimensionMismatchError, TransportError
from .expr import Expr, SymbolUniverse, as_expr, diff, substitute

CURVE_UNIVERSE = SymbolUniverse(0, 0, frozenset({"t"}))


@dataclass(frozen=True)
class Curve:
    """A base curve t -> (x^1(t), ..., x^m(t)) on a closed interval."""

    dim: int
    components: Tuple
    t0: float
    t1: float

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        if len(comps) != self.dim:
            raise DimensionMismatchError(
                f"curve needs {self.dim} components, got {len(comps)}"
            )
        for c in comps:
            stray = sorted(c.free_vars() - {"t"})
            if stray:
                raise ValueError(f"curve components may use only t, found {stray}")
        t0, t1 = float(self.t0), float(self.t1)
        if not (np.isfinite(t0) and np.isfinite(t1)):
            raise ValueError("interval endpoints must be finite")
        if not t0 < t1:
            raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)

    def velocity(self) -> Tuple[Expr, ...]:
        return tuple(diff(c, "t") for c in self.components)

    def acceleration(self) -> Tuple[Expr, ...]:
        return tuple(diff(v, "t") for v in self.velocity())

    def reversed(self) -> "Curve":
        """The same trace walked backwards over the same interval."""
        total = as_expr(self.t0 + self.t1) - CURVE_UNIVERSE.var("t")
        comps = tuple(substitute(c, {"t": total}) for c in self.components)
        return Curve(self.dim, comps, self.t0, self.t1)


@dataclass(frozen=True, eq=False)
class TransportResult:
    """Sampled trajectory of a transport integration.

    ``values[k]`` is y at ``times[k]``; ``jet_values`` adds y_i^p for
    second order transport.  The first row is the initial condition,
    bit for bit.
    """

    times: np.ndarray
    values: np.ndarray
    steps: int
    rhs_evaluations: int
    jet_values: np.ndarray = None


def _curve_program(curve: Curve, order: int) -> Program:
    exprs = list(curve.components) + list(curve.velocity())
    if order >= 2:
        exprs += list(curve.acceleration())
    return compile_program(exprs, ("t",))


def _eval_rows(program: Program, point, t: float) -> np.ndarray:
    out, status = program(np.asarray(point, dtype=np.float64))
    if status.any():
        code = int(status[status != 0][0])
        raise TransportError(f"{STATUS_MESSAGES[code]} at t = {t}")
    row = out[0]
    if not np.all(np.isfinite(row)):
        raise TransportError(f"non-finite expression value at t = {t}")
    return row


def _check_shapes(universe: SymbolUniverse, curve: Curve, y0, steps):
    if universe.base_dim != curve.dim:
        raise DimensionMismatchError(
            f"curve dimension {curve.dim} does not match base dimension "
            f"{universe.base_dim}"
        )
    if not isinstance(steps, int) or steps < 1:
        raise ValueError("steps must be a positive integer")
    y = np.asarray(y0, dtype=np.float64)
    if y.shape != (universe.fiber_dim,):
        raise DimensionMismatchError(
            f"initial fiber value must have length {universe.fiber_dim}"
        )
    return y


def transport1(
    gamma: Connection1, curve: Curve, y0, steps: int
) -> TransportResult:
    """Integrate dy^p/dt = sum_i F_i^p(x(t), y) dx^i/dt by RK4."""
    u = gamma.universe
    y = _check_shapes(u, curve, y0, steps)
    m, n = u.base_dim, u.fiber_dim
    cprog = _curve_program(curve, 1)
    fprog = compile_program(
        [gamma.F[p][i] for p in range(n) for i in range(m)],
        u.base_names + u.fiber_names,
    )

    def rhs(t, state):
        cvals = _eval_rows(cprog, [t], t)
        x, xdot = cvals[:m], cvals[m:]
        fvals = _eval_rows(fprog, np.concatenate((x, state)), t).reshape(n, m)
        return fvals @ xdot

    return _integrate_rk4(rhs, curve, y, steps)


def _integrate_rk4(rhs, curve: Curve, y0: np.ndarray, steps: int) -> TransportResult:
    h = (curve.t1 - curve.t0) / steps
    times = curve.t0 + np.arange(steps + 1) * h
    values = np.empty((steps + 1, y0.shape[0]))
    values[0] = y0
    y = y0
    for k in range(steps):
        t = curve.t0 + k * h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + (h / 2) * k1)
        k3 = rhs(t + h / 2, y + (h / 2) * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        values[k + 1] = y
    return TransportResult(times, values, steps, 4 * steps)


def transport2(
    delta: Connection2, curve: Curve, y0, yj0, steps: int
) -> TransportResult:
    """Integrate the coupled system dy = F dx, dy_i = H_ij dx^j by RK4.

    The H coefficients are evaluated at (x(t), y(t)); the jet slots y_i do
    not feed back, so the y component reproduces transport1 exactly on
    matching F grids.
    """
    u = delta.universe
    y = _check_shapes(u, curve, y0, steps)
    m, n = u.base_dim, u.fiber_dim
    yj = np.asarray(yj0, dtype=np.float64)
    if yj.shape != (n, m):
        raise DimensionMismatchError(f"initial jet value must be {n}x{m}")
    cprog = _curve_program(curve, 1)
    flat = [delta.F[p][i] for p in range(n) for i in range(m)]
    flat += [delta.H[p][i][j] for p in range(n) for i in range(m) for j in range(m)]
    prog = compile_program(flat, u.base_names + u.fiber_names)
    split = n * m

    def rhs(t, state):
        yvec, yjmat = state
        cvals = _eval_rows(cprog, [t], t)
        x, xdot = cvals[:m], cvals[m:]
        allvals = _eval_rows(prog, np.concatenate((x, yvec)), t)
        fvals = allvals[:split].reshape(n, m)
        hvals = allvals[split:].reshape(n, m, m)
        return fvals @ xdot, hvals @ xdot

    h = (curve.t1 - curve.t0) / steps
    times = curve.t0 + np.arange(steps + 1) * h
    values = np.empty((steps + 1, n))
    jet_values = np.empty((steps + 1, n, m))
    values[0] = y
    jet_values[0] = yj
    for k in range(steps):
        t = curve.t0 + k * h
        k1 = rhs(t, (y, yj))
        k2 = rhs(t + h / 2, (y + (h / 2) * k1[0], yj + (h / 2) * k1[1]))
        k3 = rhs(t + h / 2, (y + (h / 2) * k2[0], yj + (h / 2) * k2[1]))
        k4 = rhs(t + h, (y + h * k3[0], yj + h * k3[1]))
        y = y + (h / 6) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        yj = yj + (h / 6) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        values[k + 1] = y
        jet_values[k + 1] = yj
    return TransportResult(times, values, steps, 4 * steps, jet_values)


def second_order_ode(
    delta: Connection2, curve: Curve, y0, steps: int
) -> TransportResult:
    """Integrate dy^p = H_ij^p dx^i dx^j + F_i^p d2x^i along the curve.

    Needs the curve's symbolic second derivative; everything else matches
    the first order transports.
    """
    u = delta.universe
    y = _check_shapes(u, curve, y0, steps)
    m, n = u.base_dim, u.fiber_dim
    cprog = _curve_program(curve, 2)
    flat = [delta.F[p][i] for p in range(n) for i in range(m)]
    flat += [delta.H[p][i][j] for p in range(n) for i in range(m) for j in range(m)]
    prog = compile_program(flat, u.base_names + u.fiber_names)
    split = n * m

    def rhs(t, state):
        cvals = _eval_rows(cprog, [t], t)
        x, xdot, xacc = cvals[:m], cvals[m : 2 * m], cvals[2 * m :]
        allvals = _eval_rows(prog, np.concatenate((x, state)), t)
        fvals = allvals[:split].reshape(n, m)
        hvals = allvals[split:].reshape(n, m, m)
        return (hvals @ xdot) @ xdot + fvals @ xacc

    return _integrate_rk4(rhs, curve, y, steps)


@dataclass(frozen=True, eq=False)
class HolonomyResult:
    """Holonomy matrix of a loop plus its max-abs distance from identity."""

    matrix: np.ndarray
    defect: float
    steps: int


def loop_holonomy(
    gamma: Connection1, loop: Curve, basis=None, steps: int = 1000
) -> HolonomyResult:
    """Transport a basis around a closed loop and measure the defect.

    Requires closed endpoints (within 1e-9) and a connection linear in the
    fiber variables, so the column-by-column transports assemble a genuine
    linear map.  The default basis is the standard one; then the matrix
    represents the holonomy map itself.
    """
    u = gamma.universe
    m, n = u.base_dim, u.fiber_dim
    cprog = _curve_program(loop, 1)
    start = _eval_rows(cprog, [loop.t0], loop.t0)[:m]
    end = _eval_rows(cprog, [loop.t1], loop.t1)[:m]
    gap = float(np.abs(start - end).max())
    if gap > 1e-9:
        raise TransportError(
            f"curve endpoints differ by {gap:.3e}; not a loop"
        )
    if not is_fiber_linear(gamma):
        raise TransportError(
            "holonomy matrix needs a connection linear in the fiber variables"
        )
    if basis is None:
        basis_arr = np.eye(n)
    else:
        basis_arr = np.asarray(basis, dtype=np.float64)
        if basis_arr.ndim != 2 or basis_arr.shape[0] != n:
            raise DimensionMismatchError(
                f"basis must be an {n}-row matrix of column vectors"
            )
    columns = []
    for j in range(basis_arr.shape[1]):
        result = transport1(gamma, loop, basis_arr[:, j], steps)
        columns.append(result.values[-1])
    matrix = np.column_stack(columns)
    defect = float(np.abs(matrix - np.eye(n, basis_arr.shape[1])).max())
    return HolonomyResult(matrix, defect, steps)
