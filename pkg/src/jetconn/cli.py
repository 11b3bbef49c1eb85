"""Command line front end.

Exit codes: 0 on success, 1 for domain errors (bad files, dimension
mismatches, failed verification), 2 for usage errors.  All output is
deterministic for a fixed --seed, so emitted files can be compared
byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io
from .connections import (
    affine_to_general,
    classify,
    curvature,
    ehresmann_prolongation,
    exchange,
    family,
    linear_to_general,
    product,
)
from .errors import DimensionMismatchError, FormatError, JetconnError
from .evaluate import SamplePolicy, eval_expr
from .expr import Expr, to_text
from .frames import (
    adapted_frame,
    horizontal_lift_field,
    twofold_dual_coframe,
    twofold_frame,
    validate_twofold_jacobian,
)
from .jets import is_holonomic_point, is_semiholonomic_point, projections_agree
from .transport import loop_holonomy, second_order_ode, transport1, transport2


def _load(path) -> io.Document:
    try:
        return io.load_path(path)
    except OSError as err:
        reason = err.strerror or str(err)
        raise FormatError(f"{path}: {reason}") from None
    except (JetconnError, ValueError) as err:
        raise FormatError(f"{path}: {err}") from None


def _first_order(doc: io.Document):
    if doc.kind == "connection1":
        return doc.value
    if doc.kind == "linear":
        return linear_to_general(doc.value)
    if doc.kind == "affine":
        return affine_to_general(doc.value)
    raise FormatError(
        f"expected a first-order connection, got {io.KIND_LABELS[doc.kind]}"
    )


def _second_order(doc: io.Document):
    if doc.kind == "connection2":
        return doc.value
    raise FormatError(
        f"expected an order-2 connection, got {io.KIND_LABELS[doc.kind]}"
    )


def _expect(doc: io.Document, kind: str):
    if doc.kind != kind:
        raise FormatError(
            f"expected a {io.KIND_LABELS[kind]}, got {io.KIND_LABELS[doc.kind]}"
        )
    return doc.value


def _policy(args) -> SamplePolicy:
    points = args.samples if args.samples is not None else 64
    tol = args.tol if args.tol is not None else 1e-9
    return SamplePolicy(points=points, tol=tol, seed=args.seed)


def _floats(text: str, what: str) -> tuple:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise FormatError(f"{what} must be comma-separated numbers") from None


def _assignment(universe, text: str) -> dict:
    names = universe.variable_names
    values = _floats(text, "--at")
    if len(values) != len(names):
        raise FormatError(
            f"--at needs {len(names)} values ({', '.join(names)}), got {len(values)}"
        )
    return dict(zip(names, values))


def _grid_out(grid, assignment):
    if isinstance(grid, Expr):
        if assignment is None:
            return to_text(grid)
        return eval_expr(grid, assignment)
    return [_grid_out(child, assignment) for child in grid]


def _emit(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_validate(args) -> str:
    doc = _load(args.file)
    return f"{args.file}: valid {io.KIND_LABELS[doc.kind]}\n"


def _cmd_product(args) -> str:
    gamma = _first_order(_load(args.first))
    gamma_bar = _first_order(_load(args.second))
    try:
        result = product(gamma, gamma_bar)
    except DimensionMismatchError as err:
        raise DimensionMismatchError(
            f"{args.first} and {args.second}: {err}"
        ) from None
    return io.dump_json(io.connection2_to_data(result))


def _cmd_prolong(args) -> str:
    gamma = _first_order(_load(args.file))
    return io.dump_json(io.connection2_to_data(ehresmann_prolongation(gamma)))


def _cmd_curvature(args) -> str:
    gamma = _first_order(_load(args.file))
    grid = curvature(gamma)
    return io.dump_json(io.curvature_to_data(grid, gamma.universe))


def _cmd_exchange(args) -> str:
    delta = _second_order(_load(args.file))
    return io.dump_json(io.connection2_to_data(exchange(delta)))


def _cmd_family(args) -> str:
    gamma = _first_order(_load(args.file))
    return io.dump_json(io.connection2_to_data(family(gamma, args.k)))


def _cmd_classify(args) -> str:
    delta = _second_order(_load(args.file))
    return f"{classify(delta, _policy(args))}\n"


def _cmd_semiholonomy(args) -> str:
    point = _expect(_load(args.file), "jet")
    core = is_semiholonomic_point(point)
    agree = projections_agree(point)
    holo = is_holonomic_point(point)
    return (
        f"semiholonomic (core rule): {'yes' if core else 'no'}\n"
        f"semiholonomic (projection cross-check): {'yes' if agree else 'no'}\n"
        f"holonomic: {'yes' if holo else 'no'}\n"
    )


def _cmd_frames(args) -> str:
    doc = _load(args.file)
    if doc.kind == "connection2":
        delta = doc.value
        assignment = None
        if args.at is not None:
            assignment = _assignment(delta.universe, args.at)
        rows = []
        for row in horizontal_lift_field(delta):
            rows.append(
                {
                    "direction": row.direction,
                    "dy": _grid_out(row.dy, assignment),
                    "dyj": _grid_out(row.dyj, assignment),
                }
            )
        return io.dump_json({"lift": rows})
    gamma = _first_order(doc)
    built = adapted_frame(gamma)
    assignment = None
    if args.at is not None:
        assignment = _assignment(gamma.universe, args.at)
    return io.dump_json(
        {
            "frame": _grid_out(built.frame, assignment),
            "coframe": _grid_out(built.coframe, assignment),
        }
    )


def _cmd_twofold(args) -> str:
    doc = _load(args.file)
    conn = _expect(doc, "twofold")
    points = args.samples if args.samples is not None else 100
    tol = args.tol if args.tol is not None else 1e-10
    frame = twofold_frame(conn, doc.extra)
    dual = twofold_dual_coframe(
        conn, doc.extra, points=points, tol=tol, seed=args.seed
    )
    return io.dump_json(
        {
            "frame": _grid_out(frame, None),
            "coframe": _grid_out(dual.matrix, None),
            "gamma_bar": _grid_out(dual.gamma_bar, None),
            "max_deviation": dual.max_deviation,
            "checked_points": dual.checked_points,
        }
    )


def _cmd_jacobian(args) -> str:
    transform = _expect(_load(args.file), "transform")
    report = validate_twofold_jacobian(transform, _policy(args))
    return io.dump_json(
        {
            "valid": report.valid,
            "confidence": report.confidence,
            "violations": [list(v) for v in report.violations],
            "jacobian": _grid_out(report.jacobian, None),
        }
    )


def _cmd_transport(args) -> str:
    conn_doc = _load(args.connection)
    curve = _expect(_load(args.curve), "curve")
    y0 = _floats(args.y0, "--y0")
    steps = args.steps
    if steps < 1:
        raise FormatError("--steps must be a positive integer")
    try:
        if args.variant == "1":
            result = transport1(_first_order(conn_doc), curve, y0, steps)
        elif args.variant == "2":
            delta = _second_order(conn_doc)
            n = delta.universe.fiber_dim
            m = delta.universe.base_dim
            if args.yj0 is None:
                yj0 = tuple((0.0,) * m for _ in range(n))
            else:
                flat = _floats(args.yj0, "--yj0")
                if len(flat) != n * m:
                    raise FormatError(
                        f"--yj0 needs {n * m} values (row-major y_i^p), got {len(flat)}"
                    )
                yj0 = tuple(flat[p * m : (p + 1) * m] for p in range(n))
            result = transport2(delta, curve, y0, yj0, steps)
        else:
            result = second_order_ode(_second_order(conn_doc), curve, y0, steps)
    except DimensionMismatchError as err:
        raise DimensionMismatchError(
            f"{args.connection} and {args.curve}: {err}"
        ) from None
    return io.transport_csv(result)


def _cmd_holonomy(args) -> str:
    gamma = _first_order(_load(args.connection))
    loop = _expect(_load(args.loop), "curve")
    try:
        result = loop_holonomy(gamma, loop, steps=args.steps)
    except DimensionMismatchError as err:
        raise DimensionMismatchError(
            f"{args.connection} and {args.loop}: {err}"
        ) from None
    return io.dump_json(
        {
            "defect": result.defect,
            "steps": result.steps,
            "matrix": [[float(v) for v in row] for row in result.matrix],
        }
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="sampling seed")
    common.add_argument("--tol", type=float, default=None, help="comparison tolerance")
    common.add_argument(
        "--samples", type=int, default=None, help="sample point count"
    )
    common.add_argument("--output", default=None, help="write output to PATH")

    parser = argparse.ArgumentParser(
        prog="jetconn",
        description="Connections on fibered manifolds: products, frames, transport.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a document file")
    p.add_argument("file")
    p.set_defaults(run=_cmd_validate)

    p = sub.add_parser(
        "product", parents=[common], help="order-2 product of two connections"
    )
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(run=_cmd_product)

    p = sub.add_parser(
        "prolong", parents=[common], help="self-product of a connection"
    )
    p.add_argument("file")
    p.set_defaults(run=_cmd_prolong)

    p = sub.add_parser(
        "curvature", parents=[common], help="curvature grid of a connection"
    )
    p.add_argument("file")
    p.set_defaults(run=_cmd_curvature)

    p = sub.add_parser(
        "exchange", parents=[common], help="swap the two order-1 projections"
    )
    p.add_argument("file")
    p.set_defaults(run=_cmd_exchange)

    p = sub.add_parser(
        "family", parents=[common], help="k-weighted symmetrization family"
    )
    p.add_argument("file")
    p.add_argument("--k", type=float, required=True, help="family parameter")
    p.set_defaults(run=_cmd_family)

    p = sub.add_parser(
        "classify", parents=[common], help="holonomy class of an order-2 connection"
    )
    p.add_argument("file")
    p.set_defaults(run=_cmd_classify)

    p = sub.add_parser(
        "semiholonomy", parents=[common], help="point-level jet checks"
    )
    p.add_argument("file")
    p.set_defaults(run=_cmd_semiholonomy)

    p = sub.add_parser(
        "frames",
        parents=[common],
        help="adapted frame (order 1) or horizontal lift (order 2)",
    )
    p.add_argument("file")
    p.add_argument("--at", default=None, help="evaluate at comma-separated point")
    p.set_defaults(run=_cmd_frames)

    p = sub.add_parser(
        "twofold", parents=[common], help="two-fold frame with verified dual"
    )
    p.add_argument("file")
    p.set_defaults(run=_cmd_twofold)

    p = sub.add_parser(
        "jacobian", parents=[common], help="check a transform respects the fibering"
    )
    p.add_argument("file")
    p.set_defaults(run=_cmd_jacobian)

    p = sub.add_parser(
        "transport", parents=[common], help="integrate transport along a curve"
    )
    p.add_argument("variant", choices=("1", "2", "ode2"))
    p.add_argument("connection")
    p.add_argument("curve")
    p.add_argument("--y0", required=True, help="initial fiber point, comma-separated")
    p.add_argument(
        "--yj0", default=None, help="initial jet block for variant 2, row-major"
    )
    p.add_argument("--steps", type=int, default=100, help="integration steps")
    p.set_defaults(run=_cmd_transport)

    p = sub.add_parser(
        "holonomy", parents=[common], help="transport a basis around a loop"
    )
    p.add_argument("connection")
    p.add_argument("loop")
    p.add_argument("--steps", type=int, required=True, help="integration steps")
    p.set_defaults(run=_cmd_holonomy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        text = args.run(args)
        _emit(args, text)
    except (JetconnError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
