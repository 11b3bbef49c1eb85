"""Loading and saving of the JSON document formats and the CSV trajectory.

Every expression travels as grammar-conformant text, so emitted files can
be fed back in unchanged.  Document kind is detected from the key shape,
not from file names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .connections import (
    AffineConnection,
    Connection1,
    Connection2,
    LinearConnection1,
)
from .errors import FormatError
from .expr import Expr, SymbolUniverse, parse_expr, to_text
from .frames import TwoFoldConnection, TwofoldTransform, twofold_universe
from .jets import JetPoint
from .transport import CURVE_UNIVERSE, Curve, TransportResult

KIND_LABELS = {
    "connection1": "order-1 connection",
    "connection2": "order-2 connection",
    "linear": "linear connection",
    "affine": "affine connection",
    "twofold": "two-fold connection",
    "transform": "two-fold transform",
    "jet": "jet point",
    "curve": "curve",
    "curvature": "curvature grid",
}


@dataclass(frozen=True)
class Document:
    """One loaded file: its detected kind and the constructed value.

    For two-fold connections ``extra`` carries the optional gamma12_base
    override grid; for curvature grids it holds the raw payload.
    """

    kind: str
    value: object
    extra: object = None


def detect_kind(data) -> str:
    if not isinstance(data, dict):
        raise FormatError("top level must be a JSON object")
    if data.get("affine") is True:
        return "affine"
    if data.get("transform") is True:
        return "transform"
    if "dims" in data and "blocks" in data:
        return "twofold"
    if "values" in data and "order" in data:
        return "jet"
    if "components" in data and "dim" in data:
        return "curve"
    if data.get("linear") is True:
        return "linear"
    if data.get("curvature") is True:
        return "curvature"
    if data.get("order") == 2:
        return "connection2"
    if data.get("order") == 1 and "F" in data:
        return "connection1"
    raise FormatError("unrecognized document layout")


def _need(data, key, kind):
    if key not in data:
        raise FormatError(f"{kind} document is missing the {key!r} field")
    return data[key]


def _int_field(data, key, kind) -> int:
    value = _need(data, key, kind)
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{kind} field {key!r} must be an integer")
    return value


def _parse_grid(node, universe, depth):
    if depth == 0:
        if not isinstance(node, str):
            raise FormatError(f"expected expression text, got {type(node).__name__}")
        return parse_expr(node, universe)
    if not isinstance(node, list):
        raise FormatError("expected a nested array of expression text")
    return tuple(_parse_grid(child, universe, depth - 1) for child in node)


def load_data(data) -> Document:
    """Build the typed object for an already-parsed JSON payload."""
    kind = detect_kind(data)
    if kind == "connection1":
        m = _int_field(data, "base_dim", kind)
        n = _int_field(data, "fiber_dim", kind)
        u = SymbolUniverse(m, n)
        return Document(kind, Connection1(u, _parse_grid(_need(data, "F", kind), u, 2)))
    if kind == "connection2":
        m = _int_field(data, "base_dim", kind)
        n = _int_field(data, "fiber_dim", kind)
        u = SymbolUniverse(m, n)
        return Document(
            kind,
            Connection2(
                u,
                _parse_grid(_need(data, "F", kind), u, 2),
                _parse_grid(_need(data, "G", kind), u, 2),
                _parse_grid(_need(data, "H", kind), u, 3),
            ),
        )
    if kind == "linear":
        m = _int_field(data, "base_dim", kind)
        n = _int_field(data, "fiber_dim", kind)
        u = SymbolUniverse(m, n)
        return Document(
            kind, LinearConnection1(u, _parse_grid(_need(data, "coeff", kind), u, 3))
        )
    if kind == "affine":
        n = _int_field(data, "dim", kind)
        u = SymbolUniverse(n, n)
        return Document(
            kind,
            AffineConnection(n, _parse_grid(_need(data, "christoffel", kind), u, 3)),
        )
    if kind == "twofold":
        dims = _need(data, "dims", kind)
        if not isinstance(dims, list) or len(dims) != 4:
            raise FormatError("twofold dims must be a 4-element array")
        dims = tuple(int(d) for d in dims)
        u = twofold_universe(dims)
        blocks = _need(data, "blocks", kind)
        if not isinstance(blocks, dict):
            raise FormatError("twofold blocks must be an object")
        grids = {}
        for name in ("g1_base", "g2_base", "g12_base", "g12_f1", "g12_f2"):
            grids[name] = _parse_grid(_need(blocks, name, "twofold blocks"), u, 2)
        conn = TwoFoldConnection(
            dims,
            grids["g1_base"],
            grids["g2_base"],
            grids["g12_base"],
            grids["g12_f1"],
            grids["g12_f2"],
        )
        override = None
        if "gamma12_base" in data:
            override = _parse_grid(data["gamma12_base"], u, 2)
        return Document(kind, conn, override)
    if kind == "transform":
        dims = _need(data, "dims", kind)
        if not isinstance(dims, list) or len(dims) != 4:
            raise FormatError("transform dims must be a 4-element array")
        dims = tuple(int(d) for d in dims)
        u = twofold_universe(dims)
        comps = _need(data, "components", kind)
        if not isinstance(comps, list):
            raise FormatError("transform components must be an array")
        return Document(
            kind,
            TwofoldTransform(dims, tuple(parse_expr(c, u) for c in comps)),
        )
    if kind == "jet":
        r = _int_field(data, "order", kind)
        m = _int_field(data, "base_dim", kind)
        n = _int_field(data, "fiber_dim", kind)
        base = _need(data, "base", kind)
        records = _need(data, "values", kind)
        table = {}
        for rec in records:
            if not isinstance(rec, dict):
                raise FormatError("jet values must be an array of records")
            key = (int(rec["p"]), tuple(int(k) for k in rec["seq"]))
            if key in table:
                raise FormatError(f"duplicate jet record for p={key[0]}, seq={key[1]}")
            table[key] = float(rec["value"])
        return Document(kind, JetPoint(r, m, n, base, table))
    if kind == "curve":
        dim = _int_field(data, "dim", kind)
        comps = _need(data, "components", kind)
        if not isinstance(comps, list):
            raise FormatError("curve components must be an array")
        parsed = tuple(parse_expr(c, CURVE_UNIVERSE) for c in comps)
        return Document(
            kind,
            Curve(dim, parsed, _need(data, "t0", kind), _need(data, "t1", kind)),
        )
    # curvature grids round-trip as raw payload; validate only inspects them
    m = _int_field(data, "base_dim", kind)
    n = _int_field(data, "fiber_dim", kind)
    u = SymbolUniverse(m, n)
    grid = _parse_grid(_need(data, "R", kind), u, 3)
    return Document(kind, grid, data)


def load_path(path) -> Document:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise FormatError(f"not valid JSON: {err}") from None
    return load_data(data)


def _text_grid(grid):
    if isinstance(grid, Expr):
        return to_text(grid)
    return [_text_grid(child) for child in grid]


def connection1_to_data(conn: Connection1) -> dict:
    return {
        "order": 1,
        "base_dim": conn.universe.base_dim,
        "fiber_dim": conn.universe.fiber_dim,
        "F": _text_grid(conn.F),
    }


def connection2_to_data(conn: Connection2) -> dict:
    return {
        "order": 2,
        "base_dim": conn.universe.base_dim,
        "fiber_dim": conn.universe.fiber_dim,
        "F": _text_grid(conn.F),
        "G": _text_grid(conn.G),
        "H": _text_grid(conn.H),
    }


def curvature_to_data(grid, universe: SymbolUniverse) -> dict:
    return {
        "curvature": True,
        "base_dim": universe.base_dim,
        "fiber_dim": universe.fiber_dim,
        "R": _text_grid(grid),
    }


def dump_json(data) -> str:
    return json.dumps(data, indent=2) + "\n"


def transport_csv(result: TransportResult) -> str:
    """Render a trajectory as CSV: t, fiber columns, then any jet columns."""
    n = result.values.shape[1]
    header = ["t"] + [f"y{p}" for p in range(1, n + 1)]
    if result.jet_values is not None:
        m = result.jet_values.shape[2]
        header += [f"y{p}_{i}" for p in range(1, n + 1) for i in range(1, m + 1)]
    lines = [",".join(header)]
    for k in range(result.times.shape[0]):
        row = [repr(float(result.times[k]))]
        row += [repr(float(v)) for v in result.values[k]]
        if result.jet_values is not None:
            row += [repr(float(v)) for v in result.jet_values[k].reshape(-1)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
