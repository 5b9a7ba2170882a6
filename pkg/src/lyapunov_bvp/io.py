"""JSON problem files, CSV tables and atomic report writing.

Every file written carries ``SCHEMA_VERSION``. Scalar coefficients use the
same dictionaries that :meth:`ScalarCoefficient.to_dict` produces::

    {"kind": "constant", "value": 5, "T": 3.14159}
    {"kind": "fourier", "a0": 1, "cos": [0.5], "sin": [0], "T": 6.2832}
    {"kind": "piecewise", "breakpoints": [0, 1, 2], "values": [3, -1], "T": 2}
    {"kind": "samples", "values": [...], "T": 1}

Matrix coefficients are ``{"kind": "matrix", "entries": [[coef, ...], ...]}``
where an entry may also be a plain number (constant with the common
period ``T`` given at the top level).
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile

import numpy as np

from .coeffs import (Constant, Fourier, MatrixCoefficient, PiecewiseConstant, SampledGrid,
                     ScalarCoefficient, SpatialCoefficient2D)
from .grids import build_grid, parse_domain
from .report import jsonable

__all__ = [
    "SCHEMA_VERSION",
    "parse_float",
    "parse_coefficient",
    "parse_matrix",
    "parse_field",
    "parse_nonlinearity",
    "load_json",
    "dumps_json",
    "write_json",
    "write_csv",
    "atomic_write",
    "field_csv_text",
    "write_field_csv",
    "read_field_csv",
]

SCHEMA_VERSION = "lyapunov-bvp/1"


class InputError(ValueError):
    """Malformed problem file or argument."""


def parse_float(x):
    """Float from a number or the strings ``inf``/``-inf``/``pi``."""
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity", "oo"):
            return math.inf
        if s == "-inf":
            return -math.inf
        if s == "pi":
            return math.pi
        if s == "2pi":
            return 2 * math.pi
    try:
        return float(x)
    except (TypeError, ValueError) as exc:
        raise InputError(f"not a number: {x!r}") from exc


def _require(d, key, ctx):
    if key not in d:
        raise InputError(f"{ctx}: missing field {key!r}")
    return d[key]


def parse_coefficient(d, T=None):
    """Scalar periodic coefficient from a dictionary or a number."""
    if isinstance(d, (int, float, str)) and not isinstance(d, bool):
        if T is None:
            raise InputError("a numeric coefficient needs a period T")
        return Constant(parse_float(d), parse_float(T))
    if not isinstance(d, dict):
        raise InputError(f"coefficient must be an object, got {type(d).__name__}")
    kind = d.get("kind")
    period = d.get("T", T)
    if period is None and kind != "piecewise":
        raise InputError(f"{kind} coefficient: missing period T")
    try:
        if kind == "constant":
            return Constant(parse_float(_require(d, "value", kind)), parse_float(period))
        if kind == "fourier":
            cos = [parse_float(v) for v in d.get("cos", [])]
            sin = [parse_float(v) for v in d.get("sin", [0.0] * len(cos))]
            if len(sin) != len(cos):
                raise InputError("fourier: cos and sin lists differ in length")
            return Fourier(parse_float(d.get("a0", 0.0)), tuple(zip(cos, sin)),
                           parse_float(period))
        if kind == "piecewise":
            return PiecewiseConstant(tuple(parse_float(b) for b in _require(d, "breakpoints", kind)),
                                     tuple(parse_float(v) for v in _require(d, "values", kind)),
                                     None if period is None else parse_float(period))
        if kind == "samples":
            return SampledGrid(tuple(parse_float(v) for v in _require(d, "values", kind)),
                               parse_float(period))
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"{kind} coefficient: {exc}") from exc
    raise InputError(f"unknown coefficient kind {kind!r}")


def parse_matrix(d, T=None):
    """Symmetric matrix coefficient (entries may be numbers or coefficients)."""
    if isinstance(d, dict):
        T = d.get("T", T)
        entries = _require(d, "entries", "matrix")
    else:
        entries = d
    try:
        rows = tuple(tuple(parse_coefficient(e, T) for e in row) for row in entries)
        return MatrixCoefficient(rows)
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"matrix coefficient: {exc}") from exc


def _analytic_field(d, grid):
    """``offset + amplitude * cos(k_x x) cos(k_y y)`` (or ``cos(k r)`` on a disc)."""
    c = grid.coords
    amp = parse_float(d.get("amplitude", 0.0))
    off = parse_float(d.get("offset", 0.0))
    ks = [parse_float(k) for k in d.get("wavenumbers", [0.0])]
    if d.get("radial"):
        r = np.hypot(*[c[:, i] for i in range(c.shape[1])])
        return off + amp * np.cos(ks[0] * r)
    vals = np.ones(grid.n)
    for i, k in enumerate(ks[: c.shape[1]]):
        vals = vals * np.cos(k * c[:, i])
    return off + amp * vals


def parse_field(d, domain, h):
    """Nodal field on the grid of ``(domain, h)``.

    Accepted forms: a number (constant), a list of node values, a nested
    list ``n x n`` of numbers (constant matrix), ``{"kind": "values",
    "values": [...]}``, ``{"kind": "cosine", ...}`` (see
    :func:`_analytic_field`) or ``{"kind": "matrix", "entries": [[field]]}``.
    """
    grid = build_grid(domain, float(h))
    if isinstance(d, (int, float, str)) and not isinstance(d, bool):
        return SpatialCoefficient2D(domain, h, np.full(grid.n, parse_float(d)))
    if isinstance(d, list):
        arr = np.asarray(d, dtype=float)
        if arr.ndim == 2 and arr.shape[0] == arr.shape[1] and arr.shape[0] != grid.n:
            return SpatialCoefficient2D(domain, h, np.broadcast_to(arr, (grid.n,) + arr.shape).copy())
        return SpatialCoefficient2D(domain, h, arr)
    if not isinstance(d, dict):
        raise InputError("field must be a number, a list or an object")
    kind = d.get("kind")
    if kind == "values":
        return SpatialCoefficient2D(domain, h, np.asarray(_require(d, "values", kind), dtype=float))
    if kind == "cosine":
        return SpatialCoefficient2D(domain, h, _analytic_field(d, grid))
    if kind == "matrix":
        entries = _require(d, "entries", kind)
        n = len(entries)
        vals = np.zeros((grid.n, n, n))
        for i, row in enumerate(entries):
            if len(row) != n:
                raise InputError("matrix field must be square")
            for j, e in enumerate(row):
                vals[:, i, j] = parse_field(e, domain, h).values
        if not np.allclose(vals, np.swapaxes(vals, 1, 2)):
            raise InputError("matrix field must be symmetric")
        return SpatialCoefficient2D(domain, h, vals)
    raise InputError(f"unknown field kind {kind!r}")


def _nl_field(d, domain):
    """Field description for a nonlinearity: number, 1D coefficient or analytic field."""
    if isinstance(d, (int, float, str)) and not isinstance(d, bool):
        return parse_float(d)
    if isinstance(d, dict) and d.get("kind") in ("constant", "fourier", "piecewise", "samples"):
        if domain.dim != 1:
            raise InputError("periodic coefficients can only describe fields on intervals")
        return parse_coefficient(d, d.get("T", domain.length))
    if isinstance(d, dict) and d.get("kind") == "cosine":
        return CosineField(dict(d))
    raise InputError(f"unsupported field description {d!r}")


class _CoordsGrid:
    def __init__(self, coords):
        self.coords = coords
        self.n = coords.shape[0]


class CosineField:
    """Callable analytic field ``f(x[, y])`` described by a ``cosine`` dictionary."""

    def __init__(self, spec):
        self.spec = spec

    def __call__(self, *xy):
        return _analytic_field(self.spec, _CoordsGrid(np.column_stack(xy)))

    def to_dict(self):
        return dict(self.spec)


def _parse_table(d):
    from .resonant import CustomTable

    if "csv" in d:
        rows = list(csv.DictReader(_io.StringIO(d["csv"].strip())))
        try:
            u = [float(r["u"]) for r in rows]
            gu = [float(r["gu"]) for r in rows]
            guu = [float(r["guu"]) for r in rows]
        except (KeyError, ValueError) as exc:
            raise InputError(f"table csv needs numeric columns u, gu, guu: {exc}") from exc
        return CustomTable(tuple(u), tuple(gu), tuple(guu))
    return CustomTable(tuple(_require(d, "u", "table")), tuple(map(tuple, np.atleast_2d(d["gu"]))),
                       tuple(map(tuple, np.atleast_2d(d["guu"]))),
                       None if d.get("x") is None else tuple(d["x"]))


def parse_nonlinearity(d, domain):
    """:class:`NonlinearitySpec` from a dictionary.

    Fields: ``kind`` (``linear``, ``saturated``, ``custom``), ``b`` (list of
    fields), ``s0``, ``coupling`` (constant symmetric matrix), ``forcing``
    (list of fields), ``p`` (list of exponents), ``table`` (custom kind,
    either arrays ``u``, ``gu``, ``guu`` or an embedded ``csv`` string with
    those columns).
    """
    from .resonant import NonlinearitySpec

    kind = _require(d, "kind", "nonlinearity")
    try:
        b = tuple(_nl_field(v, domain) for v in d.get("b", [0.0]))
        forcing = d.get("forcing")
        return NonlinearitySpec(
            kind=kind,
            b=b,
            s0=None if d.get("s0") is None else tuple(parse_float(v) for v in d["s0"]),
            coupling=None if d.get("coupling") is None else tuple(map(tuple, d["coupling"])),
            forcing=None if forcing is None else tuple(_nl_field(v, domain) for v in forcing),
            p=None if d.get("p") is None else tuple(parse_float(v) for v in d["p"]),
            table=_parse_table(d["table"]) if "table" in d else None,
        )
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"nonlinearity: {exc}") from exc


def parse_domain_checked(d):
    try:
        return parse_domain(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"domain: {exc}") from exc


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def dumps_json(obj):
    """Deterministic JSON (sorted keys, non-finite floats as strings)."""
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _umask():
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, dumps_json(obj))


def csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"# schema={SCHEMA_VERSION}"])
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    v = jsonable(v)
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, header, rows):
    atomic_write(path, csv_text(header, rows))


def is_scalar_coefficient(x):
    return isinstance(x, ScalarCoefficient)


def field_csv_text(field):
    """Nodal field as CSV: one header line, then ``coords..., values...`` per node.

    The header reads ``# schema=... domain=<json> h=<h> rows=<nodes> cols=<columns>``;
    matrix fields are flattened row-major into ``n * n`` value columns.
    """
    grid = build_grid(field.domain, field.h)
    vals = np.asarray(field.values, dtype=float).reshape(grid.n, -1)
    data = np.column_stack([grid.coords, vals])
    dom = json.dumps(field.domain.to_dict(), sort_keys=True, separators=(",", ":"))
    lines = [f"# schema={SCHEMA_VERSION} domain={dom} h={field.h!r} rows={data.shape[0]} "
             f"cols={data.shape[1]}"]
    lines += [",".join(repr(float(v)) for v in row) for row in data]
    return "\n".join(lines) + "\n"


def write_field_csv(path, field):
    atomic_write(path, field_csv_text(field))


def read_field_csv(path):
    """Inverse of :func:`write_field_csv`; the node coordinates are checked."""
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
            body = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    meta = {}
    for tok in header.lstrip("#").split():
        key, _, val = tok.partition("=")
        meta[key] = val
    try:
        domain = parse_domain(json.loads(meta["domain"]))
        h = float(meta["h"])
        rows, cols = int(meta["rows"]), int(meta["cols"])
        data = np.loadtxt(_io.StringIO(body), delimiter=",", ndmin=2)
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed field CSV ({exc})") from exc
    if data.shape != (rows, cols):
        raise InputError(f"{path}: expected {rows} x {cols} values, found {data.shape}")
    grid = build_grid(domain, h)
    dim = grid.coords.shape[1]
    if rows != grid.n or not np.allclose(data[:, :dim], grid.coords, atol=1e-9 * max(1.0, h)):
        raise InputError(f"{path}: node coordinates do not match the grid")
    vals = data[:, dim:]
    k = vals.shape[1]
    if k == 1:
        vals = vals[:, 0]
    else:
        n = int(round(math.sqrt(k)))
        if n * n != k:
            raise InputError(f"{path}: {k} value columns is neither 1 nor a square")
        vals = vals.reshape(rows, n, n)
    return SpatialCoefficient2D(domain, h, vals)
