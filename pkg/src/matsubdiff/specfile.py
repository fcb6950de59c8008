"""JSON function-spec documents.

A document looks like::

    {"version": 1, "d": 2, "ell": 2,
     "root": {"op": "sum", "args": [
         {"op": "lift", "atom": {"atom": "abs_coord", "index": 0},
          "P": [[1, 1], [1, 1]]},
         {"op": "lift", "atom": {"atom": "abs_coord", "index": 1},
          "P": [[1, -1], [-1, 1]]}]}}

Matrices are row-major nested lists. Coordinate indices are zero-based.
Parse errors carry the JSON path of the offending node (``root.args[1].P``).
"""

import json

import numpy as np

from . import expr as E
from .exceptions import MatSubdiffError, SpecParseError
from .subgrad import MatTuple
from .symmat import as_symmat

VERSION = 1


def _atom_to_dict(atom):
    if isinstance(atom, E.AbsCoord):
        return {"atom": "abs_coord", "index": atom.index}
    if isinstance(atom, E.AffineScalar):
        return {"atom": "affine_scalar", "a": atom.a.tolist(), "b": atom.b}
    if isinstance(atom, E.MaxAffine):
        return {"atom": "max_affine",
                "pieces": [{"a": a.tolist(), "b": float(b)}
                           for a, b in zip(atom.slopes, atom.offsets)]}
    raise TypeError(f"cannot serialize atom {type(atom).__name__}")


def node_to_dict(F):
    if isinstance(F, E.Const):
        return {"op": "const", "value": F.value.tolist()}
    if isinstance(F, E.Affine):
        return {"op": "affine", "V": F.V.tolist(), "A0": F.A0.tolist()}
    if isinstance(F, E.Lift):
        return {"op": "lift", "atom": _atom_to_dict(F.atom), "P": F.P.tolist()}
    if isinstance(F, E.Sum):
        return {"op": "sum", "args": [node_to_dict(F.left), node_to_dict(F.right)]}
    if isinstance(F, E.Scale):
        return {"op": "scale", "alpha": F.alpha, "arg": node_to_dict(F.arg)}
    if isinstance(F, E.Congruence):
        return {"op": "congruence", "M": F.M.tolist(), "arg": node_to_dict(F.arg)}
    if isinstance(F, E.Hadamard):
        return {"op": "hadamard", "M": F.M.tolist(), "arg": node_to_dict(F.arg)}
    if isinstance(F, E.Precompose):
        return {"op": "precompose", "A": F.A.tolist(), "b": F.b.tolist(),
                "arg": node_to_dict(F.arg)}
    if isinstance(F, E.BlockDiag):
        return {"op": "blockdiag", "args": [node_to_dict(F.first), node_to_dict(F.second)]}
    if isinstance(F, E.Double):
        return {"op": "double", "arg": node_to_dict(F.arg)}
    raise TypeError(f"cannot serialize node {type(F).__name__}")


def to_spec(F):
    return {"version": VERSION, "d": F.input_dim, "ell": F.output_dim, "root": node_to_dict(F)}


def dumps(F, **kw):
    return json.dumps(to_spec(F), **kw)


def _get(node, key, path):
    if not isinstance(node, dict):
        raise SpecParseError(path, "expected an object")
    if key not in node:
        raise SpecParseError(path, f"missing key {key!r}")
    return node[key]


def _number(val, path):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SpecParseError(path, "expected a number")
    return float(val)


def _integer(val, path):
    if isinstance(val, bool) or not isinstance(val, int):
        raise SpecParseError(path, "expected an integer")
    return val


def _array(val, ndim, path):
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        raise SpecParseError(path, "expected a numeric array") from None
    if arr.ndim != ndim:
        raise SpecParseError(path, f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    return arr


def _args(node, path, count):
    args = _get(node, "args", path)
    if not isinstance(args, list) or len(args) < count:
        raise SpecParseError(f"{path}.args", f"expected a list of at least {count} nodes")
    return args


def _atom_from_dict(node, d, path):
    kind = _get(node, "atom", path)
    if kind == "abs_coord":
        return E.AbsCoord(_integer(_get(node, "index", path), f"{path}.index"), d)
    if kind == "affine_scalar":
        a = _array(_get(node, "a", path), 1, f"{path}.a")
        return E.AffineScalar(a, _number(_get(node, "b", path), f"{path}.b"))
    if kind == "max_affine":
        pieces = _get(node, "pieces", path)
        if not isinstance(pieces, list) or not pieces:
            raise SpecParseError(f"{path}.pieces", "expected a nonempty list")
        slopes, offsets = [], []
        for k, piece in enumerate(pieces):
            p = f"{path}.pieces[{k}]"
            slopes.append(_array(_get(piece, "a", p), 1, f"{p}.a"))
            offsets.append(_number(_get(piece, "b", p), f"{p}.b"))
        if len({s.size for s in slopes}) != 1:
            raise SpecParseError(f"{path}.pieces", "pieces have slopes of different lengths")
        return E.MaxAffine(np.array(slopes), np.array(offsets))
    raise SpecParseError(f"{path}.atom", f"unknown atom {kind!r}")


def _node_from_dict(node, d, path):
    op = _get(node, "op", path)
    try:
        if op == "const":
            return E.mk_const(_array(_get(node, "value", path), 2, f"{path}.value"), d)
        if op == "affine":
            V = _array(_get(node, "V", path), 3, f"{path}.V")
            A0 = node.get("A0")
            A0 = None if A0 is None else _array(A0, 2, f"{path}.A0")
            return E.mk_affine(list(V), A0)
        if op == "lift":
            atom = _atom_from_dict(_get(node, "atom", path), d, f"{path}.atom")
            if atom.input_dim != d:
                raise SpecParseError(f"{path}.atom", f"atom has input dimension {atom.input_dim}, expected {d}")
            return E.mk_lift(atom, _array(_get(node, "P", path), 2, f"{path}.P"))
        if op in ("sum", "blockdiag"):
            args = _args(node, path, 2)
            combine = E.mk_sum if op == "sum" else E.mk_block_diag
            out = _node_from_dict(args[0], d, f"{path}.args[0]")
            for k in range(1, len(args)):
                out = combine(out, _node_from_dict(args[k], d, f"{path}.args[{k}]"))
            return out
        if op == "scale":
            alpha = _number(_get(node, "alpha", path), f"{path}.alpha")
            return E.mk_scale(alpha, _node_from_dict(_get(node, "arg", path), d, f"{path}.arg"))
        if op in ("congruence", "hadamard"):
            M = _array(_get(node, "M", path), 2, f"{path}.M")
            arg = _node_from_dict(_get(node, "arg", path), d, f"{path}.arg")
            return (E.mk_congruence if op == "congruence" else E.mk_hadamard)(M, arg)
        if op == "precompose":
            A = _array(_get(node, "A", path), 2, f"{path}.A")
            if A.shape[1] != d:
                raise SpecParseError(f"{path}.A", f"A must have {d} columns, got {A.shape[1]}")
            b = node.get("b")
            b = None if b is None else _array(b, 1, f"{path}.b")
            inner = _node_from_dict(_get(node, "arg", path), A.shape[0], f"{path}.arg")
            return E.mk_precompose(inner, A, b)
        if op == "double":
            return E.mk_double(_node_from_dict(_get(node, "arg", path), d, f"{path}.arg"))
    except SpecParseError:
        raise
    except (MatSubdiffError, ValueError, TypeError) as exc:
        raise SpecParseError(path, str(exc)) from exc
    raise SpecParseError(f"{path}.op", f"unknown op {op!r}")


def from_spec(doc):
    """Build an expression from a parsed spec document."""
    version = _get(doc, "version", "$")
    if version != VERSION:
        raise SpecParseError("version", f"unsupported version {version!r} (expected {VERSION})")
    d = _integer(_get(doc, "d", "$"), "d")
    ell = _integer(_get(doc, "ell", "$"), "ell")
    if d < 1:
        raise SpecParseError("d", "input dimension must be at least 1")
    F = _node_from_dict(_get(doc, "root", "$"), d, "root")
    if F.input_dim != d:
        raise SpecParseError("d", f"declared d={d} but root has input dimension {F.input_dim}")
    if F.output_dim != ell:
        raise SpecParseError("ell", f"declared ell={ell} but root has output dimension {F.output_dim}")
    return F


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError("$", f"invalid JSON: {exc}") from None
    return from_spec(doc)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def candidate_from_json(doc):
    """Parse a subgradient candidate: ``{"V": [...]}`` or a bare list of matrices."""
    V = doc.get("V") if isinstance(doc, dict) else doc
    path = "V" if isinstance(doc, dict) else "$"
    if V is None:
        raise SpecParseError("$", "missing key 'V'")
    arr = _array(V, 3, path)
    try:
        return MatTuple([as_symmat(m) for m in arr])
    except (MatSubdiffError, ValueError) as exc:
        raise SpecParseError(path, str(exc)) from exc
