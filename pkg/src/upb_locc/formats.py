"""JSON file formats for state sets and protocol trees.

Both formats are canonical: fixed key order, floats written with ``repr``
(shortest text that round-trips), so ``dumps(loads(text)) == text``.
Complex numbers are ``[re, im]`` pairs. Operator matrices are dense row-major
lists unless written in the sparse form ``{"shape": [n, n], "entries":
[[i, j, re, im], ...]}``, which ``auto`` picks for matrices above 64 x 64.
"""

from __future__ import annotations

import json
from typing import Any, Literal

import numpy as np

from .families import ALICE_ID, BOB_ID, ProductState, TileSpec, UPBSet
from .locc import Copy, Leaf, Measure, Node, Resource
from .qla import LocalOperator, Party, StateVector, Subsystem, SystemLayout

STATES_FORMAT = "upb-states"
PROTOCOL_FORMAT = "upb-protocol"
VERSION = 1
DENSE_MAX = 64

MatrixFormat = Literal["auto", "dense", "sparse"]


class FormatError(ValueError):
    """Malformed or structurally inconsistent file contents."""


def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _z(pair: Any, where: str) -> complex:
    if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, (int, float)) for x in pair)):
        raise FormatError(f"{where}: expected [re, im], got {pair!r}")
    return complex(pair[0], pair[1])


def _require(obj: Any, keys: list[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise FormatError(f"{where}: missing {missing}")


def _dump(obj: Any, indent: int | None) -> str:
    seps = (",", ":") if indent is None else (",", ": ")
    return json.dumps(obj, indent=indent, separators=seps, ensure_ascii=False, allow_nan=False) + "\n"


def _load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from None


# ---- states ----------------------------------------------------------------


def _tile_obj(t: TileSpec) -> dict:
    return {"orientation": t.orientation, "fixed_index": t.fixed_index, "start": t.start, "length": t.length}


def states_to_obj(u: UPBSet) -> dict:
    return {
        "format": STATES_FORMAT,
        "version": VERSION,
        "family": u.family,
        "d": u.d,
        "states": [
            {
                "label": s.label,
                "alice": [_c(z) for z in s.alice.amplitudes],
                "bob": [_c(z) for z in s.bob.amplitudes],
                "tile": _tile_obj(s.tile),
            }
            for s in u.states
        ],
    }


def dumps_states(u: UPBSet) -> str:
    return _dump(states_to_obj(u), indent=1)


def states_from_obj(obj: Any) -> UPBSet:
    _require(obj, ["format", "version", "family", "d", "states"], "states file")
    if obj["format"] != STATES_FORMAT:
        raise FormatError(f"not a states file (format {obj['format']!r})")
    if obj["version"] != VERSION:
        raise FormatError(f"unsupported version {obj['version']!r}")
    d = obj["d"]
    if not isinstance(d, int) or d < 2:
        raise FormatError(f"bad dimension {d!r}")
    if not isinstance(obj["states"], list) or not obj["states"]:
        raise FormatError("states must be a nonempty list")
    states = []
    for k, s in enumerate(obj["states"]):
        where = f"states[{k}]"
        _require(s, ["label", "alice", "bob", "tile"], where)
        for side in ("alice", "bob"):
            if not isinstance(s[side], list) or len(s[side]) != d:
                raise FormatError(f"{where}.{side}: expected {d} coefficients")
        a = np.array([_z(p, f"{where}.alice") for p in s["alice"]])
        b = np.array([_z(p, f"{where}.bob") for p in s["bob"]])
        t = s["tile"]
        _require(t, ["orientation", "fixed_index", "start", "length"], f"{where}.tile")
        try:
            tile = TileSpec(t["orientation"], t["fixed_index"], t["start"], t["length"])
            tile.validate(d)
            states.append(
                ProductState(
                    str(s["label"]),
                    StateVector.single(ALICE_ID, a, Party.ALICE),
                    StateVector.single(BOB_ID, b, Party.BOB),
                    tile,
                )
            )
        except (TypeError, ValueError) as e:
            raise FormatError(f"{where}: {e}") from None
    try:
        return UPBSet(d, str(obj["family"]), tuple(states))
    except ValueError as e:
        raise FormatError(str(e)) from None


def loads_states(text: str) -> UPBSet:
    return states_from_obj(_load(text))


# ---- protocols -------------------------------------------------------------


def _matrix_obj(m: np.ndarray, fmt: MatrixFormat) -> Any:
    n = m.shape[0]
    if fmt == "dense" or (fmt == "auto" and n <= DENSE_MAX):
        return [[_c(z) for z in row] for row in m]
    ii, jj = np.nonzero(m)
    return {
        "shape": [n, n],
        "entries": [[int(i), int(j), float(m[i, j].real), float(m[i, j].imag)] for i, j in zip(ii, jj)],
    }


def _matrix_from(obj: Any, n: int, where: str) -> np.ndarray:
    if isinstance(obj, dict):
        _require(obj, ["shape", "entries"], where)
        if obj["shape"] != [n, n]:
            raise FormatError(f"{where}: shape {obj['shape']} != [{n}, {n}]")
        m = np.zeros((n, n), dtype=complex)
        for e in obj["entries"]:
            if not (isinstance(e, list) and len(e) == 4):
                raise FormatError(f"{where}: bad sparse entry {e!r}")
            i, j = e[0], e[1]
            if not (isinstance(i, int) and isinstance(j, int) and 0 <= i < n and 0 <= j < n):
                raise FormatError(f"{where}: entry index out of range in {e!r}")
            m[i, j] = complex(e[2], e[3])
        return m
    if not (isinstance(obj, list) and len(obj) == n and all(isinstance(r, list) and len(r) == n for r in obj)):
        raise FormatError(f"{where}: expected a {n}x{n} matrix")
    return np.array([[_z(p, where) for p in row] for row in obj])


def node_to_obj(p: Node, fmt: MatrixFormat = "auto") -> dict:
    if isinstance(p, Leaf):
        return {
            "type": "leaf",
            "kind": p.kind,
            "label": p.label,
            "party": p.party.value if p.party is not None else None,
        }
    return {
        "type": "measure",
        "party": p.party.value,
        "acts_on": list(p.acts_on),
        "names": list(p.names),
        "tag": p.tag,
        "operators": [_matrix_obj(op.matrix, fmt) for op in p.operators],
        "children": [node_to_obj(c, fmt) for c in p.children],
    }


def node_from_obj(obj: Any, layout: SystemLayout, where: str = "tree") -> Node:
    _require(obj, ["type"], where)
    if obj["type"] == "leaf":
        _require(obj, ["kind", "label", "party"], where)
        try:
            return Leaf(obj["kind"], obj["label"], obj["party"])
        except ValueError as e:
            raise FormatError(f"{where}: {e}") from None
    if obj["type"] != "measure":
        raise FormatError(f"{where}: unknown node type {obj['type']!r}")
    _require(obj, ["party", "acts_on", "names", "tag", "operators", "children"], where)
    try:
        party = Party.parse(obj["party"])
        acts_on = tuple(obj["acts_on"])
        dims = layout.dims_of(acts_on)
    except ValueError as e:
        raise FormatError(f"{where}: {e}") from None
    n = int(np.prod(dims))
    ops, children = obj["operators"], obj["children"]
    if not (isinstance(ops, list) and isinstance(children, list) and len(ops) == len(children) == len(obj["names"])):
        raise FormatError(f"{where}: operators, names and children must have equal length")
    mats = [LocalOperator(acts_on, dims, _matrix_from(m, n, f"{where}.operators[{k}]")) for k, m in enumerate(ops)]
    kids = [node_from_obj(c, layout, f"{where}.children[{k}]") for k, c in enumerate(children)]
    return Measure(party, acts_on, tuple(mats), tuple(kids), tuple(obj["names"]), str(obj["tag"]))


def protocol_to_obj(p: Node, r: Resource, layout: SystemLayout, fmt: MatrixFormat = "auto") -> dict:
    return {
        "format": PROTOCOL_FORMAT,
        "version": VERSION,
        "resource": [{"dim": c.dim, "alice": c.alice, "bob": c.bob} for c in r.copies],
        "layout": [{"id": s.id, "dim": s.dim, "owner": s.owner.value} for s in layout.subsystems],
        "tree": node_to_obj(p, fmt),
    }


def dumps_protocol(p: Node, r: Resource, layout: SystemLayout, fmt: MatrixFormat = "auto") -> str:
    return _dump(protocol_to_obj(p, r, layout, fmt), indent=None)


def protocol_from_obj(obj: Any) -> tuple[Node, Resource, SystemLayout]:
    _require(obj, ["format", "version", "resource", "layout", "tree"], "protocol file")
    if obj["format"] != PROTOCOL_FORMAT:
        raise FormatError(f"not a protocol file (format {obj['format']!r})")
    if obj["version"] != VERSION:
        raise FormatError(f"unsupported version {obj['version']!r}")
    try:
        r = Resource(tuple(Copy(c["dim"], c["alice"], c["bob"]) for c in obj["resource"]))
        layout = SystemLayout(tuple(Subsystem(s["id"], s["dim"], s["owner"]) for s in obj["layout"]))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad resource or layout: {e}") from None
    for c in r.copies:
        for sid, owner in ((c.alice, Party.ALICE), (c.bob, Party.BOB)):
            if sid not in layout.ids or layout.sub(sid).dim != c.dim or layout.sub(sid).owner is not owner:
                raise FormatError(f"resource copy {sid!r} (dim {c.dim}) disagrees with the layout")
    return node_from_obj(obj["tree"], layout), r, layout


def loads_protocol(text: str) -> tuple[Node, Resource, SystemLayout]:
    return protocol_from_obj(_load(text))


def canonical(text: str, kind: Literal["states", "protocol"]) -> str:
    """Re-serialize ``text``; identity on files this module wrote."""
    if kind == "states":
        return dumps_states(loads_states(text))
    obj = _load(text)
    p, r, layout = protocol_from_obj(obj)
    return dumps_protocol(p, r, layout, _matrix_format_of(obj["tree"]))


def _matrix_format_of(tree: dict) -> MatrixFormat:
    kinds = set()
    stack = [tree]
    while stack:
        n = stack.pop()
        if n.get("type") == "measure":
            kinds.update("sparse" if isinstance(m, dict) else "dense" for m in n["operators"])
            stack.extend(n["children"])
    if kinds == {"dense"}:
        return "dense"
    if kinds == {"sparse"}:
        return "sparse"
    return "auto"
