"""Parsing and serialisation: the JSON model format and DOT diagrams.

The curve-model document is a single JSON object::

    {
      "components": [{"id": "a", "genus": 0}, ...],
      "nodes": [["a", "b"], ["a", "a"], ...],
      "elliptic": null | {"branches": ["a", "b", ...]},
      "markings": [{"index": 1, "component": "a", "slot": "p", "weight": "2/3"}, ...]
    }

Weights are exact rationals written as strings (``"1"``, ``"2/3"``); plain
JSON integers are accepted on input.  ``parse_model(serialize_model(x))``
returns a model equal to ``x``.  Id resolution is checked by ``validate``,
not here; parse errors carry the JSON path or text position.

A tail document is the same object with an extra ``attach`` array of
``{"component", "slot"}`` pairs and no markings.  A weights document is a
JSON array of rational strings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional, Sequence

from .decomposition import Decomposition
from .enumeration import SpecializationEdge, Stratum
from .errors import MalformedModelError, ParseError
from .model import (
    Component,
    CurveModel,
    EllipticPoint,
    Marking,
    WeightVector,
    format_rational,
    parse_rational,
)
from .tails import AttachMark, SemistableTail, semistable_tail


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc


def _expect(condition: bool, message: str, path: str) -> None:
    if not condition:
        raise ParseError(message, path)


def _model_from_obj(obj, path: str = "$") -> CurveModel:
    _expect(isinstance(obj, dict), "expected an object", path)
    for field in ("components", "nodes", "elliptic", "markings"):
        _expect(field in obj, f"missing field {field!r}", path)

    comps = []
    _expect(isinstance(obj["components"], list), "expected an array", f"{path}.components")
    for i, c in enumerate(obj["components"]):
        p = f"{path}.components[{i}]"
        _expect(isinstance(c, dict) and "id" in c and "genus" in c, "expected {id, genus}", p)
        _expect(isinstance(c["id"], str), "id must be a string", p)
        _expect(c["genus"] in (0, 1), "genus must be 0 or 1", p)
        comps.append(Component(c["id"], int(c["genus"])))

    nodes = []
    _expect(isinstance(obj["nodes"], list), "expected an array", f"{path}.nodes")
    for i, e in enumerate(obj["nodes"]):
        p = f"{path}.nodes[{i}]"
        _expect(
            isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e),
            "expected a 2-array of component ids",
            p,
        )
        nodes.append(tuple(sorted(e)))

    ell = None
    if obj["elliptic"] is not None:
        p = f"{path}.elliptic"
        _expect(
            isinstance(obj["elliptic"], dict) and "branches" in obj["elliptic"],
            "expected null or {branches: [...]}",
            p,
        )
        branches = obj["elliptic"]["branches"]
        _expect(
            isinstance(branches, list) and all(isinstance(x, str) for x in branches),
            "branches must be component ids",
            p,
        )
        ell = EllipticPoint(tuple(branches))

    marks = []
    seen_indices = set()
    _expect(isinstance(obj["markings"], list), "expected an array", f"{path}.markings")
    for i, mk in enumerate(obj["markings"]):
        p = f"{path}.markings[{i}]"
        _expect(
            isinstance(mk, dict)
            and all(k in mk for k in ("index", "component", "slot", "weight")),
            "expected {index, component, slot, weight}",
            p,
        )
        _expect(isinstance(mk["index"], int), "index must be an integer", p)
        _expect(mk["index"] not in seen_indices, f"duplicate marking index {mk['index']}", p)
        seen_indices.add(mk["index"])
        _expect(isinstance(mk["component"], str), "component must be a string", p)
        _expect(isinstance(mk["slot"], str), "slot must be a string", p)
        try:
            weight = parse_rational(mk["weight"])
        except MalformedModelError as exc:
            raise ParseError(str(exc), p) from exc
        marks.append(Marking(mk["index"], mk["component"], mk["slot"], weight))

    return CurveModel(tuple(comps), tuple(nodes), ell, tuple(marks))


def parse_model(text: str) -> CurveModel:
    return _model_from_obj(_load_json(text))


def model_to_obj(model: CurveModel) -> dict:
    return {
        "components": [{"id": c.id, "genus": c.genus} for c in model.components],
        "nodes": [list(e) for e in model.nodes],
        "elliptic": (
            None
            if model.elliptic is None
            else {"branches": list(model.elliptic.branches)}
        ),
        "markings": [
            {
                "index": mk.index,
                "component": mk.component,
                "slot": mk.slot,
                "weight": format_rational(mk.weight),
            }
            for mk in model.markings
        ],
    }


def serialize_model(model: CurveModel) -> str:
    return json.dumps(model_to_obj(model), indent=2) + "\n"


def parse_tail(text: str) -> SemistableTail:
    obj = _load_json(text)
    _expect(isinstance(obj, dict) and "attach" in obj, "missing field 'attach'", "$")
    attach_obj = obj["attach"]
    _expect(isinstance(attach_obj, list), "expected an array", "$.attach")
    marks = []
    for i, a in enumerate(attach_obj):
        p = f"$.attach[{i}]"
        _expect(
            isinstance(a, dict) and "component" in a and "slot" in a,
            "expected {component, slot}",
            p,
        )
        marks.append(AttachMark(str(a["component"]), str(a["slot"])))
    body = dict(obj)
    body.pop("attach")
    body.setdefault("markings", [])
    model = _model_from_obj(body)
    return semistable_tail(model, marks)


def tail_to_obj(tail: SemistableTail) -> dict:
    obj = model_to_obj(tail.curve)
    obj["attach"] = [
        {"component": a.component, "slot": a.slot} for a in tail.attach
    ]
    return obj


def parse_weights(text: str) -> WeightVector:
    obj = _load_json(text)
    _expect(isinstance(obj, list), "expected an array of rationals", "$")
    try:
        return WeightVector.parse(obj)
    except MalformedModelError as exc:
        raise ParseError(str(exc), "$") from exc


# ---------------------------------------------------------------------------
# DOT output
# ---------------------------------------------------------------------------


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(model: CurveModel, name: str = "curve") -> str:
    """Deterministic DOT rendering of one model.

    Genus-one components are filled, genus-zero hollow; the elliptic point
    appears as one small junction vertex joined to each branch; markings
    are listed in component labels.
    """
    lines = [f"graph {_quote(name)} {{"]
    lines.append("  node [shape=circle];")
    for c in model.components:
        marks = [
            f"p{mk.index}" for mk in sorted(model.markings, key=lambda m: m.index)
            if mk.component == c.id
        ]
        label = c.id + (f" [{','.join(marks)}]" if marks else "")
        style = "filled" if c.genus == 1 else "solid"
        lines.append(
            f"  {_quote(c.id)} [label={_quote(label)}, style={_quote(style)}];"
        )
    if model.elliptic is not None:
        l = model.elliptic.num_branches
        lines.append(
            f"  {_quote('@elliptic')} [label={_quote(f'e{l}')}, shape=point, width=0.15];"
        )
        for b in model.elliptic.branches:
            lines.append(f"  {_quote('@elliptic')} -- {_quote(b)};")
    for a, b in model.nodes:
        lines.append(f"  {_quote(a)} -- {_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _type_signature(model: CurveModel) -> str:
    """Compact human-readable label of a topological type."""
    genera = "".join(str(c.genus) for c in model.components)
    parts = [f"c{len(model.components)}", f"g{genera}", f"n{len(model.nodes)}"]
    if model.elliptic is not None:
        parts.append(f"e{model.elliptic.num_branches}")
    slot_sizes = {}
    for mk in model.markings:
        slot_sizes[mk.slot] = slot_sizes.get(mk.slot, 0) + 1
    if any(v > 1 for v in slot_sizes.values()):
        parts.append("coinc" + "-".join(str(v) for v in sorted(slot_sizes.values())))
    return ".".join(parts)


def emit_dot_poset(
    strata: Sequence[Stratum], edges: Sequence[SpecializationEdge]
) -> str:
    """Specialisation diagram: one vertex per stratum ranked by dimension."""
    index = {s.key: i for i, s in enumerate(strata)}
    lines = ['digraph "strata" {', "  rankdir=TB;"]
    by_dim: dict[int, list[int]] = {}
    for s in strata:
        by_dim.setdefault(s.dimension, []).append(index[s.key])
    for i, s in enumerate(strata):
        label = f"S{i} dim={s.dimension} {_type_signature(s.representative)}"
        lines.append(f"  S{i} [label={_quote(label)}, shape=box];")
    for dim in sorted(by_dim, reverse=True):
        members = " ".join(f"S{i};" for i in sorted(by_dim[dim]))
        lines.append(f"  {{ rank=same; {members} }}")
    for e in edges:
        lines.append(f"  S{index[e.source.key]} -> S{index[e.target.key]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def decomposition_to_obj(dec: Decomposition) -> dict:
    return {
        "z_components": sorted(dec.z_components),
        "z_kind": dec.z_kind,
        "attaching_count": dec.attaching_count,
        "trees": [
            {
                "components": sorted(t.components),
                "attaching_node": list(t.attaching_node),
            }
            for t in dec.trees
        ],
    }
