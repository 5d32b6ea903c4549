"""Decorated dual graphs of n-pointed curves of arithmetic genus one.

A :class:`CurveModel` records an isomorphism class of pointed curves by pure
combinatorics:

* *components* are vertices, each carrying the geometric genus (0 or 1) of
  its normalisation;
* *nodes* are unordered edges between components, with self-edges encoding a
  node whose two branches lie on one component and repeated edges encoding
  several nodes between the same pair;
* at most one *elliptic point* may be present: the unique Gorenstein
  singularity of genus one with ``l`` branches (cusp, tacnode, planar triple
  point, ...), stored as the list of components carrying its branches;
* *markings* are labelled smooth points.  Each marking sits in a *slot*, an
  opaque location id; markings sharing a slot are coincident points.  A
  marking carries an exact rational weight in ``(0, 1]``.

Positions on a curve never matter beyond coincidence and smoothness, so
slots are all the geometry kept.  Weights, degrees and all other numerics
are exact (``fractions.Fraction``); no floats appear anywhere.

The numerical shadow of the singularities is fixed throughout the package:
a node has delta invariant 1, an elliptic point with ``l`` branches has
``delta = l``, ``l`` branches and singularity genus ``delta - l + 1 = 1``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .canon import canonical_order
from .errors import MalformedModelError

ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


def parse_rational(text: Union[str, int]) -> Fraction:
    """Parse an exact rational written as ``"p"`` or ``"p/q"``."""
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise MalformedModelError(f"not an exact rational: {text!r}")
    return Fraction(text.strip())


def format_rational(value: Fraction) -> str:
    return str(value)


@dataclass(frozen=True)
class Component:
    """An irreducible component; ``genus`` is the genus of its normalisation."""

    id: str
    genus: int


@dataclass(frozen=True)
class EllipticPoint:
    """The elliptic l-fold point, one branch on each listed component."""

    branches: tuple[str, ...]

    @property
    def num_branches(self) -> int:
        return len(self.branches)

    def invariants(self) -> tuple[int, int, int]:
        """Return ``(branches, delta, genus)`` of the singularity."""
        l = len(self.branches)
        return (l, l, 1)


@dataclass(frozen=True)
class Marking:
    """A labelled marked point with an exact weight."""

    index: int
    component: str
    slot: str
    weight: Fraction = ONE


@dataclass(frozen=True)
class WeightVector:
    """Exact rational weights ``a_1..a_n``, each in ``(0, 1]``."""

    values: tuple[Fraction, ...]

    def __post_init__(self):
        for a in self.values:
            if not (0 < a <= 1):
                raise MalformedModelError(f"weight {a} outside (0, 1]")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    @classmethod
    def unit(cls, n: int) -> "WeightVector":
        return cls((ONE,) * n)

    @classmethod
    def parse(cls, items: Sequence[Union[str, int]]) -> "WeightVector":
        return cls(tuple(parse_rational(x) for x in items))


@dataclass(frozen=True)
class CurveModel:
    """Decorated dual graph of an n-pointed arithmetic-genus-one curve."""

    components: tuple[Component, ...]
    nodes: tuple[tuple[str, str], ...]
    elliptic: Optional[EllipticPoint]
    markings: tuple[Marking, ...]

    @property
    def n(self) -> int:
        return len(self.markings)

    def component_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.components)

    def component(self, cid: str) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise MalformedModelError(f"unknown component id: {cid!r}")

    def markings_on(self, cid: str) -> tuple[Marking, ...]:
        return tuple(mk for mk in self.markings if mk.component == cid)

    def slots_on(self, cid: str) -> tuple[str, ...]:
        seen: list[str] = []
        for mk in self.markings:
            if mk.component == cid and mk.slot not in seen:
                seen.append(mk.slot)
        return tuple(sorted(seen))


def curve(
    components: Iterable,
    nodes: Iterable = (),
    elliptic: Optional[Iterable[str]] = None,
    markings: Iterable = (),
) -> CurveModel:
    """Convenience builder normalising plain tuples into a :class:`CurveModel`.

    ``components`` items may be ``Component`` or ``(id, genus)``; ``markings``
    items may be ``Marking`` or ``(index, component, slot[, weight])`` with the
    weight given as a string, int or ``Fraction``.
    """
    comps = tuple(
        c if isinstance(c, Component) else Component(str(c[0]), int(c[1]))
        for c in components
    )
    edges = tuple(tuple(sorted((str(a), str(b)))) for a, b in nodes)
    ell = None
    if elliptic is not None:
        ell = EllipticPoint(tuple(str(b) for b in elliptic))
    mks = []
    for mk in markings:
        if isinstance(mk, Marking):
            mks.append(mk)
            continue
        index, comp, slot, *rest = mk
        w = rest[0] if rest else ONE
        if not isinstance(w, Fraction):
            w = parse_rational(w)
        mks.append(Marking(int(index), str(comp), str(slot), w))
    model = CurveModel(comps, edges, ell, tuple(mks))
    check_structure(model)
    return model


def check_structure(model: CurveModel) -> None:
    """Raise :class:`MalformedModelError` unless all ids resolve."""
    ids = [c.id for c in model.components]
    known = set(ids)
    if not ids:
        raise MalformedModelError("model has no components")
    if len(known) != len(ids):
        raise MalformedModelError("duplicate component ids")
    for a, b in model.nodes:
        if a not in known or b not in known:
            raise MalformedModelError(f"node ({a!r}, {b!r}) has unknown endpoint")
    if model.elliptic is not None:
        for b in model.elliptic.branches:
            if b not in known:
                raise MalformedModelError(f"elliptic branch on unknown component {b!r}")
    for mk in model.markings:
        if mk.component not in known:
            raise MalformedModelError(
                f"marking {mk.index} on unknown component {mk.component!r}"
            )


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


def arithmetic_genus(model: CurveModel) -> int:
    """Arithmetic genus from per-singularity delta invariants.

    ``p_a = sum(genus_i) + #nodes + l - #components + 1`` where ``l`` is the
    branch count of the elliptic point if present (its delta invariant).
    """
    check_structure(model)
    total = sum(c.genus for c in model.components)
    total += len(model.nodes)
    if model.elliptic is not None:
        total += model.elliptic.num_branches
    return total - len(model.components) + 1


def _adjacency(model: CurveModel) -> dict[str, list[str]]:
    adj: dict[str, list[str]] = {c.id: [] for c in model.components}
    for a, b in model.nodes:
        if a != b:
            adj[a].append(b)
            adj[b].append(a)
    return adj


def is_connected(model: CurveModel) -> bool:
    """Connectivity as a hypergraph: nodes plus the elliptic point."""
    ids = model.component_ids()
    if not ids:
        return False
    adj = _adjacency(model)
    if model.elliptic is not None and len(model.elliptic.branches) > 1:
        first = model.elliptic.branches[0]
        for other in model.elliptic.branches[1:]:
            adj[first].append(other)
            adj[other].append(first)
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        for u in adj[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(ids)


@dataclass(frozen=True)
class Violation:
    """One violated invariant, with the ids or indices involved."""

    code: str
    message: str
    where: tuple = ()

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "where": list(self.where)}


def validate(model: CurveModel) -> list[Violation]:
    """Check all model invariants; the report is empty iff the model is valid.

    Structural problems (ids that do not resolve) raise
    :class:`MalformedModelError` instead of being reported.
    """
    check_structure(model)
    report: list[Violation] = []

    for c in model.components:
        if c.genus not in (0, 1):
            report.append(
                Violation("component-genus", f"component {c.id} has genus {c.genus}, expected 0 or 1", (c.id,))
            )

    if model.elliptic is not None:
        branches = model.elliptic.branches
        if not branches:
            report.append(Violation("elliptic-empty", "elliptic point with no branches"))
        if len(set(branches)) != len(branches):
            report.append(
                Violation("elliptic-branches-distinct", "elliptic branches must lie on distinct components", tuple(branches))
            )
        for b in branches:
            comp = model.component(b)
            if comp.genus != 0:
                report.append(
                    Violation("elliptic-branch-genus", f"elliptic branch component {b} must have genus 0", (b,))
                )

    if not is_connected(model):
        report.append(Violation("connected", "model is not connected"))

    if not any(v.code == "component-genus" for v in report):
        pa = arithmetic_genus(model)
        if pa != 1:
            report.append(Violation("genus", f"arithmetic genus is {pa}, expected 1"))

    indices = sorted(mk.index for mk in model.markings)
    if indices != list(range(1, len(indices) + 1)):
        report.append(
            Violation("marking-indices", f"marking indices {indices} are not exactly 1..n", tuple(indices))
        )

    slot_comp: dict[str, str] = {}
    for mk in model.markings:
        prev = slot_comp.setdefault(mk.slot, mk.component)
        if prev != mk.component:
            report.append(
                Violation("slot-component", f"slot {mk.slot!r} used on components {prev} and {mk.component}", (mk.slot,))
            )

    for mk in model.markings:
        if not (0 < mk.weight <= 1):
            report.append(
                Violation("marking-weight", f"marking {mk.index} has weight {mk.weight} outside (0, 1]", (mk.index,))
            )

    return report


def is_valid(model: CurveModel) -> bool:
    return not validate(model)


# ---------------------------------------------------------------------------
# Distinguished points and dualizing degrees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DistinguishedPoints:
    """Distinguished points on the normalisation of one component."""

    component: str
    node_preimages: tuple[tuple[str, str], ...]  # one entry per preimage
    elliptic_branch: bool
    slots: tuple[str, ...]

    @property
    def count(self) -> int:
        return len(self.node_preimages) + int(self.elliptic_branch) + len(self.slots)

    def items(self) -> list[tuple]:
        out: list[tuple] = [("node", a, b) for a, b in self.node_preimages]
        if self.elliptic_branch:
            out.append(("elliptic",))
        out.extend(("slot", s) for s in self.slots)
        return out


def distinguished_points(model: CurveModel, cid: str) -> DistinguishedPoints:
    """Count distinguished points on the normalisation of component ``cid``.

    Node preimages are counted per branch, so a self-node contributes two;
    an elliptic branch contributes one; coincident markings contribute one
    per occupied slot.
    """
    model.component(cid)
    pre: list[tuple[str, str]] = []
    for a, b in model.nodes:
        if a == cid:
            pre.append((a, b))
        if b == cid:
            pre.append((a, b))
    ell = model.elliptic is not None and cid in model.elliptic.branches
    return DistinguishedPoints(cid, tuple(pre), ell, model.slots_on(cid))


def omega_degree(
    model: CurveModel, cid: str, weights: Optional[WeightVector] = None
) -> Fraction:
    """Degree of the twisted dualizing sheaf on one component.

    Computed on the normalisation: ``2g - 2`` plus one per node preimage,
    plus two per elliptic branch (the generator has double poles along the
    branches), plus the weight of every marking on the component.  When
    ``weights`` is given it overrides the stored marking weights (indexed by
    marking index); otherwise stored weights apply, defaulting to 1.
    """
    comp = model.component(cid)
    if weights is not None and len(weights) != model.n:
        raise MalformedModelError(
            f"weight vector has length {len(weights)}, expected {model.n}"
        )
    dp = distinguished_points(model, cid)
    deg = Fraction(2 * comp.genus - 2)
    deg += len(dp.node_preimages)
    deg += 2 * int(dp.elliptic_branch)
    for mk in model.markings_on(cid):
        deg += weights[mk.index - 1] if weights is not None else mk.weight
    return deg


def total_omega_degree(model: CurveModel, weights: Optional[WeightVector] = None) -> Fraction:
    return sum(
        (omega_degree(model, c.id, weights) for c in model.components), Fraction(0)
    )


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------


def _slot_groups(model: CurveModel) -> list[tuple[str, tuple[int, ...]]]:
    """Slots with their sorted marking indices, ordered by those indices."""
    groups: dict[str, list[int]] = {}
    for mk in model.markings:
        groups.setdefault(mk.slot, []).append(mk.index)
    out = [(slot, tuple(sorted(ix))) for slot, ix in groups.items()]
    out.sort(key=lambda t: t[1])
    return out


def _canonical_data(model: CurveModel):
    ids = model.component_ids()
    index = {cid: i for i, cid in enumerate(ids)}
    n = len(ids)

    self_loops = [0] * n
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for a, b in model.nodes:
        ia, ib = index[a], index[b]
        if ia == ib:
            self_loops[ia] += 1
        else:
            neighbors[ia].append(ib)
            neighbors[ib].append(ia)

    branch_set = set()
    if model.elliptic is not None:
        branch_set = {index[b] for b in model.elliptic.branches}
        # Branches all meet at one point; expose that adjacency to refinement.
        for i in branch_set:
            for j in branch_set:
                if i != j:
                    neighbors[i].append(j)

    slot_rank: dict[str, int] = {}
    slot_of_comp: list[list[tuple]] = [[] for _ in range(n)]
    groups = _slot_groups(model)
    for rank, (slot, ix) in enumerate(groups):
        slot_rank[slot] = rank
        comp = next(mk.component for mk in model.markings if mk.slot == slot)
        weights = tuple(
            sorted(
                (mk.weight.numerator, mk.weight.denominator)
                for mk in model.markings
                if mk.slot == slot
            )
        )
        slot_of_comp[index[comp]].append((ix, weights))

    init_keys = []
    for i, cid in enumerate(ids):
        init_keys.append(
            (
                model.components[i].genus,
                self_loops[i],
                i in branch_set,
                tuple(sorted(slot_of_comp[i])),
            )
        )

    def serialize(order: Sequence[int]) -> bytes:
        pos = {v: p for p, v in enumerate(order)}
        genera = tuple(model.components[v].genus for v in order)
        loops = tuple(self_loops[v] for v in order)
        edges = sorted(
            tuple(sorted((pos[index[a]], pos[index[b]])))
            for a, b in model.nodes
            if a != b
        )
        ell = tuple(sorted(pos[i] for i in branch_set)) if branch_set else None
        marks = tuple(
            (
                mk.index,
                pos[index[mk.component]],
                slot_rank[mk.slot],
                mk.weight.numerator,
                mk.weight.denominator,
            )
            for mk in sorted(model.markings, key=lambda m: m.index)
        )
        return repr((genera, loops, tuple(edges), ell, marks)).encode()

    return ids, index, init_keys, neighbors, serialize


def canonical_form(model: CurveModel) -> bytes:
    """Byte-comparable encoding; equal exactly for marked-isomorphic models.

    Isomorphisms preserve marking indices, genus, elliptic-branch incidence
    and the node multiset; component ids and slot ids are forgotten.
    """
    check_structure(model)
    ids, _, init_keys, neighbors, serialize = _canonical_data(model)
    form, _ = canonical_order(len(ids), init_keys, neighbors, serialize)
    return form


def canonicalize(model: CurveModel) -> CurveModel:
    """Relabel components and slots into canonical positions.

    The result is a representative whose serialised JSON is identical for
    isomorphic inputs: components are renamed ``c0, c1, ...`` in canonical
    order, slots ``s0, s1, ...`` by their sorted marking-index groups.
    """
    check_structure(model)
    ids, index, init_keys, neighbors, serialize = _canonical_data(model)
    _, order = canonical_order(len(ids), init_keys, neighbors, serialize)
    pos = {ids[v]: p for p, v in enumerate(order)}
    rename = {cid: f"c{p}" for cid, p in pos.items()}
    comps = tuple(
        Component(f"c{p}", model.components[order[p]].genus) for p in range(len(ids))
    )
    edges = sorted(
        tuple(sorted((rename[a], rename[b]), key=lambda s: int(s[1:])))
        for a, b in model.nodes
    )
    edges.sort(key=lambda e: (int(e[0][1:]), int(e[1][1:])))
    ell = None
    if model.elliptic is not None:
        ell = EllipticPoint(
            tuple(sorted((rename[b] for b in model.elliptic.branches), key=lambda s: int(s[1:])))
        )
    slot_names = {slot: f"s{i}" for i, (slot, _) in enumerate(_slot_groups(model))}
    marks = tuple(
        Marking(mk.index, rename[mk.component], slot_names[mk.slot], mk.weight)
        for mk in sorted(model.markings, key=lambda m: m.index)
    )
    return CurveModel(comps, tuple(edges), ell, marks)


def is_isomorphic(a: CurveModel, b: CurveModel) -> bool:
    """Marked isomorphism: equality of canonical forms."""
    return canonical_form(a) == canonical_form(b)
