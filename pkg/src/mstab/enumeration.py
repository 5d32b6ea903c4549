"""Enumeration of equisingular strata and their specialisation poset.

Strata are topological types of stable pointed models, one canonical
representative each.  Generation is constructive: pick a core shape (smooth
elliptic, irreducible nodal, ring, or elliptic star), graft rational trees,
then distribute marking slots; stability prunes the rest.  Every stable
model has at most as many components as occupied slots (each ring, star or
tree component must absorb either an attachment or a slot to reach its
distinguished-point minimum), so the search is finite and small; see the
README for the counting argument.  A second, generation-independent
strategy lives in the test suite and must agree with this one.

Specialisation between strata is certified by *witnesses*: a semistable
fiber ``S`` witnesses ``source -> target`` when smoothing some subset of
its nodes (contracting them in the dual graph) recovers ``source`` with
markings matched, while the stable limit of ``S`` is ``target``.  The edge
set is sound but deliberately not claimed complete: the search is bounded,
so the poset is labelled witness-certified.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from . import decomposition, degeneration, stability
from .canon import canonical_order
from .errors import BoundExceededError, PreconditionError
from .model import (
    Component,
    CurveModel,
    EllipticPoint,
    Marking,
    WeightVector,
    canonical_form,
    canonicalize,
    validate,
)

DEFAULT_N_BOUND = 6


@dataclass(frozen=True)
class Stratum:
    representative: CurveModel  # canonical form, components c0.., slots s0..
    dimension: int
    key: bytes


@dataclass(frozen=True)
class SpecializationEdge:
    source: Stratum  # more generic
    target: Stratum  # more special
    witness: degeneration.DegenerationModel


# ---------------------------------------------------------------------------
# Shapes: unmarked cores with grafted trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Shape:
    components: tuple[Component, ...]
    nodes: tuple[tuple[str, str], ...]
    elliptic: Optional[EllipticPoint]
    core: frozenset[str]


def _cores(max_ring: int, max_star: int) -> Iterator[_Shape]:
    yield _Shape((Component("z1", 1),), (), None, frozenset({"z1"}))
    yield _Shape((Component("z1", 0),), (("z1", "z1"),), None, frozenset({"z1"}))
    for r in range(2, max_ring + 1):
        ids = [f"z{i}" for i in range(1, r + 1)]
        comps = tuple(Component(c, 0) for c in ids)
        edges = tuple(
            tuple(sorted((ids[i], ids[(i + 1) % r]))) for i in range(r)
        )
        yield _Shape(comps, edges, None, frozenset(ids))
    for l in range(1, max_star + 1):
        ids = [f"z{i}" for i in range(1, l + 1)]
        comps = tuple(Component(c, 0) for c in ids)
        yield _Shape(comps, (), EllipticPoint(tuple(ids)), frozenset(ids))


def _shape_key(shape: _Shape) -> bytes:
    ids = [c.id for c in shape.components]
    index = {cid: i for i, cid in enumerate(ids)}
    n = len(ids)
    loops = [0] * n
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for a, b in shape.nodes:
        if a == b:
            loops[index[a]] += 1
        else:
            neighbors[index[a]].append(index[b])
            neighbors[index[b]].append(index[a])
    branch = set()
    if shape.elliptic is not None:
        branch = {index[b] for b in shape.elliptic.branches}
        for i in branch:
            for j in branch:
                if i != j:
                    neighbors[i].append(j)
    keys = [
        (shape.components[i].genus, loops[i], i in branch) for i in range(n)
    ]

    def serialize(order: Sequence[int]) -> bytes:
        pos = {v: p for p, v in enumerate(order)}
        genera = tuple(shape.components[v].genus for v in order)
        lps = tuple(loops[v] for v in order)
        edges = sorted(
            tuple(sorted((pos[index[a]], pos[index[b]])))
            for a, b in shape.nodes
            if a != b
        )
        ell = tuple(sorted(pos[i] for i in branch)) if branch else None
        return repr((genera, lps, tuple(edges), ell)).encode()

    form, _ = canonical_order(n, keys, neighbors, serialize)
    return form


def _graft(shape: _Shape, extra: int) -> Iterator[_Shape]:
    """All ways of hanging ``extra`` rational tree components off a shape."""
    if extra == 0:
        yield shape
        return
    base_ids = [c.id for c in shape.components]
    new_ids = [f"t{i}" for i in range(1, extra + 1)]
    for parents in itertools.product(
        *(base_ids + new_ids[:i] for i in range(extra))
    ):
        comps = shape.components + tuple(Component(t, 0) for t in new_ids)
        edges = shape.nodes + tuple(
            tuple(sorted((parents[i], new_ids[i]))) for i in range(extra)
        )
        yield _Shape(comps, edges, shape.elliptic, shape.core)


def _min_slots(shape: _Shape, required: dict[str, int]) -> dict[str, int]:
    """Distinct slots each component still needs to reach its minimum."""
    need: dict[str, int] = {}
    degree: dict[str, int] = {c.id: 0 for c in shape.components}
    for a, b in shape.nodes:
        degree[a] += 1
        degree[b] += 1
    branch = set(shape.elliptic.branches) if shape.elliptic else set()
    for c in shape.components:
        base = degree[c.id] + (1 if c.id in branch else 0)
        need[c.id] = max(0, required[c.id] - base)
    return need


def _shapes(n: int, m: int, *, stable: bool, c_max: int) -> list[_Shape]:
    """Deduplicated unmarked shapes whose slot needs fit ``n`` slots."""
    out: list[_Shape] = []
    seen: set[bytes] = set()
    max_ring = c_max
    max_star = m if stable else 0
    for core in _cores(max_ring, max_star):
        if core.elliptic is not None and not stable:
            continue
        room = c_max - len(core.components)
        if room < 0:
            continue
        for extra in range(room + 1):
            for shape in _graft(core, extra):
                required = {}
                branch = set(shape.elliptic.branches) if shape.elliptic else set()
                for c in shape.components:
                    if c.genus == 1:
                        required[c.id] = 1 if stable else 0
                    elif not stable or c.id in branch:
                        required[c.id] = 2
                    else:
                        required[c.id] = 3
                need = _min_slots(shape, required)
                if sum(need.values()) > n:
                    continue
                key = _shape_key(shape)
                if key in seen:
                    continue
                seen.add(key)
                out.append(shape)
    return out


# ---------------------------------------------------------------------------
# Marking placement
# ---------------------------------------------------------------------------


def _weight_partitions(n: int, weights: WeightVector) -> list[tuple[tuple[int, ...], ...]]:
    """Set partitions of 1..n into coincidence blocks of total weight <= 1."""
    partitions: list[tuple[tuple[int, ...], ...]] = []

    def rec(i: int, blocks: list[list[int]]) -> None:
        if i > n:
            partitions.append(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            if sum((weights[j - 1] for j in b), weights[i - 1]) <= 1:
                b.append(i)
                rec(i + 1, blocks)
                b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(1, [])
    return partitions


def _placements(
    comp_ids: Sequence[str], need: dict[str, int], blocks: int
) -> Iterator[tuple[str, ...]]:
    """Assign each block (in order) a component, covering all slot needs."""
    total_need = sum(need.values())
    if total_need > blocks:
        return

    assignment: list[str] = []
    remaining: dict[str, int] = dict(need)

    def rec(i: int, deficit: int) -> Iterator[tuple[str, ...]]:
        if i == blocks:
            if deficit == 0:
                yield tuple(assignment)
            return
        if deficit > blocks - i:
            return
        for cid in comp_ids:
            drop = 1 if remaining[cid] > 0 else 0
            remaining[cid] -= drop
            assignment.append(cid)
            yield from rec(i + 1, deficit - drop)
            assignment.pop()
            remaining[cid] += drop

    yield from rec(0, total_need)


def _assemble(
    shape: _Shape,
    partition: Sequence[tuple[int, ...]],
    placement: Sequence[str],
    weights: WeightVector,
) -> CurveModel:
    marks: list[Marking] = []
    for slot_no, (block, cid) in enumerate(zip(partition, placement)):
        for index in block:
            marks.append(Marking(index, cid, f"s{slot_no}", weights[index - 1]))
    marks.sort(key=lambda mk: mk.index)
    return CurveModel(shape.components, shape.nodes, shape.elliptic, tuple(marks))


def _stable_models(n: int, m: int, weights: WeightVector) -> Iterator[CurveModel]:
    partitions = _weight_partitions(n, weights)
    # Stable models never need more components than occupied slots; the
    # sharpest partition has n blocks.
    for shape in _shapes(n, m, stable=True, c_max=n):
        required = {}
        branch = set(shape.elliptic.branches) if shape.elliptic else set()
        for c in shape.components:
            if c.genus == 1:
                required[c.id] = 1
            elif c.id in branch:
                required[c.id] = 2
            else:
                required[c.id] = 3
        need = _min_slots(shape, required)
        ids = [c.id for c in shape.components]
        for partition in partitions:
            for placement in _placements(ids, need, len(partition)):
                model = _assemble(shape, partition, placement, weights)
                report = stability.is_mA_stable(model, m, weights)
                if report.stable:
                    yield model


def enumerate_strata(
    n: int,
    m: int,
    weights: Optional[WeightVector] = None,
    *,
    bound: int = DEFAULT_N_BOUND,
) -> list[Stratum]:
    """All equisingular strata of stable ``n``-pointed models, sorted by
    decreasing dimension then canonical encoding."""
    if n > bound:
        raise BoundExceededError(f"n={n} exceeds the configured bound {bound}")
    if not (1 <= m < n):
        raise PreconditionError(f"need 1 <= m < n, got m={m}, n={n}")
    if weights is None:
        weights = WeightVector.unit(n)
    if len(weights) != n:
        raise PreconditionError(f"weight vector has length {len(weights)}, expected {n}")

    found: dict[bytes, Stratum] = {}
    for model in _stable_models(n, m, weights):
        key = canonical_form(model)
        if key not in found:
            found[key] = Stratum(
                canonicalize(model), stability.stratum_dimension(model), key
            )
    strata = sorted(found.values(), key=lambda s: (-s.dimension, s.key))
    return strata


# ---------------------------------------------------------------------------
# Witness search for specialisation
# ---------------------------------------------------------------------------


def _contract_nodes(fiber: CurveModel, subset: Sequence[int]) -> CurveModel:
    """Smooth the chosen nodes: merge their endpoints, adding genus for every
    independent cycle collapsed; remaining nodes and markings ride along."""
    parent: dict[str, str] = {c.id: c.id for c in fiber.components}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = set(subset)
    for i in chosen:
        a, b = fiber.nodes[i]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    members: dict[str, list[str]] = {}
    for c in fiber.components:
        members.setdefault(find(c.id), []).append(c.id)
    internal: dict[str, int] = {rep: 0 for rep in members}
    for i in chosen:
        a, _ = fiber.nodes[i]
        internal[find(a)] += 1

    comps = []
    for rep in sorted(members):
        genus = sum(fiber.component(cid).genus for cid in members[rep])
        genus += internal[rep] - (len(members[rep]) - 1)
        comps.append(Component(rep, genus))
    nodes = tuple(
        tuple(sorted((find(a), find(b))))
        for i, (a, b) in enumerate(fiber.nodes)
        if i not in chosen
    )
    marks = tuple(
        Marking(mk.index, find(mk.component), mk.slot, mk.weight)
        for mk in fiber.markings
    )
    return CurveModel(tuple(comps), nodes, None, marks)


def _semistable_models(
    n: int, c_max: int, weights: WeightVector
) -> Iterator[CurveModel]:
    """Semistable nodal fibers with distinct markings, up to ``c_max``
    components, deduplicated up to isomorphism."""
    partition = tuple((i,) for i in range(1, n + 1))
    seen: set[bytes] = set()
    for shape in _shapes(n, 0, stable=False, c_max=c_max):
        required = {
            c.id: (0 if c.genus == 1 else 2) for c in shape.components
        }
        need = _min_slots(shape, required)
        ids = [c.id for c in shape.components]
        for placement in _placements(ids, need, n):
            model = _assemble(shape, partition, placement, weights)
            if degeneration.semistability_problems(model):
                continue
            key = canonical_form(model)
            if key in seen:
                continue
            seen.add(key)
            yield model


def _quick_stable_screen(model: CurveModel) -> bool:
    """Cheap necessary conditions for being some stratum representative."""
    from .model import distinguished_points

    for c in model.components:
        if c.genus == 0 and distinguished_points(model, c.id).count < 3:
            return False
    return True


@dataclass(frozen=True)
class _WitnessRecord:
    witness: degeneration.DegenerationModel
    limit_key: bytes
    generic_keys: frozenset[bytes]


def _witness_scan(
    n: int, m: int, weights: WeightVector, c_max: int
) -> Iterator[_WitnessRecord]:
    unit = all(a == 1 for a in weights.values)
    for fiber in _semistable_models(n, c_max, weights):
        start = degeneration.initial_model(fiber)
        limited = degeneration.stable_limit(start, m)
        if not unit:
            limited = degeneration.weighted_reduce(limited, m, weights)
        limit_key = canonical_form(limited.fiber)
        generic: set[bytes] = set()
        seen_signatures: set[tuple] = set()
        for size in range(len(fiber.nodes) + 1):
            for subset in itertools.combinations(range(len(fiber.nodes)), size):
                contracted = _contract_nodes(fiber, subset)
                signature = (
                    tuple(sorted((c.id, c.genus) for c in contracted.components)),
                    tuple(sorted(contracted.nodes)),
                    tuple(sorted((mk.index, mk.component) for mk in contracted.markings)),
                )
                if signature in seen_signatures:
                    continue
                seen_signatures.add(signature)
                if not _quick_stable_screen(contracted):
                    continue
                generic.add(canonical_form(contracted))
        yield _WitnessRecord(start, limit_key, frozenset(generic))


def specializes(
    source: Stratum,
    target: Stratum,
    m: int,
    search_bound: int,
    weights: Optional[WeightVector] = None,
) -> Optional[degeneration.DegenerationModel]:
    """Search for a witness that ``source`` degenerates to ``target``.

    Returns a semistable degeneration model or ``None``.  A miss is not a
    proof of absence: the search only covers witnesses with up to
    ``search_bound`` components.
    """
    if source.dimension <= target.dimension:
        return None
    n = source.representative.n
    if weights is None:
        weights = WeightVector(
            tuple(mk.weight for mk in source.representative.markings)
        )
    for record in _witness_scan(n, m, weights, search_bound):
        if record.limit_key == target.key and source.key in record.generic_keys:
            return record.witness
    return None


def build_poset(
    strata: Sequence[Stratum],
    m: int,
    search_bound: Optional[int] = None,
    weights: Optional[WeightVector] = None,
) -> list[SpecializationEdge]:
    """All witness-certified specialisation edges, transitively reduced."""
    if not strata:
        return []
    n = strata[0].representative.n
    if search_bound is None:
        search_bound = n + 2
    if weights is None:
        weights = WeightVector(
            tuple(mk.weight for mk in strata[0].representative.markings)
        )
    by_key = {s.key: s for s in strata}
    position = {s.key: i for i, s in enumerate(strata)}

    edges: dict[tuple[bytes, bytes], degeneration.DegenerationModel] = {}
    for record in _witness_scan(n, m, weights, search_bound):
        target = by_key.get(record.limit_key)
        if target is None:
            continue
        for generic_key in record.generic_keys:
            source = by_key.get(generic_key)
            if source is None or source.dimension <= target.dimension:
                continue
            edges.setdefault((source.key, target.key), record.witness)

    # Transitive reduction over the certified edge set.
    succ: dict[bytes, set[bytes]] = {s.key: set() for s in strata}
    for (u, v) in edges:
        succ[u].add(v)

    def reachable(u: bytes, v: bytes, skip_direct: bool) -> bool:
        stack = [
            w for w in succ[u] if not (skip_direct and w == v)
        ]
        seen: set[bytes] = set(stack)
        while stack:
            w = stack.pop()
            if w == v:
                return True
            for x in succ[w]:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        return False

    reduced = [
        SpecializationEdge(by_key[u], by_key[v], w)
        for (u, v), w in edges.items()
        if not reachable(u, v, skip_direct=True)
    ]
    reduced.sort(key=lambda e: (position[e.source.key], position[e.target.key]))
    return reduced
