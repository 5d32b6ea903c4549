"""Combinatorial one-parameter degenerations of pointed genus-one curves.

A :class:`DegenerationModel` is the special fiber of a family over a disc
with regular total space, tracked purely combinatorially: the fiber curve
model, one regularity flag per node of the fiber (contracting a chain of
rational curves leaves a surface singularity at the resulting node, and
such nodes may not serve as attaching points of later contractions), and an
append-only history of frames for trace output.

Moves are pure: each returns a new model.  The two pipelines are

* :func:`stable_limit` -- alternate blowing up the marked points on the
  core with contracting the core, until the level exceeds ``m``; then
  stabilize.  The level never decreases along the way, with equality
  exactly when every component of the new core has two distinguished
  points, and the number of off-core components strictly drops, which is
  why the loop terminates.

* :func:`weighted_reduce` -- starting from a stable fiber, repeatedly
  contract a component on which the weighted dualizing degree fails to be
  positive.  Such a component is always a marked rational leaf (one node,
  no elliptic branch); contracting it merges its markings into one
  coincident slot on its neighbour and preserves the level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from . import decomposition, stability
from .errors import InternalInvariantError, PreconditionError
from .model import (
    Component,
    CurveModel,
    EllipticPoint,
    Marking,
    WeightVector,
    arithmetic_genus,
    distinguished_points,
    omega_degree,
    validate,
)


@dataclass(frozen=True)
class DegenerationModel:
    fiber: CurveModel
    node_regular: tuple[bool, ...]  # aligned with fiber.nodes
    history: tuple[tuple[str, CurveModel], ...]

    def frames(self) -> tuple[tuple[str, CurveModel], ...]:
        return self.history


def _fresh_ids(existing: Iterable[str], prefix: str, count: int) -> list[str]:
    taken = set(existing)
    out: list[str] = []
    i = 1
    while len(out) < count:
        cid = f"{prefix}{i}"
        if cid not in taken:
            taken.add(cid)
            out.append(cid)
        i += 1
    return out


def semistability_problems(fiber: CurveModel) -> list[str]:
    """Reasons why ``fiber`` is not an admissible initial semistable fiber."""
    problems = [v.message for v in validate(fiber)]
    if fiber.elliptic is not None:
        problems.append("fiber has an elliptic point; initial fibers are nodal")
    slots = [mk.slot for mk in fiber.markings]
    if len(set(slots)) != len(slots):
        problems.append("markings are not distinct")
    if not problems:
        for c in fiber.components:
            if c.genus == 0 and distinguished_points(fiber, c.id).count < 2:
                problems.append(
                    f"component {c.id} has fewer than two distinguished points"
                )
    return problems


def initial_model(fiber: CurveModel) -> DegenerationModel:
    """Wrap a semistable nodal fiber; the total space is regular everywhere."""
    problems = semistability_problems(fiber)
    if problems:
        raise PreconditionError("not a semistable fiber: " + "; ".join(problems))
    return DegenerationModel(
        fiber, (True,) * len(fiber.nodes), (("initial", fiber),)
    )


def from_stable_fiber(fiber: CurveModel) -> DegenerationModel:
    """Wrap an already-stable fiber, e.g. as input to weighted reduction."""
    problems = validate(fiber)
    if problems:
        raise PreconditionError(
            "not a valid fiber: " + "; ".join(v.message for v in problems)
        )
    return DegenerationModel(
        fiber, (True,) * len(fiber.nodes), (("initial", fiber),)
    )


def _step(
    model: DegenerationModel,
    label: str,
    fiber: CurveModel,
    node_regular: Sequence[bool],
) -> DegenerationModel:
    problems = validate(fiber)
    if problems:
        raise InternalInvariantError(
            f"move '{label}' produced an invalid fiber: "
            + "; ".join(v.message for v in problems)
        )
    if sorted(mk.index for mk in fiber.markings) != list(
        range(1, len(fiber.markings) + 1)
    ) or len(fiber.markings) != len(model.fiber.markings):
        raise InternalInvariantError(f"move '{label}' lost markings")
    return DegenerationModel(
        fiber, tuple(node_regular), model.history + ((label, fiber),)
    )


# ---------------------------------------------------------------------------
# Elementary moves
# ---------------------------------------------------------------------------


def blow_up_marking(model: DegenerationModel, index: int) -> DegenerationModel:
    """Blow up the marked point carrying marking ``index``.

    The marking must lie on the core.  All markings coincident with it move
    onto the new exceptional component, which is joined to the old one by a
    regular node.
    """
    fiber = model.fiber
    mk = next((m for m in fiber.markings if m.index == index), None)
    if mk is None:
        raise PreconditionError(f"no marking with index {index}")
    dec = decomposition.decompose(fiber)
    if mk.component not in dec.z_components:
        raise PreconditionError(
            f"marking {index} lies on {mk.component}, not on the core; only "
            "core markings are blown up"
        )
    (new_id,) = _fresh_ids(fiber.component_ids(), "x", 1)
    comps = fiber.components + (Component(new_id, 0),)
    nodes = fiber.nodes + (tuple(sorted((mk.component, new_id))),)
    flags = model.node_regular + (True,)
    marks = tuple(
        Marking(m.index, new_id, m.slot, m.weight) if m.slot == mk.slot else m
        for m in fiber.markings
    )
    return _step(
        model, f"blow-up marking {index}", CurveModel(comps, nodes, fiber.elliptic, marks), flags
    )


def contract_elliptic(model: DegenerationModel, subcurve: Iterable[str]) -> DegenerationModel:
    """Contract the core to an elliptic point.

    The subcurve must be exactly the current core, connected of arithmetic
    genus one, free of markings, attached to the rest of the fiber along
    regular nodes only.  The new singularity has one branch per attaching
    node; its delta invariant equals the branch count, so its genus is one
    and the result is again a valid genus-one fiber.
    """
    fiber = model.fiber
    sub = frozenset(str(c) for c in subcurve)
    reasons: list[str] = []
    known = set(fiber.component_ids())
    unknown = sorted(sub - known)
    if unknown:
        raise PreconditionError(f"unknown components in subcurve: {unknown}")
    if not sub:
        reasons.append("subcurve is empty")

    dec = decomposition.decompose(fiber)
    if sub and sub != dec.z_components:
        reasons.append(
            f"subcurve {sorted(sub)} is not the current core {sorted(dec.z_components)}"
        )
    marked = sorted({m.component for m in fiber.markings} & sub)
    if marked:
        reasons.append(f"subcurve carries markings on {marked}")
    if fiber.elliptic is not None and not set(fiber.elliptic.branches) <= sub:
        reasons.append("subcurve would split the existing elliptic point")

    attach: list[tuple[int, str]] = []  # (node position, outside component)
    for i, (a, b) in enumerate(fiber.nodes):
        ina, inb = a in sub, b in sub
        if ina and inb:
            continue
        if ina or inb:
            outside = b if ina else a
            attach.append((i, outside))
            if not model.node_regular[i]:
                reasons.append(
                    f"attaching node ({a}, {b}) is not a regular point of the total space"
                )
    if not attach:
        reasons.append("subcurve has no attaching nodes; cannot contract the whole fiber")
    outside_comps = [c for _, c in attach]
    if len(set(outside_comps)) != len(outside_comps):
        reasons.append("two attaching nodes share an outside component")
    if reasons:
        raise PreconditionError("cannot contract: " + "; ".join(reasons))

    attach_positions = {i for i, _ in attach}
    comps = tuple(c for c in fiber.components if c.id not in sub)
    nodes = []
    flags = []
    for i, (a, b) in enumerate(fiber.nodes):
        if a in sub or b in sub:
            continue
        nodes.append((a, b))
        flags.append(model.node_regular[i])
    elliptic = EllipticPoint(tuple(sorted(outside_comps)))
    new_fiber = CurveModel(comps, tuple(nodes), elliptic, fiber.markings)
    return _step(
        model,
        f"contract core to elliptic {len(outside_comps)}-fold point",
        new_fiber,
        flags,
    )


def insert_chain(model: DegenerationModel, node_index: int, length: int) -> DegenerationModel:
    """Replace one node by a chain of unmarked rational components.

    Models a base change of the family followed by resolving the resulting
    surface singularity; all new nodes are regular.
    """
    fiber = model.fiber
    if length < 1:
        raise PreconditionError("chain length must be at least 1")
    if not (0 <= node_index < len(fiber.nodes)):
        raise PreconditionError(f"no node with index {node_index}")
    a, b = fiber.nodes[node_index]
    links = _fresh_ids(fiber.component_ids(), "q", length)
    comps = fiber.components + tuple(Component(cid, 0) for cid in links)
    chain_nodes = []
    prev = a
    for cid in links:
        chain_nodes.append(tuple(sorted((prev, cid))))
        prev = cid
    chain_nodes.append(tuple(sorted((prev, b))))
    nodes = list(fiber.nodes)
    flags = list(model.node_regular)
    del nodes[node_index]
    del flags[node_index]
    nodes.extend(chain_nodes)
    flags.extend([True] * len(chain_nodes))
    return _step(
        model,
        f"insert chain of length {length} at node {node_index}",
        CurveModel(comps, tuple(nodes), fiber.elliptic, fiber.markings),
        flags,
    )


# ---------------------------------------------------------------------------
# Stabilisation
# ---------------------------------------------------------------------------


def _contract_candidates(fiber: CurveModel) -> list[str]:
    """Rational components meeting the rest of the fiber in two unmarked
    nodes or in one node plus one marked slot.  Elliptic branch components
    meet the rest at the elliptic point, not a node, so they never qualify;
    neither does a self-nodal component (its node is internal)."""
    branch = set(fiber.elliptic.branches) if fiber.elliptic is not None else set()
    out = []
    for c in fiber.components:
        if c.genus != 0 or c.id in branch:
            continue
        if any(a == b == c.id for a, b in fiber.nodes):
            continue
        ends = sum(
            1 for a, b in fiber.nodes if (a == c.id) != (b == c.id)
        )
        slots = len(fiber.slots_on(c.id))
        if (ends, slots) in ((2, 0), (1, 1)):
            out.append(c.id)
    return sorted(out)


def _contract_semistable(model: DegenerationModel, cid: str) -> DegenerationModel:
    """Contract one off-core rational component with two distinguished points."""
    fiber = model.fiber
    ends = [
        (i, b if a == cid else a)
        for i, (a, b) in enumerate(fiber.nodes)
        if (a == cid) != (b == cid)
    ]
    slots = fiber.slots_on(cid)
    comps = tuple(c for c in fiber.components if c.id != cid)
    if len(ends) == 2 and not slots:
        (i1, n1), (i2, n2) = ends
        nodes = []
        flags = []
        for i, (a, b) in enumerate(fiber.nodes):
            if i in (i1, i2):
                continue
            nodes.append((a, b))
            flags.append(model.node_regular[i])
        # The contracted chain leaves a surface singularity at the new node.
        nodes.append(tuple(sorted((n1, n2))))
        flags.append(False)
        label = f"contract unmarked link {cid}"
        marks = fiber.markings
    elif len(ends) == 1 and len(slots) == 1:
        (i1, parent) = ends[0]
        (slot_name,) = _fresh_ids(
            [mk.slot for mk in fiber.markings], "s", 1
        )
        marks = tuple(
            Marking(m.index, parent, slot_name, m.weight)
            if m.component == cid
            else m
            for m in fiber.markings
        )
        nodes = []
        flags = []
        for i, (a, b) in enumerate(fiber.nodes):
            if i == i1:
                continue
            nodes.append((a, b))
            flags.append(model.node_regular[i])
        label = f"contract marked leaf {cid} onto {parent}"
    else:
        raise InternalInvariantError(
            f"component {cid} is not a contractible two-distinguished component"
        )
    return _step(
        model, label, CurveModel(comps, tuple(nodes), fiber.elliptic, marks), flags
    )


def stabilize(model: DegenerationModel, *, _order=None) -> DegenerationModel:
    """Contract off-core rational components with two distinguished points
    until none remain: unmarked links become direct nodes, marked leaf
    chains collapse to marked slots.  The outcome is order independent;
    ``_order`` reorders candidate choice and exists for the tests.
    """
    result = model
    squashed = 0
    while True:
        candidates = _contract_candidates(result.fiber)
        if not candidates:
            break
        if _order is not None:
            candidates = _order(candidates)
        result = _contract_semistable(result, candidates[0])
        squashed += 1
        if squashed > 10 * len(model.fiber.components) + 10:
            raise InternalInvariantError("stabilisation failed to terminate")
    return result


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------


def stable_limit(model: DegenerationModel, m: int) -> DegenerationModel:
    """Produce the stable fiber for the given ``m`` from a semistable one."""
    fiber = model.fiber
    problems = semistability_problems(fiber)
    if problems:
        raise PreconditionError("not a semistable fiber: " + "; ".join(problems))
    n = fiber.n
    if not (1 <= m < n):
        raise PreconditionError(f"need 1 <= m < n, got m={m}, n={n}")

    result = model
    while True:
        dec = decomposition.decompose(result.fiber)
        lv = decomposition.level(result.fiber)
        if lv > m:
            break
        off_before = len(result.fiber.components) - len(dec.z_components)

        core_marks = sorted(
            {
                min(mk.index for mk in result.fiber.markings if mk.slot == slot)
                for slot in {
                    mk.slot
                    for mk in result.fiber.markings
                    if mk.component in dec.z_components
                }
            }
        )
        for index in core_marks:
            result = blow_up_marking(result, index)
        new_core = decomposition.decompose(result.fiber).z_components
        if new_core != dec.z_components:
            raise InternalInvariantError("blow-ups moved the core")
        result = contract_elliptic(result, new_core)

        after = result.fiber
        dec_after = decomposition.decompose(after)
        lv_after = decomposition.level(after)
        if lv_after < lv:
            raise InternalInvariantError(
                f"level dropped from {lv} to {lv_after} during the limit"
            )
        all_two = all(
            distinguished_points(after, cid).count == 2
            for cid in sorted(dec_after.z_components)
        )
        if (lv_after == lv) != all_two:
            raise InternalInvariantError(
                "level stayed equal without every new core component having "
                "exactly two distinguished points (or vice versa)"
            )
        off_after = len(after.components) - len(dec_after.z_components)
        if off_after >= off_before:
            raise InternalInvariantError("off-core component count did not drop")
        if arithmetic_genus(after) != 1:
            raise InternalInvariantError("arithmetic genus left 1 during the limit")

    result = stabilize(result)
    report = stability.is_m_stable(result.fiber, m)
    if not report.stable:
        raise InternalInvariantError(
            "limit fiber failed the stability check: "
            + "; ".join(f.message for f in report.failures)
        )
    return result


def weighted_reduce(
    model: DegenerationModel, m: int, weights: WeightVector
) -> DegenerationModel:
    """Turn a stable fiber into the weighted-stable one for ``weights``.

    Repeatedly contracts a component of non-positive weighted dualizing
    degree (necessarily a rational leaf: one node, no elliptic branch,
    genus zero) to a smooth point of its neighbour, merging its markings
    into one coincident slot there.  The level is unchanged at every step.
    """
    fiber = model.fiber
    report = stability.is_m_stable(fiber, m)
    if not report.stable:
        raise PreconditionError(
            "weighted reduction starts from a stable fiber; failures: "
            + "; ".join(f.message for f in report.failures)
        )
    if len(weights) != fiber.n:
        raise PreconditionError(
            f"weight vector has length {len(weights)}, expected {fiber.n}"
        )

    result = model
    while True:
        fiber = result.fiber
        nonpositive = sorted(
            c.id for c in fiber.components if omega_degree(fiber, c.id, weights) <= 0
        )
        if not nonpositive:
            break
        cid = nonpositive[0]
        comp = fiber.component(cid)
        ends = [
            (i, b if a == cid else a)
            for i, (a, b) in enumerate(fiber.nodes)
            if (a == cid) != (b == cid)
        ]
        is_branch = fiber.elliptic is not None and cid in fiber.elliptic.branches
        if comp.genus != 0 or is_branch or len(ends) != 1 or any(
            a == b == cid for a, b in fiber.nodes
        ):
            raise InternalInvariantError(
                f"component {cid} has non-positive weighted degree but is not "
                "a rational leaf; this contradicts the component classification"
            )
        lv_before = decomposition.level(fiber)
        (i1, parent) = ends[0]
        (slot_name,) = _fresh_ids([mk.slot for mk in fiber.markings], "s", 1)
        marks = tuple(
            Marking(mk.index, parent, slot_name, mk.weight)
            if mk.component == cid
            else mk
            for mk in fiber.markings
        )
        comps = tuple(c for c in fiber.components if c.id != cid)
        nodes = []
        flags = []
        for i, (a, b) in enumerate(fiber.nodes):
            if i == i1:
                continue
            nodes.append((a, b))
            flags.append(result.node_regular[i])
        result = _step(
            result,
            f"reduce: contract leaf {cid} onto {parent}",
            CurveModel(comps, tuple(nodes), fiber.elliptic, marks),
            flags,
        )
        if decomposition.level(result.fiber) != lv_before:
            raise InternalInvariantError("weighted reduction changed the level")

    final = stability.is_mA_stable(result.fiber, m, weights)
    if not final.stable:
        raise InternalInvariantError(
            "weighted reduction ended unstable: "
            + "; ".join(f.message for f in final.failures)
        )
    return result
