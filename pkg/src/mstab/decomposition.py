"""Fundamental decomposition of a genus-one curve model.

Every valid model splits uniquely as a *core* (the minimal elliptic
subcurve: the unique connected arithmetic-genus-one subcurve without
disconnecting nodes) together with rational trees, each meeting the core in
exactly one node.  The core comes in exactly four shapes:

* ``smooth-elliptic``   -- a single genus-one component,
* ``irreducible-nodal`` -- a genus-zero component with a self-node,
* ``ring``              -- a cycle of genus-zero components,
* ``elliptic-star``     -- the branch components of the elliptic point.

The *level* of a model is the number of tree-attachment nodes on the core
plus the number of distinct occupied marking slots on core components.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InternalInvariantError, MalformedModelError, PreconditionError
from .model import CurveModel, distinguished_points

SMOOTH_ELLIPTIC = "smooth-elliptic"
IRREDUCIBLE_NODAL = "irreducible-nodal"
RING = "ring"
ELLIPTIC_STAR = "elliptic-star"


@dataclass(frozen=True)
class Tree:
    """A rational tree hanging off the core at one node."""

    components: frozenset[str]
    attaching_node: tuple[str, str]  # (core component, tree root component)


@dataclass(frozen=True)
class Decomposition:
    z_components: frozenset[str]
    z_kind: str
    trees: tuple[Tree, ...]

    @property
    def attaching_count(self) -> int:
        return len(self.trees)

    def all_tree_components(self) -> frozenset[str]:
        out: set[str] = set()
        for t in self.trees:
            out |= t.components
        return frozenset(out)


def _find_cycle(model: CurveModel) -> list[str] | None:
    """Components of the unique cycle of the node multigraph, if any."""
    for a, b in model.nodes:
        if a == b:
            return [a]
    pair_counts: dict[tuple[str, str], int] = {}
    for a, b in model.nodes:
        pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1
    for (a, b), k in sorted(pair_counts.items()):
        if k >= 2:
            return [a, b]
    # Simple cycle search: DFS remembering the edge used to enter a vertex.
    adj: dict[str, list[tuple[str, int]]] = {c.id: [] for c in model.components}
    for i, (a, b) in enumerate(model.nodes):
        adj[a].append((b, i))
        adj[b].append((a, i))
    seen: dict[str, tuple[str | None, int | None]] = {}
    for start in sorted(adj):
        if start in seen:
            continue
        seen[start] = (None, None)
        stack = [start]
        while stack:
            v = stack.pop()
            for u, edge in sorted(adj[v]):
                if u not in seen:
                    seen[u] = (v, edge)
                    stack.append(u)
                elif seen[v][1] != edge:
                    # Found a cycle: walk both endpoints up to their root.
                    def path_to_root(x: str) -> list[str]:
                        out = [x]
                        while seen[out[-1]][0] is not None:
                            out.append(seen[out[-1]][0])
                        return out
                    pv, pu = path_to_root(v), path_to_root(u)
                    common = set(pv) & set(pu)
                    cycle = []
                    for x in pv:
                        cycle.append(x)
                        if x in common:
                            break
                    meet = cycle[-1]
                    tail = []
                    for x in pu:
                        if x == meet:
                            break
                        tail.append(x)
                    return cycle + tail[::-1]
    return None


def decompose(model: CurveModel) -> Decomposition:
    """Fundamental decomposition of a valid model.

    Deterministic: the core is the elliptic point's branch components if an
    elliptic point exists, else the unique cycle of the node multigraph,
    else the unique genus-one component.
    """
    if model.elliptic is not None:
        z = set(model.elliptic.branches)
        kind = ELLIPTIC_STAR
    else:
        cycle = _find_cycle(model)
        if cycle is not None:
            z = set(cycle)
            kind = IRREDUCIBLE_NODAL if len(cycle) == 1 and any(
                a == b for a, b in model.nodes
            ) else RING
        else:
            genus_one = [c.id for c in model.components if c.genus == 1]
            if len(genus_one) != 1:
                raise PreconditionError(
                    "no core found: model has no elliptic point, no cycle and "
                    f"{len(genus_one)} genus-one components"
                )
            z = {genus_one[0]}
            kind = SMOOTH_ELLIPTIC

    outside = [c.id for c in model.components if c.id not in z]
    adj: dict[str, list[str]] = {cid: [] for cid in outside}
    attach: dict[str, list[tuple[str, str]]] = {cid: [] for cid in outside}
    for a, b in model.nodes:
        if a in z and b in z:
            continue
        if a in z:
            attach[b].append((a, b))
        elif b in z:
            attach[a].append((b, a))
        elif a != b:
            adj[a].append(b)
            adj[b].append(a)
        else:
            raise PreconditionError(f"self-node on component {a} outside the core")

    seen: set[str] = set()
    trees: list[Tree] = []
    for start in sorted(outside):
        if start in seen:
            continue
        comps = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in comps:
                    comps.add(u)
                    stack.append(u)
        seen |= comps
        anchors = sorted(
            edge for cid in comps for edge in attach[cid]
        )
        if len(anchors) != 1:
            raise PreconditionError(
                f"subcurve {sorted(comps)} meets the core in {len(anchors)} nodes, expected 1"
            )
        trees.append(Tree(frozenset(comps), anchors[0]))
    trees.sort(key=lambda t: t.attaching_node)
    return Decomposition(frozenset(z), kind, tuple(trees))


def level(model: CurveModel) -> int:
    """Attachment nodes on the core plus distinct occupied slots on it."""
    dec = decompose(model)
    slots: set[str] = set()
    for mk in model.markings:
        if mk.component in dec.z_components:
            slots.add(mk.slot)
    return dec.attaching_count + len(slots)


def level_minimality_check(
    model: CurveModel, m: int
) -> tuple[bool, frozenset[str] | None]:
    """Decide whether every connected genus-one subcurve meets the rest of
    the curve and the markings in more than ``m`` points.

    Requires every genus-zero component to carry at least two distinguished
    points; under that hypothesis the core realises the minimum, so the
    answer is ``level(model) > m``.  Returns the core as witness on failure.
    """
    bad = [
        c.id
        for c in model.components
        if c.genus == 0 and distinguished_points(model, c.id).count < 2
    ]
    if bad:
        raise PreconditionError(
            "level minimality requires >= 2 distinguished points on every "
            f"genus-zero component; violated by {bad}"
        )
    dec = decompose(model)
    if level(model) > m:
        return True, None
    return False, dec.z_components
