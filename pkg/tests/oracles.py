"""Independent oracles and generators used by the test suite only.

Everything here is deliberately written from first principles, without
reusing the package's decomposition/stability internals, so that the two
routes check each other:

* subcurve enumeration with its own genus bookkeeping,
* brute-force marked isomorphism by trying every component bijection,
* a raw graph-growing enumeration of stable models (labelled trees plus a
  cycle/genus/elliptic closure) that must agree with the package's
  constructive strategy,
* exhaustive generation of semistable tails up to isomorphism,
* seeded random model generators.
"""

from __future__ import annotations

import heapq
import itertools
from fractions import Fraction

from mstab.model import (
    Component,
    CurveModel,
    EllipticPoint,
    Marking,
    WeightVector,
    curve,
)
from mstab.tails import AttachMark, SemistableTail, semistable_tail

# ---------------------------------------------------------------------------
# Subcurves
# ---------------------------------------------------------------------------


def induced_genus(model: CurveModel, subset: frozenset) -> int | None:
    """Arithmetic genus of the subcurve on ``subset``, or None if it is
    disconnected.

    The elliptic point restricted to ``j`` of its ``l`` branches has delta
    invariant ``l`` if ``j == l`` (the full singularity), ``j - 1`` if
    ``2 <= j < l`` (fewer branches sit in general position, a genus-zero
    seam), and ``0`` if ``j <= 1``.
    """
    if not subset:
        return None
    comps = set(subset)
    edges = [(a, b) for a, b in model.nodes if a in comps and b in comps]
    delta = len(edges)
    adjacency: dict[str, set[str]] = {cid: set() for cid in comps}
    for a, b in edges:
        if a != b:
            adjacency[a].add(b)
            adjacency[b].add(a)
    if model.elliptic is not None:
        on = [b for b in model.elliptic.branches if b in comps]
        l = len(model.elliptic.branches)
        j = len(on)
        if j == l:
            delta += l
        elif j >= 2:
            delta += j - 1
        if j >= 2:
            for x in on[1:]:
                adjacency[on[0]].add(x)
                adjacency[x].add(on[0])
    start = next(iter(comps))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in adjacency[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    if len(seen) != len(comps):
        return None
    genus = sum(c.genus for c in model.components if c.id in comps)
    return genus + delta - len(comps) + 1


def boundary_and_marks(model: CurveModel, subset: frozenset) -> int:
    """``|E meet closure(C minus E)| + |E meet markings|`` for the subcurve."""
    boundary = 0
    for a, b in model.nodes:
        if (a in subset) != (b in subset):
            boundary += 1
    if model.elliptic is not None:
        on = sum(1 for b in model.elliptic.branches if b in subset)
        if 0 < on < len(model.elliptic.branches):
            boundary += 1
    slots = {mk.slot for mk in model.markings if mk.component in subset}
    return boundary + len(slots)


def connected_genus_one_subcurves(model: CurveModel) -> list[frozenset]:
    ids = [c.id for c in model.components]
    out = []
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            subset = frozenset(combo)
            if induced_genus(model, subset) == 1:
                out.append(subset)
    return out


# ---------------------------------------------------------------------------
# Brute-force marked isomorphism
# ---------------------------------------------------------------------------


def _slot_partition(model: CurveModel) -> set[tuple[int, ...]]:
    groups: dict[str, list[int]] = {}
    for mk in model.markings:
        groups.setdefault(mk.slot, []).append(mk.index)
    return {tuple(sorted(g)) for g in groups.values()}


def brute_force_isomorphic(a: CurveModel, b: CurveModel) -> bool:
    """Try every genus-preserving component bijection."""
    if len(a.components) != len(b.components):
        return False
    if len(a.nodes) != len(b.nodes) or a.n != b.n:
        return False
    if (a.elliptic is None) != (b.elliptic is None):
        return False
    if sorted((mk.index, mk.weight) for mk in a.markings) != sorted(
        (mk.index, mk.weight) for mk in b.markings
    ):
        return False
    if _slot_partition(a) != _slot_partition(b):
        return False

    ids_a = [c.id for c in a.components]
    ids_b = [c.id for c in b.components]
    genus_a = {c.id: c.genus for c in a.components}
    genus_b = {c.id: c.genus for c in b.components}
    comp_of_a = {mk.index: mk.component for mk in a.markings}
    comp_of_b = {mk.index: mk.component for mk in b.markings}

    def slot_groups(model):
        groups: dict[str, set[tuple[int, ...]]] = {}
        for mk in model.markings:
            groups.setdefault(mk.component, set()).add(
                tuple(sorted(m.index for m in model.markings if m.slot == mk.slot))
            )
        return groups

    slots_a, slots_b = slot_groups(a), slot_groups(b)
    nodes_b = sorted(tuple(sorted(e)) for e in b.nodes)
    for perm in itertools.permutations(ids_b):
        sigma = dict(zip(ids_a, perm))
        if any(genus_a[x] != genus_b[sigma[x]] for x in ids_a):
            continue
        if sorted(tuple(sorted((sigma[p], sigma[q]))) for p, q in a.nodes) != nodes_b:
            continue
        if a.elliptic is not None and {
            sigma[x] for x in a.elliptic.branches
        } != set(b.elliptic.branches):
            continue
        if any(sigma[comp_of_a[i]] != comp_of_b[i] for i in comp_of_a):
            continue
        if any(slots_a.get(x, set()) != slots_b.get(sigma[x], set()) for x in ids_a):
            continue
        return True
    return False


# ---------------------------------------------------------------------------
# Raw enumeration of stable models (independent strategy)
# ---------------------------------------------------------------------------


def _labelled_trees(vertices: list[str]):
    """All labelled trees on the given vertices, decoded from Pruefer codes."""
    n = len(vertices)
    if n == 1:
        yield []
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        heap = [v for v in range(n) if degree[v] == 1]
        heapq.heapify(heap)
        edges = []
        for v in seq:
            leaf = heapq.heappop(heap)
            edges.append((leaf, v))
            degree[leaf] -= 1
            degree[v] -= 1
            if degree[v] == 1:
                heapq.heappush(heap, v)
        tail = [v for v in range(n) if degree[v] == 1]
        edges.append((tail[0], tail[1]))
        yield [(vertices[p], vertices[q]) for p, q in edges]


def set_partitions_with_cap(n: int, weights: WeightVector):
    """Set partitions of 1..n whose blocks have total weight at most 1."""
    partitions = []

    def rec(i, blocks):
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


def raw_stable_models(n: int, m: int, weights: WeightVector | None = None):
    """Generate-and-filter enumeration of candidate stable models.

    Builds every labelled tree on up to ``n + 1`` vertices and closes it in
    one of three ways: declare one vertex genus one; add one extra edge
    (possibly a self-loop); or treat one vertex as a virtual hub standing
    for an elliptic point whose branches are its neighbours.  Markings are
    then distributed in all ways respecting the weight partition.  No
    structural insight beyond *arithmetic genus one needs exactly one
    closure* is used, so agreement with the constructive strategy is a
    meaningful cross-check.
    """
    from mstab.model import is_valid
    from mstab.stability import is_mA_stable

    if weights is None:
        weights = WeightVector.unit(n)
    partitions = set_partitions_with_cap(n, weights)

    def marked_models(comps, edges, elliptic):
        for partition in partitions:
            for placement in itertools.product(
                [c for c, _ in comps], repeat=len(partition)
            ):
                marks = []
                for slot_no, (block, cid) in enumerate(zip(partition, placement)):
                    for index in block:
                        marks.append(
                            Marking(index, cid, f"s{slot_no}", weights[index - 1])
                        )
                marks.sort(key=lambda mk: mk.index)
                model = CurveModel(
                    tuple(Component(c, g) for c, g in comps),
                    tuple(tuple(sorted(e)) for e in edges),
                    EllipticPoint(tuple(sorted(elliptic))) if elliptic else None,
                    tuple(marks),
                )
                if not is_valid(model):
                    continue
                if is_mA_stable(model, m, weights).stable:
                    yield model

    for c in range(1, n + 2):
        ids = [f"v{i}" for i in range(c)]
        for tree in _labelled_trees(ids):
            for special in ids:
                comps = [(x, 1 if x == special else 0) for x in ids]
                yield from marked_models(comps, tree, None)
            comps = [(x, 0) for x in ids]
            for i in range(c):
                for j in range(i, c):
                    yield from marked_models(comps, tree + [(ids[i], ids[j])], None)
            if c >= 2:
                for hub in ids:
                    rest = [x for x in ids if x != hub]
                    branches = [
                        (b if a == hub else a) for a, b in tree if hub in (a, b)
                    ]
                    rest_edges = [e for e in tree if hub not in e]
                    comps = [(x, 0) for x in rest]
                    yield from marked_models(comps, rest_edges, branches)


def raw_strata_keys(n: int, m: int, weights: WeightVector | None = None) -> set[bytes]:
    from mstab.model import canonical_form

    return {canonical_form(model) for model in raw_stable_models(n, m, weights)}


# ---------------------------------------------------------------------------
# Exhaustive semistable tails up to isomorphism
# ---------------------------------------------------------------------------
#
# Rooted marked trees are generated once per (size, shape, marks) with a
# canonical recursive key, forests are canonical non-increasing multisets,
# and ring contents are deduplicated under rotation and reflection, so each
# isomorphism class of tails appears exactly once by construction.


def _tree_size(tree) -> int:
    mu, children = tree
    return 1 + sum(_tree_size(ch) for ch in children)


def _tree_marks(tree) -> int:
    mu, children = tree
    return mu + sum(_tree_marks(ch) for ch in children)


def _tree_key(tree) -> str:
    mu, children = tree
    return repr((mu, tuple(sorted(_tree_key(ch) for ch in children))))


def _marked_rooted_trees(max_size: int, mark_cap: int) -> dict[int, list]:
    """Canonical rooted trees with 0..mark_cap marks per vertex; every
    vertex keeps two distinguished points counting the edge to its parent
    (so a childless, markless vertex is not allowed)."""
    by_size: dict[int, list] = {}
    if max_size < 1:
        return by_size
    by_size[1] = [(mu, ()) for mu in range(1, mark_cap + 1)]
    for size in range(2, max_size + 1):
        found: dict[str, tuple] = {}
        for children in _forests(size - 1, by_size):
            for mu in range(0, mark_cap + 1):
                tree = (mu, tuple(children))
                found.setdefault(_tree_key(tree), tree)
        by_size[size] = [found[k] for k in sorted(found)]
    return by_size


def _forests(total: int, by_size: dict[int, list], bound=None):
    """Canonical multisets of trees with sizes summing to ``total``:
    non-increasing in (size, index)."""
    if total == 0:
        yield ()
        return
    top = min(total, bound[0] if bound else total)
    for size in range(top, 0, -1):
        options = by_size.get(size, [])
        limit = len(options) - 1
        if bound and size == bound[0]:
            limit = min(limit, bound[1])
        for idx in range(limit, -1, -1):
            for rest in _forests(total - size, by_size, (size, idx)):
                yield (options[idx],) + rest


def _realize_forest(forest, parent_id: str, counter: list[int], comps, edges, marks):
    for tree in forest:
        mu, children = tree
        cid = f"f{counter[0]}"
        counter[0] += 1
        comps.append((cid, 0))
        edges.append((parent_id, cid))
        marks.extend([cid] * mu)
        _realize_forest(children, cid, counter, comps, edges, marks)


def _assemble_tail(core_comps, core_edges, contents) -> SemistableTail:
    """``contents`` maps core component id to ``(marks, forest)``."""
    comps = list(core_comps)
    edges = list(core_edges)
    mark_comps: list[str] = []
    counter = [0]
    for parent in sorted(contents):
        mu, forest = contents[parent]
        mark_comps.extend([parent] * mu)
        _realize_forest(forest, parent, counter, comps, edges, mark_comps)
    model = curve(comps, edges)
    attach = [AttachMark(cid, f"a{i}") for i, cid in enumerate(sorted(mark_comps))]
    return semistable_tail(model, attach)


def _contents_options(budget: int, trees, mark_cap: int):
    out = []
    for mu in range(0, mark_cap + 1):
        for size in range(0, budget + 1):
            for forest in _forests(size, trees):
                out.append((mu, forest))
    return out


def _content_key(content) -> str:
    mu, forest = content
    return repr((mu, tuple(sorted(_tree_key(t) for t in forest))))


def _content_size(content) -> int:
    mu, forest = content
    return sum(_tree_size(t) for t in forest)


def exhaustive_tails(max_components: int, mark_cap: int = 1):
    """Yield every semistable tail with at most ``max_components``
    components and at most ``mark_cap`` attachment marks per component, one
    representative per isomorphism class (attachment marks unlabelled)."""
    trees = _marked_rooted_trees(max_components - 1, mark_cap)

    # Single-component cores: a genus-one component, or genus zero with a
    # self-node.
    for core in (("z", 1, []), ("z", 0, [("z", "z")])):
        cid, genus, core_edges = core
        for mu in range(0, mark_cap + 1):
            for budget in range(0, max_components - 1 + 1):
                for forest in _forests(budget, trees):
                    if mu + sum(_tree_marks(t) for t in forest) == 0:
                        continue
                    yield _assemble_tail(
                        [(cid, genus)], core_edges, {cid: (mu, forest)}
                    )

    # Ring cores; per-position contents deduplicated under the dihedral
    # symmetry of the ring.
    for r in range(2, max_components + 1):
        ring_ids = [f"z{i}" for i in range(r)]
        ring_edges = [(ring_ids[i], ring_ids[(i + 1) % r]) for i in range(r)]
        budget = max_components - r
        options = _contents_options(budget, trees, mark_cap)
        keys = [_content_key(c) for c in options]
        sizes = [_content_size(c) for c in options]
        mark_counts = [c[0] + sum(_tree_marks(t) for t in c[1]) for c in options]
        order = sorted(range(len(options)), key=lambda i: keys[i])

        def assignments(pos: int, left: int, chosen: list[int]):
            if pos == r:
                yield tuple(chosen)
                return
            for i in order:
                if sizes[i] <= left:
                    chosen.append(i)
                    yield from assignments(pos + 1, left - sizes[i], chosen)
                    chosen.pop()

        for assignment in assignments(0, budget, []):
            if sum(mark_counts[i] for i in assignment) == 0:
                continue
            kk = tuple(keys[i] for i in assignment)
            best = kk
            for flip in (kk, kk[::-1]):
                doubled = flip + flip
                for s in range(r):
                    cand = doubled[s : s + r]
                    if cand < best:
                        best = cand
            if best != kk:
                continue
            yield _assemble_tail(
                [(z, 0) for z in ring_ids],
                ring_edges,
                {ring_ids[i]: options[j] for i, j in zip(range(r), assignment)},
            )


# ---------------------------------------------------------------------------
# Random generators (seeded by the caller)
# ---------------------------------------------------------------------------


def random_semistable(rng, n: int) -> CurveModel:
    """A random semistable nodal fiber with ``n`` distinct markings."""
    while True:
        kind = rng.choice(["smooth", "nodal", "ring"])
        if kind == "smooth":
            comps = [("z0", 1)]
            edges = []
        elif kind == "nodal":
            comps = [("z0", 0)]
            edges = [("z0", "z0")]
        else:
            r = rng.randint(2, 4)
            comps = [(f"z{i}", 0) for i in range(r)]
            edges = [(f"z{i}", f"z{(i + 1) % r}") for i in range(r)]
        extra = rng.randint(0, n + 1)
        ids = [c for c, _ in comps]
        for i in range(extra):
            parent = rng.choice(ids)
            cid = f"t{i}"
            edges.append((parent, cid))
            comps.append((cid, 0))
            ids.append(cid)
        degree = {c: 0 for c in ids}
        for a, b in edges:
            degree[a] += 1
            degree[b] += 1
        genus = dict(comps)
        need = [c for c in ids if genus[c] == 0 and degree[c] < 2]
        if len(need) > n:
            continue
        placement = list(need)
        while len(placement) < n:
            placement.append(rng.choice(ids))
        rng.shuffle(placement)
        markings = [(i + 1, placement[i], f"s{i}") for i in range(n)]
        model = curve(comps, edges, None, markings)
        from mstab.degeneration import semistability_problems

        if not semistability_problems(model):
            return model


def random_weights(rng, n: int) -> WeightVector:
    values = []
    for _ in range(n):
        den = rng.randint(1, 6)
        num = rng.randint(1, den)
        values.append(Fraction(num, den))
    return WeightVector(tuple(values))
