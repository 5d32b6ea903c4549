"""Canonical labelling of small vertex-coloured multigraphs.

The dual graphs handled in this package are multigraphs with at most one
independent cycle plus, possibly, one hyperedge (the elliptic point joining
several components).  Canonical forms are computed by the classic
individualisation/refinement scheme:

1. colour vertices by an isomorphism-invariant key,
2. refine colours by the multiset of neighbour colours until stable,
3. if some colour class is still not a singleton, individualise each of its
   members in turn and recurse,
4. among all complete orderings reached this way, keep the one whose
   serialisation is lexicographically least.

Because refinement keys are isomorphism invariants, isomorphic inputs
explore identical candidate sets, so the least serialisation is a canonical
form.  On the near-tree graphs that occur here the branching is tiny; a bare
unmarked ring of ``r`` vertices costs ``2r`` leaves, not ``r!``.

Only ``sorted`` and tuple comparison are used (no ``hash``), so output is
stable across processes and interpreter hash seeds.
"""

from __future__ import annotations

from typing import Callable, Sequence


def _rank_compress(keys: list) -> list[int]:
    order = sorted(set(repr(k) for k in keys))
    index = {k: i for i, k in enumerate(order)}
    return [index[repr(k)] for k in keys]


def _refine(colors: list[int], neighbor_lists: list[list[int]]) -> list[int]:
    """Iterate neighbour-multiset refinement until the partition stabilises."""
    n = len(colors)
    while True:
        keys = [
            (colors[v], tuple(sorted(colors[u] for u in neighbor_lists[v])))
            for v in range(n)
        ]
        new = _rank_compress(keys)
        if new == colors:
            return colors
        colors = new


def canonical_order(
    n: int,
    init_keys: Sequence,
    neighbor_lists: Sequence[Sequence[int]],
    serialize: Callable[[Sequence[int]], bytes],
) -> tuple[bytes, tuple[int, ...]]:
    """Return ``(form, order)`` where ``order[pos] = vertex``.

    ``init_keys`` are arbitrary comparable-by-repr isomorphism invariants,
    one per vertex; ``neighbor_lists[v]`` lists adjacent vertices with
    multiplicity (one entry per edge end; self-loops should be encoded in
    the vertex key, not listed).  ``serialize`` maps a complete ordering to
    bytes and must itself be label-independent given the ordering.
    """
    if n == 0:
        return serialize(()), ()
    adj = [list(a) for a in neighbor_lists]
    best: list = [None, None]

    def recurse(colors: list[int]) -> None:
        colors = _refine(colors, adj)
        classes: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            classes.setdefault(c, []).append(v)
        target = None
        for c in sorted(classes):
            if len(classes[c]) > 1:
                target = classes[c]
                break
        if target is None:
            order = tuple(sorted(range(n), key=lambda v: colors[v]))
            form = serialize(order)
            if best[0] is None or form < best[0]:
                best[0], best[1] = form, order
            return
        for v in target:
            branched = list(colors)
            # Individualise v: give it a colour strictly below its class.
            branched[v] = -1
            recurse(_rank_compress(branched))

    recurse(_rank_compress(list(init_keys)))
    return best[0], best[1]
