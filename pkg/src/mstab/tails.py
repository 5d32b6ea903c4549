"""Semistable tails: distance to the core, balance, discrepancy divisors.

A tail is a nodal genus-one curve ``E`` carrying ``m >= 1`` attachment
marks, the points where ``E`` met the rest of a semistable fiber before the
rest was cut away.  The tail is *semistable* when every genus-zero
component keeps at least two distinguished points with attachment marks
counted.

A vertical divisor ``D`` supported on the tail is the unique candidate
twist making the relative dualizing sheaf trivial on every tail component
while restricting correctly to the complement.  Two routes compute it:

* :func:`discrepancy_closed_form` evaluates ``d(F) = l + 1 - dist(F)`` on
  balanced tails, where ``dist`` is dual-graph distance to the core and
  ``l`` the common distance of the marked components;
* :func:`discrepancy_solve` sets up and solves the exact integer linear
  system (unit coefficient on every marked component, degree zero
  everywhere) with no balance assumption, certifying infeasibility by an
  inconsistent equation.

Feasibility of the system is equivalent to balance, and the solution then
agrees with the closed form; the solver is deliberately independent of the
closed form so each checks the other.

Degree bookkeeping is adjunction on a regular total space with reduced
fiber: ``deg omega|_F = 2 p_a(F) - 2 - F.F`` with ``F.F`` minus the number
of branches along which ``F`` meets the rest of the fiber, attachment marks
counted as meetings with the off-tail curve (which carries coefficient
zero).  With this normalisation the unit coefficient on marked components
is not an extra axiom: the degree-zero equations force it, which is exactly
the double-pole behaviour of the dualizing sheaf at the singular point
being smoothed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import decomposition
from .errors import (
    InternalInvariantError,
    MalformedModelError,
    PreconditionError,
    UnbalancedTailError,
)
from .model import CurveModel, validate
from .canon import canonical_order


@dataclass(frozen=True)
class AttachMark:
    component: str
    slot: str


@dataclass(frozen=True)
class SemistableTail:
    curve: CurveModel
    attach: tuple[AttachMark, ...]

    @property
    def m(self) -> int:
        return len(self.attach)

    def marks_on(self, cid: str) -> int:
        return sum(1 for a in self.attach if a.component == cid)


def semistable_tail(curve: CurveModel, attach: Sequence) -> SemistableTail:
    """Validate and build a tail; raises :class:`PreconditionError` if the
    curve is not an unmarked nodal genus-one model or semistability fails."""
    problems = validate(curve)
    if problems:
        raise PreconditionError(
            "tail curve is not a valid genus-one model: "
            + "; ".join(v.message for v in problems)
        )
    if curve.elliptic is not None:
        raise PreconditionError("tail curve must be nodal (no elliptic point)")
    if curve.markings:
        raise PreconditionError("tail curve carries markings; use attachment marks")
    marks = tuple(
        a if isinstance(a, AttachMark) else AttachMark(str(a[0]), str(a[1]))
        for a in attach
    )
    if not marks:
        raise PreconditionError("a tail needs at least one attachment mark")
    known = set(curve.component_ids())
    slots = set()
    for a in marks:
        if a.component not in known:
            raise MalformedModelError(f"attachment mark on unknown component {a.component!r}")
        if a.slot in slots:
            raise PreconditionError(f"duplicate attachment slot {a.slot!r}")
        slots.add(a.slot)
    tail = SemistableTail(curve, marks)
    bad = [
        c.id
        for c in curve.components
        if c.genus == 0 and _boundary_branches(tail, c.id) + _internal_degree(tail, c.id) < 2
    ]
    if bad:
        raise PreconditionError(
            f"tail is not semistable: components {bad} have fewer than two distinguished points"
        )
    return tail


def _internal_degree(tail: SemistableTail, cid: str) -> int:
    """Node branches of ``cid`` inside the tail (self-nodes count twice)."""
    k = 0
    for a, b in tail.curve.nodes:
        if a == cid:
            k += 1
        if b == cid:
            k += 1
    return k


def _boundary_branches(tail: SemistableTail, cid: str) -> int:
    return tail.marks_on(cid)


def distance_to_core(tail: SemistableTail, cid: str) -> int:
    """Dual-graph distance from the component to the core (0 on the core)."""
    tail.curve.component(cid)
    return _distances(tail)[cid]


def _distances(tail: SemistableTail) -> dict[str, int]:
    dec = decomposition.decompose(tail.curve)
    dist = {cid: 0 for cid in sorted(dec.z_components)}
    frontier = sorted(dec.z_components)
    adj: dict[str, list[str]] = {c.id: [] for c in tail.curve.components}
    for a, b in tail.curve.nodes:
        if a != b:
            adj[a].append(b)
            adj[b].append(a)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for u in sorted(adj[v]):
                if u not in dist:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def is_balanced(tail: SemistableTail) -> bool:
    """All attachment marks sit at equal distance from the core."""
    dist = _distances(tail)
    values = {dist[a.component] for a in tail.attach}
    return len(values) <= 1


@dataclass(frozen=True)
class VerticalDivisor:
    """Integer multiplicities on tail components."""

    coefficients: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, int]) -> "VerticalDivisor":
        return cls(tuple(sorted((str(k), int(v)) for k, v in mapping.items())))

    def __getitem__(self, cid: str) -> int:
        for k, v in self.coefficients:
            if k == cid:
                return v
        raise KeyError(cid)

    def as_dict(self) -> dict[str, int]:
        return dict(self.coefficients)


def discrepancy_closed_form(tail: SemistableTail) -> VerticalDivisor:
    """``d(F) = l + 1 - dist(F)`` on a balanced tail; maximal on the core."""
    if not is_balanced(tail):
        raise UnbalancedTailError(
            "closed-form discrepancy exists only for balanced tails"
        )
    dist = _distances(tail)
    l = dist[tail.attach[0].component]
    return VerticalDivisor.of(
        {cid: l + 1 - d for cid, d in dist.items()}
    )


def _intersection_data(tail: SemistableTail):
    ids = sorted(tail.curve.component_ids())
    index = {cid: i for i, cid in enumerate(ids)}
    n = len(ids)
    pair = [[0] * n for _ in range(n)]
    loops = [0] * n
    for a, b in tail.curve.nodes:
        if a == b:
            loops[index[a]] += 1
        else:
            pair[index[a]][index[b]] += 1
            pair[index[b]][index[a]] += 1
    genus = [tail.curve.component(cid).genus for cid in ids]
    marks = [tail.marks_on(cid) for cid in ids]
    self_int = [
        -(sum(pair[i]) + marks[i]) for i in range(n)
    ]  # F.F on the fibered surface
    pa = [genus[i] + loops[i] for i in range(n)]  # arithmetic genus of F itself
    omega = [2 * pa[i] - 2 - self_int[i] for i in range(n)]
    return ids, index, pair, self_int, omega, marks


def degree_zero(tail: SemistableTail, divisor: VerticalDivisor, cid: str) -> int:
    """Degree of the twisted dualizing sheaf on one tail component.

    ``deg omega|_F + sum_G d(G) (G.F) + d(F) (F.F)``, off-tail components
    carrying coefficient zero.  Vanishes on every component exactly when the
    divisor is the discrepancy.
    """
    ids, index, pair, self_int, omega, _ = _intersection_data(tail)
    coeffs = divisor.as_dict()
    unknown = sorted(set(coeffs) - set(ids))
    if unknown:
        raise PreconditionError(f"divisor supported outside the tail: {unknown}")
    if cid not in index:
        raise MalformedModelError(f"unknown component id: {cid!r}")
    i = index[cid]
    total = omega[i] + coeffs.get(cid, 0) * self_int[i]
    for j, other in enumerate(ids):
        if j != i:
            total += coeffs.get(other, 0) * pair[i][j]
    return total


@dataclass(frozen=True)
class DiscrepancySolution:
    feasible: bool
    divisor: Optional[VerticalDivisor]
    conflict: Optional[str]  # label of an inconsistent equation when infeasible


def discrepancy_solve(tail: SemistableTail) -> DiscrepancySolution:
    """Solve the exact linear system for the discrepancy divisor.

    Unknowns are one integer per tail component.  Equations: coefficient 1
    on every component carrying an attachment mark; degree zero (see
    :func:`degree_zero`) on every component.  Infeasibility is certified by
    naming an equation that reduces to an impossibility, never inferred
    numerically.
    """
    ids, index, pair, self_int, omega, marks = _intersection_data(tail)
    n = len(ids)
    rows: list[tuple[list[Fraction], Fraction, str]] = []
    for i, cid in enumerate(ids):
        if marks[i] > 0:
            coeff = [Fraction(0)] * n
            coeff[i] = Fraction(1)
            rows.append((coeff, Fraction(1), f"attachment condition on {cid}"))
    for i, cid in enumerate(ids):
        coeff = [Fraction(pair[i][j]) for j in range(n)]
        coeff[i] = Fraction(self_int[i])
        rows.append((coeff, Fraction(-omega[i]), f"degree zero on {cid}"))

    # Exact Gaussian elimination, tracking each row's originating label.
    pivots: list[tuple[list[Fraction], Fraction, int]] = []  # (row, rhs, pivot col)
    for coeff, rhs, label in rows:
        coeff = list(coeff)
        for prow, prhs, pcol in pivots:
            factor = coeff[pcol]
            if factor:
                coeff = [c - factor * p for c, p in zip(coeff, prow)]
                rhs = rhs - factor * prhs
        col = next((j for j in range(n) if coeff[j]), None)
        if col is None:
            if rhs != 0:
                return DiscrepancySolution(False, None, label)
            continue
        inv = coeff[col]
        coeff = [c / inv for c in coeff]
        rhs = rhs / inv
        pivots.append((coeff, rhs, col))

    if len(pivots) < n:
        raise InternalInvariantError(
            "discrepancy system is underdetermined; the tail intersection "
            "form should be negative definite"
        )
    solution = [Fraction(0)] * n
    for prow, prhs, pcol in reversed(pivots):
        value = prhs
        for j in range(n):
            if j != pcol and prow[j]:
                value -= prow[j] * solution[j]
        solution[pcol] = value
    for v in solution:
        if v.denominator != 1:
            raise InternalInvariantError(
                f"consistent discrepancy system with non-integral solution {v}"
            )
    divisor = VerticalDivisor.of({cid: int(solution[index[cid]]) for cid in ids})
    return DiscrepancySolution(True, divisor, None)


# ---------------------------------------------------------------------------
# Canonical form for tails (attachment marks are unlabelled)
# ---------------------------------------------------------------------------


def tail_canonical_form(tail: SemistableTail) -> bytes:
    """Canonical bytes; equal exactly for tails isomorphic as marked curves
    with interchangeable attachment marks."""
    ids = tail.curve.component_ids()
    index = {cid: i for i, cid in enumerate(ids)}
    n = len(ids)
    loops = [0] * n
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for a, b in tail.curve.nodes:
        if a == b:
            loops[index[a]] += 1
        else:
            neighbors[index[a]].append(index[b])
            neighbors[index[b]].append(index[a])
    marks = [tail.marks_on(cid) for cid in ids]
    keys = [
        (tail.curve.components[i].genus, loops[i], marks[i]) for i in range(n)
    ]

    def serialize(order: Sequence[int]) -> bytes:
        pos = {v: p for p, v in enumerate(order)}
        genera = tuple(tail.curve.components[v].genus for v in order)
        lps = tuple(loops[v] for v in order)
        mks = tuple(marks[v] for v in order)
        edges = sorted(
            tuple(sorted((pos[index[a]], pos[index[b]])))
            for a, b in tail.curve.nodes
            if a != b
        )
        return repr((genera, lps, mks, tuple(edges))).encode()

    form, _ = canonical_order(n, keys, neighbors, serialize)
    return form
