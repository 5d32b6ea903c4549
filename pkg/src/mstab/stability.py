"""Stability of pointed genus-one curve models.

``m``-stability asks, for ``1 <= m < n``: singularities no worse than the
elliptic m-fold point, level greater than ``m``, and no infinitesimal
automorphisms, the latter expressed purely through distinguished-point
counts on normalised components.  The weighted variant adds that coincident
markings carry total weight at most one and that the weighted dualizing
degree is positive on every component.

Reports itemise every violated clause so a caller can repair or explain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import decomposition
from .errors import PreconditionError
from .model import (
    CurveModel,
    WeightVector,
    distinguished_points,
    omega_degree,
)

CLAUSE_SINGULARITIES = 1
CLAUSE_LEVEL = 2
CLAUSE_AUTOMORPHISMS = 3
CLAUSE_WEIGHT_SUM = 4
CLAUSE_AMPLE = 5


@dataclass(frozen=True)
class StabilityViolation:
    clause: int
    message: str
    where: tuple = ()

    def as_dict(self) -> dict:
        return {"clause": self.clause, "message": self.message, "where": list(self.where)}


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    failures: tuple[StabilityViolation, ...]

    def clauses(self) -> set[int]:
        return {f.clause for f in self.failures}

    def as_dict(self) -> dict:
        return {"stable": self.stable, "failures": [f.as_dict() for f in self.failures]}


def _check_m(model: CurveModel, m: int) -> None:
    n = model.n
    if not (1 <= m < n):
        raise PreconditionError(f"need 1 <= m < n, got m={m}, n={n}")


def is_mA_stable(model: CurveModel, m: int, weights: WeightVector) -> StabilityReport:
    """Full stability check against a weight vector; see module docstring."""
    _check_m(model, m)
    if len(weights) != model.n:
        raise PreconditionError(
            f"weight vector has length {len(weights)}, expected {model.n}"
        )
    failures: list[StabilityViolation] = []

    if model.elliptic is not None and model.elliptic.num_branches > m:
        failures.append(
            StabilityViolation(
                CLAUSE_SINGULARITIES,
                f"elliptic point has {model.elliptic.num_branches} branches, allowed at most {m}",
                tuple(model.elliptic.branches),
            )
        )

    try:
        ok, witness = decomposition.level_minimality_check(model, m)
    except PreconditionError:
        lv = decomposition.level(model)
        ok = lv > m
        witness = decomposition.decompose(model).z_components if not ok else None
    if not ok:
        failures.append(
            StabilityViolation(
                CLAUSE_LEVEL,
                f"level {decomposition.level(model)} is not greater than m={m}",
                tuple(sorted(witness or ())),
            )
        )

    if model.elliptic is None:
        for c in model.components:
            if c.genus == 0 and distinguished_points(model, c.id).count < 3:
                failures.append(
                    StabilityViolation(
                        CLAUSE_AUTOMORPHISMS,
                        f"genus-zero component {c.id} has "
                        f"{distinguished_points(model, c.id).count} < 3 distinguished points",
                        (c.id,),
                    )
                )
    else:
        branches = set(model.elliptic.branches)
        counts = {b: distinguished_points(model, b).count for b in sorted(branches)}
        for b, k in counts.items():
            if k < 2:
                failures.append(
                    StabilityViolation(
                        CLAUSE_AUTOMORPHISMS,
                        f"branch component {b} has {k} < 2 distinguished points",
                        (b,),
                    )
                )
        if counts and max(counts.values()) < 3:
            failures.append(
                StabilityViolation(
                    CLAUSE_AUTOMORPHISMS,
                    "no branch component has 3 or more distinguished points",
                    tuple(sorted(branches)),
                )
            )
        for c in model.components:
            if c.id in branches:
                continue
            k = distinguished_points(model, c.id).count
            if c.genus == 0 and k < 3:
                failures.append(
                    StabilityViolation(
                        CLAUSE_AUTOMORPHISMS,
                        f"non-branch component {c.id} has {k} < 3 distinguished points",
                        (c.id,),
                    )
                )

    by_slot: dict[str, list[int]] = {}
    for mk in model.markings:
        by_slot.setdefault(mk.slot, []).append(mk.index)
    for slot in sorted(by_slot):
        indices = sorted(by_slot[slot])
        total = sum((weights[i - 1] for i in indices), Fraction(0))
        if total > 1:
            failures.append(
                StabilityViolation(
                    CLAUSE_WEIGHT_SUM,
                    f"markings {indices} coincide with total weight {total} > 1",
                    tuple(indices),
                )
            )

    for c in model.components:
        deg = omega_degree(model, c.id, weights)
        if deg <= 0:
            failures.append(
                StabilityViolation(
                    CLAUSE_AMPLE,
                    f"weighted dualizing degree {deg} on component {c.id} is not positive",
                    (c.id,),
                )
            )

    failures.sort(key=lambda f: (f.clause, f.where))
    return StabilityReport(not failures, tuple(failures))


def is_m_stable(model: CurveModel, m: int) -> StabilityReport:
    """Stability with unit weights; coincident markings fail clause 4."""
    _check_m(model, m)
    return is_mA_stable(model, m, WeightVector.unit(model.n))


def stratum_dimension(model: CurveModel) -> int:
    """Moduli dimension of the equisingular stratum of the model.

    Sum over normalised components: ``distinguished`` for genus one and
    ``distinguished - 3`` for genus zero, so a self-node contributes two.
    """
    total = 0
    for c in model.components:
        k = distinguished_points(model, c.id).count
        total += k if c.genus == 1 else k - 3
    return total
