"""Enumeration of all explanations and minimal-hitting-set duality.

Two independent routes to the complete families:

- brute_force_enumerate evaluates the weak predicates on all 2^m feature
  subsets and keeps the subset-minimal satisfying sets. Exponential, exact,
  the reference for everything else.
- enumerate_explanations walks seed sets guided by blocking constraints
  (the classic dual-oracle loop): a seed satisfying the abductive predicate
  is shrunk to an AXp and blocked negatively (some member must be free in
  future seeds); otherwise its complement holds a CXp, which is extracted
  and blocked positively (some member must be fixed). Seed exhaustion
  certifies completeness.

The families are mutually minimal hitting sets; check_duality verifies
both directions with an exact hitting-set computation.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import IncompleteFamily, SeedEngineOverflow
from .extraction import AXP, CXP, MonotonePredicate, shrink_minimal


@dataclass(frozen=True)
class ExplanationFamily:
    kind: str
    sets: frozenset  # of frozensets
    complete: bool

    def __post_init__(self):
        for a, b in itertools.combinations(self.sets, 2):
            if a <= b or b <= a:
                raise ValueError("family members must be pairwise incomparable")


def brute_force_enumerate(problem, oracle, epsilon: float, norm, cap: int = 14) -> tuple:
    """Complete (AXp family, CXp family) by exhaustion over all subsets.

    A set is minimal-satisfying iff the predicate holds on it and fails on
    every one-element-smaller subset (monotonicity makes the local check
    sufficient).
    """
    m = problem.m
    if m > cap:
        raise ValueError(f"m={m} exceeds the brute-force cap {cap}")
    features = sorted(problem.features)
    preds = {
        kind: MonotonePredicate(kind=kind, features=problem.features, epsilon=epsilon, norm=norm)
        for kind in (AXP, CXP)
    }
    families = {}
    for kind, pred in preds.items():
        truth = {}
        for r in range(m + 1):
            for combo in itertools.combinations(features, r):
                s = frozenset(combo)
                truth[s] = pred.evaluate(oracle, s)
        minimal = frozenset(
            s for s, val in truth.items() if val and all(not truth[s - {i}] for i in s)
        )
        families[kind] = ExplanationFamily(kind=kind, sets=minimal, complete=True)
    return families[AXP], families[CXP]


def minimal_hitting_sets(family, universe_size: Optional[int] = None) -> frozenset:
    """All subset-minimal hitting sets of a family of feature sets.

    Incremental intersection: fold sets in one at a time, extending each
    partial hitting set that misses the new set by each of its elements and
    pruning non-minimal candidates. Exact; fine up to a few dozen features.
    An empty family is hit by the empty set alone; a family containing the
    empty set is unhittable.
    """
    sets = [frozenset(s) for s in family]
    if any(not s for s in sets):
        return frozenset()
    candidates = {frozenset()}
    for s in sets:
        hitting = {h for h in candidates if h & s}
        missing = candidates - hitting
        for h in missing:
            for e in s:
                extended = h | {e}
                if not any(other <= extended for other in hitting):
                    hitting.add(extended)
        # drop dominated candidates (a strict superset of another)
        candidates = {
            h for h in hitting if not any(other < h for other in hitting)
        }
    return frozenset(candidates)


def check_duality(axps: ExplanationFamily, cxps: ExplanationFamily) -> bool:
    """Each family is exactly the minimal hitting sets of the other."""
    if not (axps.complete and cxps.complete):
        raise IncompleteFamily("duality is only meaningful for complete families")
    return axps.sets == minimal_hitting_sets(cxps.sets) and cxps.sets == minimal_hitting_sets(
        axps.sets
    )


class SeedEngine:
    """Backtracking seed search over recorded blocking constraints.

    Seeds are candidate fixed-sets. A negative clause (from a found AXp)
    requires at least one of its members free; a positive clause (from a
    found CXp) requires at least one of its members fixed. The search
    assigns features in index order, preferring fixed (maximal seeds),
    free (minimal seeds), or a seeded coin (random), and prunes on
    violated clauses.
    """

    def __init__(self, m: int, prefer: str = "maximal", seed: int = 0, max_clauses: int = 10_000):
        if prefer not in ("maximal", "minimal", "random"):
            raise ValueError(f"unknown seed preference {prefer!r}")
        self.m = m
        self.prefer = prefer
        self.rng = random.Random(seed)
        self.max_clauses = max_clauses
        self.negative = []  # clauses: at least one member free
        self.positive = []  # clauses: at least one member fixed

    def block_axp(self, axp: frozenset) -> None:
        self.negative.append(frozenset(axp))
        self._check_cap()

    def block_cxp(self, cxp: frozenset) -> None:
        self.positive.append(frozenset(cxp))
        self._check_cap()

    def _check_cap(self):
        if len(self.negative) + len(self.positive) > self.max_clauses:
            raise SeedEngineOverflow(f"more than {self.max_clauses} blocking clauses")

    def next_seed(self) -> Optional[frozenset]:
        """First satisfying seed under the preference order, None when the
        space is exhausted."""
        assignment = {}

        def violated() -> bool:
            for clause in self.negative:
                if all(assignment.get(i) is True for i in clause):
                    return True
            for clause in self.positive:
                if all(assignment.get(i) is False for i in clause):
                    return True
            return False

        def search(i: int) -> bool:
            if violated():
                return False
            if i > self.m:
                return True
            if self.prefer == "maximal":
                order = (True, False)
            elif self.prefer == "minimal":
                order = (False, True)
            else:
                order = (True, False) if self.rng.random() < 0.5 else (False, True)
            for value in order:
                assignment[i] = value
                if search(i + 1):
                    return True
            del assignment[i]
            return False

        if not search(1):
            return None
        return frozenset(i for i, fixed in assignment.items() if fixed)


def enumerate_explanations(
    problem,
    oracle,
    epsilon: float,
    norm,
    limit: Optional[int] = None,
    ordering: Optional[tuple] = None,
    prefer: str = "maximal",
    seed: int = 0,
    max_clauses: int = 10_000,
) -> Iterator[tuple]:
    """Yield ("axp"|"cxp", feature set) without repetition, in discovery
    order; exhausts both complete families when limit is None."""
    if limit is not None and limit < 1:
        raise ValueError("limit must be >= 1 or None")
    m = problem.m
    order = tuple(ordering) if ordering is not None else tuple(range(1, m + 1))
    preds = {
        kind: MonotonePredicate(kind=kind, features=problem.features, epsilon=epsilon, norm=norm)
        for kind in (AXP, CXP)
    }
    engine = SeedEngine(m, prefer=prefer, seed=seed, max_clauses=max_clauses)
    emitted = 0
    while limit is None or emitted < limit:
        seed_set = engine.next_seed()
        if seed_set is None:
            return
        if preds[AXP].evaluate(oracle, seed_set):
            axp = shrink_minimal(oracle, preds[AXP], seed_set, order)
            engine.block_axp(axp)
            yield (AXP, axp)
        else:
            # the freed complement admits an adversarial example, so it
            # contains a contrastive explanation
            complement = problem.features - seed_set
            cxp = shrink_minimal(oracle, preds[CXP], complement, order)
            engine.block_cxp(cxp)
            yield (CXP, cxp)
        emitted += 1


def enumerate_families(problem, oracle, epsilon: float, norm, **kwargs) -> tuple:
    """Run enumeration to exhaustion and package both families."""
    axps, cxps = set(), set()
    for kind, s in enumerate_explanations(problem, oracle, epsilon, norm, limit=None, **kwargs):
        (axps if kind == AXP else cxps).add(s)
    return (
        ExplanationFamily(kind=AXP, sets=frozenset(axps), complete=True),
        ExplanationFamily(kind=CXP, sets=frozenset(cxps), complete=True),
    )
