"""Minimal-set extraction over monotone predicates.

An abductive explanation is a subset-minimal feature set whose fixing makes
the oracle report Robust; a contrastive explanation is a subset-minimal set
whose freeing lets it report AdvFound. Both are instances of one problem,
minimal set over a monotone predicate, and every extractor here works on
the MonotonePredicate adapter:

    AXp-mode:  pi(S) <=> find_adv_ex(fixed=S) is Robust
    CXp-mode:  pi(Y) <=> find_adv_ex(fixed=F \\ Y) is AdvFound

Extractors: deletion (linear scan, exactly m oracle calls), dichotomic
prefix search (O(k log m) calls), the parallel driver with q concurrent
probes per narrowing round, and the feature-disjunction check that frees
or confirms the tail of the candidate list in one round.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import NoExplanation
from .oracle import Cancelled, OracleQuery, Robust, is_adv
from .parallel import ALL_FALSE_CHECK, BOUNDARY_SEARCH, ProbeBatch, run_batch
from .problem import check_norm, check_ordering

AXP = "axp"
CXP = "cxp"


@dataclass(frozen=True)
class MonotonePredicate:
    """Feature-set predicate, monotone increasing under inclusion."""

    kind: str
    features: frozenset
    epsilon: float
    norm: float

    def __post_init__(self):
        if self.kind not in (AXP, CXP):
            raise ValueError(f"kind must be {AXP!r} or {CXP!r}")
        check_norm(self.norm)

    def query(self, subset: frozenset) -> OracleQuery:
        fixed = subset if self.kind == AXP else self.features - subset
        return OracleQuery(fixed=frozenset(fixed), epsilon=self.epsilon, norm=self.norm)

    def truth(self, verdict) -> bool:
        if isinstance(verdict, Cancelled):
            raise ValueError("cancelled verdict has no truth value")
        adv = is_adv(verdict)
        return adv if self.kind == CXP else not adv

    def evaluate(self, oracle, subset: frozenset) -> bool:
        return self.truth(oracle.find_adv_ex(self.query(frozenset(subset))))


@dataclass(frozen=True)
class RunConfig:
    """Knobs of one extraction run."""

    kind: str = AXP
    epsilon: float = 1.0
    norm: float = 1
    ordering: Optional[Sequence[int]] = None  # None: identity; "random": seeded shuffle
    q: int = 1
    delta: float = 0.75  # disjunction check activates once |W| <= (1 - delta) * m
    fd_enabled: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (AXP, CXP):
            raise ValueError(f"kind must be {AXP!r} or {CXP!r}")
        check_norm(self.norm)
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must be in [0, 1]")

    def resolve_ordering(self, m: int) -> tuple:
        if self.ordering is None:
            return tuple(range(1, m + 1))
        if self.ordering == "random":
            order = list(range(1, m + 1))
            random.Random(self.seed).shuffle(order)
            return tuple(order)
        return check_ordering(self.ordering, m)


@dataclass
class RunStats:
    """Counters of one run; oracle_calls >= parallel_rounds throughout."""

    oracle_calls: int = 0
    parallel_rounds: int = 0
    cancelled_calls: int = 0
    result_size: int = 0
    wall_time: float = 0.0
    seed: int = 0
    precheck_calls: int = 0
    fd_rounds: int = 0
    fd_freed: int = 0
    fd_confirmed: int = 0

    def to_dict(self) -> dict:
        return {
            "oracle_calls": self.oracle_calls,
            "parallel_rounds": self.parallel_rounds,
            "cancelled_calls": self.cancelled_calls,
            "result_size": self.result_size,
            "wall_time": self.wall_time,
            "seed": self.seed,
            "precheck_calls": self.precheck_calls,
            "fd_rounds": self.fd_rounds,
            "fd_freed": self.fd_freed,
            "fd_confirmed": self.fd_confirmed,
        }


def _batch(oracle, pred, subsets, decision, q, stats):
    probes = tuple(pred.query(s) for s in subsets)
    outcome = run_batch(oracle, ProbeBatch(probes=probes, decision=decision, q=q, truth=pred.truth))
    if stats is not None:
        stats.oracle_calls += outcome.calls
        stats.cancelled_calls += outcome.cancelled
        stats.parallel_rounds += 1
    return outcome


def verify_minimal(oracle, pred: MonotonePredicate, subset: frozenset) -> bool:
    """pred(S) holds and dropping any single member breaks it; |S|+1 calls."""
    subset = frozenset(subset)
    if not pred.evaluate(oracle, subset):
        return False
    return all(not pred.evaluate(oracle, subset - {i}) for i in subset)


def shrink_minimal(oracle, pred: MonotonePredicate, base: frozenset, ordering: Sequence[int]) -> frozenset:
    """Deletion scan: drop candidates in reverse declared order when the
    predicate survives without them. Assumes pred(base); issues exactly
    |base| oracle calls."""
    current = frozenset(base)
    for i in reversed([f for f in ordering if f in base]):
        without = current - {i}
        if pred.evaluate(oracle, without):
            current = without
    return current


def deletion_extract(oracle, pred: MonotonePredicate, ordering: Optional[Sequence[int]] = None) -> frozenset:
    """Linear-scan extraction over the full feature set.

    The scan itself issues exactly m oracle calls; CXp-mode is preceded by
    one feasibility call (is there any adversarial example at all?).
    """
    order = _resolve(pred, ordering)
    if pred.kind == CXP and not pred.evaluate(oracle, pred.features):
        raise NoExplanation("instance is robust at this epsilon; no contrastive explanation")
    return shrink_minimal(oracle, pred, pred.features, order)


def _resolve(pred, ordering):
    m = len(pred.features)
    if ordering is None:
        return tuple(range(1, m + 1))
    return check_ordering(ordering, m)


def find_transition_prefix(
    oracle,
    pred: MonotonePredicate,
    S: frozenset,
    W: Sequence[int],
    q: int,
    probe_zero: bool = False,
    stats: Optional[RunStats] = None,
) -> int:
    """Minimal j with pred(S | W[:j]), given pred(S | W) holds.

    j = 0 means S alone suffices; otherwise W[j-1] is a transition feature.
    Narrows a bracket (lo, u] with up to q concurrent prefix probes per
    round, evenly spaced; lo carries the largest prefix known false (-1
    when nothing is known false), u the smallest known true.
    """
    n = len(W)
    lo = -1
    if probe_zero:
        outcome = _batch(oracle, pred, [S], BOUNDARY_SEARCH, 1, stats)
        if outcome.decided.first_true is not None:
            return 0
        lo = 0
    u = n
    while u - lo > 1:
        width = u - lo
        omega = min(q, width - 1)
        marks = sorted({lo + math.ceil(r * width / (omega + 1)) for r in range(1, omega + 1)})
        subsets = [S | frozenset(W[:j]) for j in marks]
        outcome = _batch(oracle, pred, subsets, BOUNDARY_SEARCH, q, stats)
        t = outcome.decided.first_true
        if t is None:
            lo = marks[-1]
        else:
            u = marks[t - 1]
            if t >= 2:
                lo = marks[t - 2]
    return u


@dataclass(frozen=True)
class AllNecessary:
    """Every tested feature is required; all may move to S at once."""

    tested: tuple


@dataclass(frozen=True)
class Freed:
    """Exactly one tested feature was verified droppable (seeded pick
    among the verified-droppable ones); the caller removes it from W."""

    freed: int
    tested: tuple


def feat_disjunct(
    oracle,
    pred: MonotonePredicate,
    S: frozenset,
    W: Sequence[int],
    q: int,
    rng: random.Random,
    stats: Optional[RunStats] = None,
) -> AllNecessary | Freed:
    """One-round disjunction check on the tail of W.

    Probes pred((S | W) \\ {i}) for each i in the last min(q, |W|)
    features of W. All false: every tested feature is a transition feature
    with respect to any final subset (monotonicity), so all are confirmed.
    Otherwise one verified-droppable feature is freed.
    """
    tested = tuple(W[-min(q, len(W)):])
    base = S | frozenset(W)
    outcome = _batch(oracle, pred, [base - {i} for i in tested], ALL_FALSE_CHECK, q, stats)
    if stats is not None:
        stats.fd_rounds += 1
    if outcome.decided.all_false:
        if stats is not None:
            stats.fd_confirmed += len(tested)
        return AllNecessary(tested=tested)
    droppable = [tested[pos - 1] for pos in outcome.decided.true_positions]
    pick = rng.choice(droppable)
    if stats is not None:
        stats.fd_freed += 1
    return Freed(freed=pick, tested=tested)


def _swift_core(oracle, pred, ordering, q, fd_enabled, delta, rng, stats) -> frozenset:
    m = len(ordering)
    S = frozenset()
    W = list(ordering)
    first = True
    fd_mode = False
    while W:
        if fd_enabled and (fd_mode or len(W) <= (1.0 - delta) * m):
            # Once the disjunction check has run, prefix narrowing is
            # never used again; W only shrinks so the gate stays open.
            fd_mode = True
            move = feat_disjunct(oracle, pred, S, W, q, rng, stats)
            if isinstance(move, AllNecessary):
                S = S | frozenset(move.tested)
                del W[len(W) - len(move.tested):]
            else:
                W.remove(move.freed)
            continue
        j = find_transition_prefix(oracle, pred, S, W, q, probe_zero=first, stats=stats)
        first = False
        if j == 0:
            return S
        S = S | {W[j - 1]}
        del W[j - 1:]
    # pred(S | W) held throughout and W is empty, so S suffices; every
    # member entered as a transition feature or via AllNecessary.
    return S


def _run(oracle, pred: MonotonePredicate, config: RunConfig) -> tuple:
    ordering = config.resolve_ordering(len(pred.features))
    rng = random.Random(config.seed)
    stats = RunStats(seed=config.seed)
    start = time.perf_counter()
    if pred.kind == CXP:
        outcome = _batch(oracle, pred, [pred.features], BOUNDARY_SEARCH, 1, stats)
        stats.precheck_calls += 1
        if outcome.decided.first_true is None:
            raise NoExplanation("instance is robust at this epsilon; no contrastive explanation")
    result = _swift_core(oracle, pred, ordering, config.q, config.fd_enabled, config.delta, rng, stats)
    stats.result_size = len(result)
    stats.wall_time = time.perf_counter() - start
    return result, stats


def dichotomic_extract(oracle, pred: MonotonePredicate, ordering: Optional[Sequence[int]] = None) -> frozenset:
    """Sequential prefix-search extraction, <= 2k ceil(log2(m+1)) + k + 1
    oracle calls for a result of size k.

    Written as its own loop (not a q=1 specialization of the parallel
    engine) so the two can be checked against each other.
    """
    order = _resolve(pred, ordering)
    if pred.kind == CXP and not pred.evaluate(oracle, pred.features):
        raise NoExplanation("instance is robust at this epsilon; no contrastive explanation")
    S = frozenset()
    W = list(order)
    if pred.evaluate(oracle, S):
        return S
    lo = 0  # largest prefix length of W known insufficient alongside S
    while True:
        hi = len(W)
        while hi - lo > 1:
            mid = (lo + hi + 1) // 2
            if pred.evaluate(oracle, S | frozenset(W[:mid])):
                hi = mid
            else:
                lo = mid
        if hi == 0:
            return S
        # W[hi-1] is a transition feature: required given S
        S = S | {W[hi - 1]}
        W = W[: hi - 1]
        lo = -1  # whether S alone now suffices is unknown


def swift_xplain(problem, oracle, config: RunConfig) -> tuple:
    """Parallel extraction: q concurrent probes per narrowing round, with
    the optional tail disjunction check. Returns (feature set, RunStats)."""
    pred = MonotonePredicate(
        kind=config.kind, features=problem.features, epsilon=config.epsilon, norm=config.norm
    )
    return _run(oracle, pred, config)
