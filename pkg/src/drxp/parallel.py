"""Concurrent-probe executor.

Runs one batch of oracle queries on a bounded pool and resolves a declared
decision rule from completed probes, cancelling the rest once the rule is
decided. The minimal-set algorithms express both their narrowing rounds
(boundary-search) and their disjunction checks (all-false-check) through
this single entry point, so it owns all concurrency in the engine.

Probe truth values are predicate values, obtained by applying the batch's
`truth` function to each verdict (abductive probes are true on Robust,
contrastive ones on AdvFound).
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import OracleFailure, OracleInconsistency
from .oracle import Cancelled, OracleQuery

BOUNDARY_SEARCH = "boundary-search"
ALL_FALSE_CHECK = "all-false-check"


@dataclass(frozen=True)
class ProbeBatch:
    """Ordered probes plus the rule that consumes their truth values.

    boundary-search expects truth values nondecreasing along the probe
    list (a monotone step) and decides the position of the first true
    probe; all-false-check decides whether every probe is false and
    reports the true positions otherwise.
    """

    probes: tuple  # of OracleQuery
    decision: str
    q: int
    truth: Callable

    def __post_init__(self):
        if not self.probes:
            raise ValueError("batch needs at least one probe")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.decision not in (BOUNDARY_SEARCH, ALL_FALSE_CHECK):
            raise ValueError(f"unknown decision rule {self.decision!r}")


@dataclass(frozen=True)
class BoundaryDecision:
    """Position (1-based) of the first true probe; None when all probes
    are false (the boundary lies beyond the batch)."""

    first_true: Optional[int]


@dataclass(frozen=True)
class AllFalseDecision:
    all_false: bool
    true_positions: tuple  # 1-based positions whose probes were true


@dataclass(frozen=True)
class BatchOutcome:
    results: tuple  # per-probe verdict, Cancelled for abandoned probes
    decided: BoundaryDecision | AllFalseDecision
    calls: int  # probes that ran to a real verdict
    cancelled: int  # probes abandoned (calls + cancelled == len(results))
    wall: float


def _boundary_state(values: dict, n: int):
    """(max false position, min true position, decided?) with implication
    closure; positions are 1-based, 0 and n+1 are the sentinels."""
    max_false = max((pos for pos, val in values.items() if not val), default=0)
    min_true = min((pos for pos, val in values.items() if val), default=n + 1)
    if min_true <= max_false:
        raise OracleInconsistency(
            f"probe {min_true} true but probe {max_false} false; monotone step violated"
        )
    decided = min_true == max_false + 1 or max_false == n
    return max_false, min_true, decided


def run_batch(oracle, batch: ProbeBatch) -> BatchOutcome:
    """Execute the batch with at most q probes in flight.

    boundary-search cancels pending probes as soon as adjacent completed
    probes bracket the step boundary; all-false-check always runs every
    probe to completion so the set of true positions is deterministic.
    Late real verdicts (completed after the decision) are counted as calls
    but do not reopen the decision. A probe raising before the decision
    aborts the batch with OracleFailure.
    """
    n = len(batch.probes)
    start = time.perf_counter()
    events = [threading.Event() for _ in range(n)]
    results: list = [None] * n
    values: dict = {}  # 1-based position -> truth value, completed probes only
    decided_payload = None
    failure = None

    def probe(pos: int):
        return oracle.find_adv_ex(batch.probes[pos - 1], cancel=events[pos - 1])

    with ThreadPoolExecutor(max_workers=batch.q) as pool:
        pending = {pool.submit(probe, pos): pos for pos in range(1, n + 1)}
        while pending:
            done, _ = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                pos = pending.pop(fut)
                try:
                    verdict = fut.result()
                except Exception as exc:  # noqa: BLE001 - propagated as OracleFailure
                    if failure is None:
                        failure = exc
                    results[pos - 1] = Cancelled()
                    continue
                results[pos - 1] = verdict
                if isinstance(verdict, Cancelled):
                    continue
                if decided_payload is None and failure is None:
                    values[pos] = batch.truth(verdict)
            if failure is not None and decided_payload is None:
                for ev in events:
                    ev.set()
                continue
            if decided_payload is not None:
                continue
            if batch.decision == BOUNDARY_SEARCH:
                try:
                    max_false, min_true, decided = _boundary_state(values, n)
                except OracleInconsistency:
                    for ev in events:
                        ev.set()
                    raise
                if decided:
                    decided_payload = BoundaryDecision(
                        first_true=min_true if min_true <= n else None
                    )
                    for ev in events:
                        ev.set()
            else:
                if len(values) == n:
                    true_positions = tuple(pos for pos in range(1, n + 1) if values[pos])
                    decided_payload = AllFalseDecision(
                        all_false=not true_positions, true_positions=true_positions
                    )

    if failure is not None and decided_payload is None:
        if isinstance(failure, OracleFailure):
            raise failure
        raise OracleFailure(f"probe failed: {failure}") from failure

    assert decided_payload is not None  # every path above decides or raises
    cancelled = sum(1 for r in results if isinstance(r, Cancelled))
    return BatchOutcome(
        results=tuple(results),
        decided=decided_payload,
        calls=n - cancelled,
        cancelled=cancelled,
        wall=time.perf_counter() - start,
    )
