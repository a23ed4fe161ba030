"""Adversarial-example oracles.

An oracle answers one question: given a set of features pinned to the
instance's values, does a point inside the epsilon-ball change the
prediction? Three implementations live here and in external.py:

- GridOracle: exact exhaustive search over declared finite domains.
- SyntheticOracle: latency-simulating oracle driven by hidden breaker sets,
  for algorithm and scheduling tests.
- ExternalOracle (external.py): client for an out-of-process robustness tool.

All oracles accept concurrent calls and honour cooperative cancellation
through an optional threading.Event.
"""

from __future__ import annotations

import itertools
import threading
import time
from dataclasses import dataclass
from typing import Optional

from .errors import CombinatorialLimit, Unsupported
from .problem import BALL_TOL, ExplanationProblem, check_norm, in_ball

#: Probe cancellation is checked every this many candidate points.
CANCEL_STRIDE = 10_000

#: Default cap on the number of candidate points per grid query.
DEFAULT_POINT_LIMIT = 10_000_000


@dataclass(frozen=True)
class OracleQuery:
    """Features pinned to v's values, ball radius, and norm."""

    fixed: frozenset
    epsilon: float
    norm: float

    def __post_init__(self):
        check_norm(self.norm)
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")


@dataclass(frozen=True)
class AdvFound:
    """An adversarial example exists; witness is a point for geometric
    oracles, None for symbolic ones."""

    witness: Optional[tuple]


@dataclass(frozen=True)
class Robust:
    """No adversarial example in the restricted ball."""


@dataclass(frozen=True)
class Cancelled:
    """Call abandoned before completion."""


OracleVerdict = AdvFound | Robust | Cancelled


def is_adv(verdict) -> bool:
    return isinstance(verdict, AdvFound)


def verify_witness(problem: ExplanationProblem, witness: tuple, query: OracleQuery, tol: float = BALL_TOL) -> bool:
    """True iff witness agrees with v on all fixed features, lies in the
    epsilon-ball, and flips the prediction."""
    point = problem.problem.check_point(witness)
    v = problem.v
    if any(point[i - 1] != v[i - 1] for i in query.fixed):
        return False
    if not in_ball(point, v, query.norm, query.epsilon, tol):
        return False
    return problem.problem.evaluate(point) != problem.label


class Oracle:
    """Interface: find_adv_ex plus capability metadata."""

    #: False when AdvFound witnesses are symbolic markers that must not be
    #: geometrically verified.
    witnesses_are_geometric = True

    def find_adv_ex(self, query: OracleQuery, cancel: Optional[threading.Event] = None) -> OracleVerdict:
        raise NotImplementedError


class GridOracle(Oracle):
    """Exhaustive search over the finite grid of free-feature values.

    Exact: Robust means no constrained adversarial example exists on the
    declared domains. The witness returned is the first class-changing
    in-ball point in lexicographic order over domain-value order.
    """

    def __init__(self, problem: ExplanationProblem, point_limit: int = DEFAULT_POINT_LIMIT, tol: float = BALL_TOL):
        self.problem = problem
        self.point_limit = point_limit
        self.tol = tol

    def _value_lists(self, fixed: frozenset) -> list:
        prob, v = self.problem.problem, self.problem.v
        lists = []
        for i in range(1, prob.m + 1):
            if i in fixed:
                lists.append((v[i - 1],))
            else:
                values = prob.domain_of(i).enumerable_values()
                if values is None:
                    raise Unsupported(f"feature {i} is continuous with no declared grid and not fixed")
                lists.append(values)
        count = 1
        for vals in lists:
            count *= len(vals)
            if count > self.point_limit:
                raise CombinatorialLimit(f"more than {self.point_limit} candidate points")
        return lists

    def find_adv_ex(self, query: OracleQuery, cancel: Optional[threading.Event] = None) -> OracleVerdict:
        prob, v, label = self.problem.problem, self.problem.v, self.problem.label
        lists = self._value_lists(query.fixed)
        for n, x in enumerate(itertools.product(*lists)):
            if cancel is not None and n % CANCEL_STRIDE == 0 and cancel.is_set():
                return Cancelled()
            if not in_ball(x, v, query.norm, query.epsilon, self.tol):
                continue
            if prob.evaluate(x) != label:
                return AdvFound(witness=x)
        return Robust()

    def witness_set(self, query: OracleQuery) -> list:
        """All adversarial examples in the restricted ball (debug mode)."""
        prob, v, label = self.problem.problem, self.problem.v, self.problem.label
        lists = self._value_lists(query.fixed)
        out = []
        for x in itertools.product(*lists):
            if in_ball(x, v, query.norm, query.epsilon, self.tol) and prob.evaluate(x) != label:
                out.append(x)
        return out


@dataclass(frozen=True)
class SyntheticSpec:
    """Hidden minimal free-sets, each sufficient to flip the prediction.

    An adversarial example exists exactly when some breaker is disjoint
    from the fixed set; latency simulates an expensive robustness tool.
    """

    m: int
    hidden_breakers: tuple  # of frozensets
    latency: float = 0.0
    seed: int = 0

    def __post_init__(self):
        breakers = tuple(frozenset(b) for b in self.hidden_breakers)
        object.__setattr__(self, "hidden_breakers", breakers)
        if not breakers:
            raise ValueError("need at least one hidden breaker")
        for b in breakers:
            if not b or not b <= frozenset(range(1, self.m + 1)):
                raise ValueError("breakers must be nonempty subsets of 1..m")
        for a, b in itertools.combinations(breakers, 2):
            if a <= b or b <= a:
                raise ValueError("breakers must form an antichain")


class SyntheticOracle(Oracle):
    """Latency-simulating oracle over a SyntheticSpec; deterministic."""

    witnesses_are_geometric = False

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec

    def find_adv_ex(self, query: OracleQuery, cancel: Optional[threading.Event] = None) -> OracleVerdict:
        if self.spec.latency > 0:
            if cancel is not None:
                if cancel.wait(timeout=self.spec.latency):
                    return Cancelled()
            else:
                time.sleep(self.spec.latency)
        elif cancel is not None and cancel.is_set():
            return Cancelled()
        if any(b.isdisjoint(query.fixed) for b in self.spec.hidden_breakers):
            return AdvFound(witness=None)
        return Robust()


class CountingOracle(Oracle):
    """Wrapper adding thread-safe call counting, call-sequence recording,
    and (optionally) witness re-verification on every AdvFound."""

    def __init__(self, inner: Oracle, verify: bool = False, problem: Optional[ExplanationProblem] = None):
        self.inner = inner
        self.verify = verify
        self.problem = problem if problem is not None else getattr(inner, "problem", None)
        self.witnesses_are_geometric = inner.witnesses_are_geometric
        self._lock = threading.Lock()
        self.calls = 0
        self.cancelled = 0
        self.sequence = []  # (fixed, epsilon) per completed call, in issue order

    def find_adv_ex(self, query: OracleQuery, cancel: Optional[threading.Event] = None) -> OracleVerdict:
        verdict = self.inner.find_adv_ex(query, cancel)
        with self._lock:
            if isinstance(verdict, Cancelled):
                self.cancelled += 1
            else:
                self.calls += 1
                self.sequence.append((query.fixed, query.epsilon))
        if self.verify and isinstance(verdict, AdvFound) and self.witnesses_are_geometric:
            assert self.problem is not None
            if not verify_witness(self.problem, verdict.witness, query):
                raise AssertionError(f"oracle returned invalid witness {verdict.witness!r}")
        return verdict


class MemoOracle(Oracle):
    """Wrapper caching verdicts of a deterministic oracle by query.

    Cancelled outcomes are never cached. Useful under extractors that
    revisit the same fixed sets; counting wrappers stacked on top of this
    one still observe the algorithm's true call pattern.
    """

    def __init__(self, inner: Oracle):
        self.inner = inner
        self.problem = getattr(inner, "problem", None)
        self.witnesses_are_geometric = inner.witnesses_are_geometric
        self._lock = threading.Lock()
        self._cache = {}

    def find_adv_ex(self, query: OracleQuery, cancel: Optional[threading.Event] = None) -> OracleVerdict:
        key = (query.fixed, query.epsilon, query.norm)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        verdict = self.inner.find_adv_ex(query, cancel)
        if not isinstance(verdict, Cancelled):
            with self._lock:
                self._cache[key] = verdict
        return verdict
