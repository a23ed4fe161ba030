"""Classification problems, instances, norms, and distances.

Feature indices are 1-based everywhere (slicing of ordered feature sets is
written W_{1..j} in the minimal-set algorithms, which reads naturally with
1-based indexing); file formats and reports use the same convention.

Points are plain tuples: numeric values for ordinal/continuous features,
arbitrary hashable labels for categorical ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Optional, Sequence

from .errors import DomainViolation, PredictionMismatch, Unsupported

INF = math.inf

#: Accepted p values for the distance norm.
NORMS = (0, 1, 2, INF)

#: Absolute tolerance for ball-membership comparisons: grid points that land
#: exactly on the ball boundary must count as inside (the restriction is
#: non-strict, ||x - v||_p <= eps).
BALL_TOL = 1e-9


def check_norm(p) -> None:
    if p not in NORMS:
        raise ValueError(f"norm p must be one of 0, 1, 2, inf; got {p!r}")


@dataclass(frozen=True)
class Categorical:
    """Finite unordered label domain; only the 0-norm is meaningful."""

    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("categorical domain needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError("categorical values must be pairwise distinct")

    def contains(self, value) -> bool:
        return value in self.values

    def enumerable_values(self) -> Optional[tuple]:
        return self.values


@dataclass(frozen=True)
class DiscreteOrdinal:
    """Finite numeric domain, strictly increasing values."""

    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("discrete domain needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("discrete domain values must be strictly increasing")

    def contains(self, value) -> bool:
        return isinstance(value, Real) and value in self.values

    def enumerable_values(self) -> Optional[tuple]:
        return self.values


@dataclass(frozen=True)
class ContinuousOrdinal:
    """Real interval [lo, hi]; an optional declared grid makes the domain
    enumerable for the exhaustive oracle."""

    lo: float
    hi: float
    grid: Optional[tuple] = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("continuous domain needs lo < hi")
        if self.grid is not None:
            if not self.grid:
                raise ValueError("declared grid must be nonempty")
            if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
                raise ValueError("declared grid must be strictly increasing")
            if self.grid[0] < self.lo or self.grid[-1] > self.hi:
                raise ValueError("declared grid must lie within [lo, hi]")

    def contains(self, value) -> bool:
        return isinstance(value, Real) and self.lo <= value <= self.hi

    def enumerable_values(self) -> Optional[tuple]:
        return self.grid


FeatureDomain = Categorical | DiscreteOrdinal | ContinuousOrdinal


@dataclass(frozen=True)
class ClassificationProblem:
    """The tuple (features, domains, classes, classifier)."""

    domains: tuple
    classes: tuple
    classifier: Any  # evaluated through models.evaluate

    def __post_init__(self):
        if len(self.domains) < 1:
            raise ValueError("need at least one feature")
        if len(set(self.classes)) < 2:
            raise ValueError("need at least two distinct classes")

    @property
    def m(self) -> int:
        return len(self.domains)

    @property
    def features(self) -> frozenset:
        return frozenset(range(1, self.m + 1))

    def domain_of(self, i: int):
        """Domain of feature i (1-based)."""
        return self.domains[i - 1]

    def point_in_domains(self, x: Sequence) -> bool:
        if len(x) != self.m:
            return False
        return all(d.contains(val) for d, val in zip(self.domains, x))

    def check_point(self, x: Sequence) -> tuple:
        if len(x) != self.m:
            raise DomainViolation(f"point has {len(x)} coordinates, expected {self.m}")
        for i, (d, val) in enumerate(zip(self.domains, x), start=1):
            if not d.contains(val):
                raise DomainViolation(f"coordinate {i} value {val!r} outside its domain")
        return tuple(x)

    def evaluate(self, x: Sequence):
        from .models import evaluate

        return evaluate(self.classifier, self.check_point(x))


@dataclass(frozen=True)
class Instance:
    point: tuple
    label: Any


@dataclass(frozen=True)
class ExplanationProblem:
    """A classification problem plus one instance (v, c) with kappa(v) = c.

    Construct through validate_explanation_problem, which enforces the
    prediction agreement; direct construction is for internal use.
    """

    problem: ClassificationProblem
    instance: Instance

    @property
    def m(self) -> int:
        return self.problem.m

    @property
    def v(self) -> tuple:
        return self.instance.point

    @property
    def label(self):
        return self.instance.label

    @property
    def features(self) -> frozenset:
        return self.problem.features


def validate_explanation_problem(problem: ClassificationProblem, instance: Instance) -> ExplanationProblem:
    """Wrap (problem, instance) after checking v is in-domain and kappa(v) = c."""
    point = problem.check_point(instance.point)
    if instance.label not in problem.classes:
        raise DomainViolation(f"label {instance.label!r} not among classes")
    predicted = problem.evaluate(point)
    if predicted != instance.label:
        raise PredictionMismatch(predicted)
    return ExplanationProblem(problem, Instance(point, instance.label))


def _is_number(value) -> bool:
    return isinstance(value, Real)


def distance(x: Sequence, v: Sequence, p) -> float:
    """p-norm distance between two points.

    p in {1, 2}: (sum |x_i - v_i|^p)^(1/p); p = inf: max |x_i - v_i|;
    p = 0: number of differing coordinates (exact integer, categorical
    values compared by equality). Categorical values under p != 0 are an
    error since only the Hamming distance is coherent for them.
    """
    check_norm(p)
    if len(x) != len(v):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(v)}")
    if p == 0:
        return sum(1 for a, b in zip(x, v) if a != b)
    diffs = []
    for i, (a, b) in enumerate(zip(x, v), start=1):
        if not (_is_number(a) and _is_number(b)):
            raise Unsupported(f"categorical coordinate {i} under p={p}")
        diffs.append(abs(a - b))
    if p == INF:
        return max(diffs)
    if p == 1:
        return sum(diffs)
    return math.sqrt(sum(d * d for d in diffs))


def in_ball(x: Sequence, v: Sequence, p, epsilon: float, tol: float = BALL_TOL) -> bool:
    """Non-strict ball membership with absolute boundary tolerance."""
    return distance(x, v, p) <= epsilon + tol


def diff_set(x: Sequence, v: Sequence) -> frozenset:
    """1-based indices where the two points disagree."""
    return frozenset(i for i, (a, b) in enumerate(zip(x, v), start=1) if a != b)


def ordered(members: frozenset, ordering: Sequence[int]) -> list:
    """Members of a feature set listed in the declared ordering."""
    return [i for i in ordering if i in members]


def check_ordering(ordering: Sequence[int], m: int) -> tuple:
    """Validate that ordering is a permutation of 1..m."""
    if sorted(ordering) != list(range(1, m + 1)):
        raise ValueError(f"ordering must be a permutation of 1..{m}")
    return tuple(ordering)
