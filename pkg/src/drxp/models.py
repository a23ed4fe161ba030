"""Concrete classifier representations, their evaluation, and the model
file schema.

A model document is a single JSON object:

    {
      "schema": 1,
      "domains": [
        {"kind": "continuous", "lo": -1.0, "hi": 4.0, "grid": [...]},   # grid optional
        {"kind": "discrete", "values": [-0.5, 0, 0.5, 1]},
        {"kind": "categorical", "values": ["a", "b"]}
      ],
      "classes": [0, 1],
      "classifier": { "kind": ..., ... }
    }

Classifier kinds:

    {"kind": "lookup", "entries": [{"point": [...], "label": L}, ...], "default": L}
    {"kind": "linear", "weights": [...], "bias": B, "pos_label": L, "neg_label": L}
    {"kind": "region", "constraints": [{"coeffs": [...], "op": "<"|"<="|">="|">",
       "bound": B}, ...], "inside_label": L, "outside_label": L}
    {"kind": "tree", "root": <node>} where <node> is {"leaf": L}
       or {"feature": i, "threshold": t, "left": <node>, "right": <node>}
       or {"feature": i, "branches": {"<value>": <node>, ...}, "otherwise": <node>}

Threshold splits send x_i <= t left and x_i > t right; the tie value goes
left. Categorical branches key on str(value); unlisted values fall to
"otherwise".
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .errors import SchemaViolation
from .problem import (
    Categorical,
    ClassificationProblem,
    ContinuousOrdinal,
    DiscreteOrdinal,
    Instance,
    validate_explanation_problem,
)


@dataclass(frozen=True)
class LookupTable:
    """Finite exceptions over discrete domains plus a default class."""

    entries: tuple  # ((point, label), ...)
    default: Any

    def lookup(self, x: tuple):
        for point, label in self.entries:
            if point == x:
                return label
        return self.default


@dataclass(frozen=True)
class LinearThreshold:
    """Predicts pos_label iff w . x + b >= 0."""

    weights: tuple
    bias: float
    pos_label: Any
    neg_label: Any


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple
    op: str  # one of < <= >= >
    bound: float

    _OPS = {
        "<": lambda lhs, b: lhs < b,
        "<=": lambda lhs, b: lhs <= b,
        ">=": lambda lhs, b: lhs >= b,
        ">": lambda lhs, b: lhs > b,
    }

    def holds(self, x: Sequence) -> bool:
        lhs = sum(a * xi for a, xi in zip(self.coeffs, x))
        return self._OPS[self.op](lhs, self.bound)


@dataclass(frozen=True)
class RegionConjunction:
    """Predicts inside_label iff every linear inequality holds."""

    constraints: tuple
    inside_label: Any
    outside_label: Any


@dataclass(frozen=True)
class Leaf:
    label: Any


@dataclass(frozen=True)
class ThresholdSplit:
    feature: int  # 1-based
    threshold: float
    left: Any
    right: Any


@dataclass(frozen=True)
class CategoricalSplit:
    feature: int
    branches: tuple  # ((value, node), ...)
    otherwise: Any


@dataclass(frozen=True)
class DecisionTree:
    root: Any


Classifier = LookupTable | LinearThreshold | RegionConjunction | DecisionTree


def evaluate(classifier: Classifier, x: tuple):
    """Evaluate a classifier at a point; pure and total on the domains."""
    if isinstance(classifier, LookupTable):
        return classifier.lookup(tuple(x))
    if isinstance(classifier, LinearThreshold):
        score = sum(w * xi for w, xi in zip(classifier.weights, x)) + classifier.bias
        return classifier.pos_label if score >= 0 else classifier.neg_label
    if isinstance(classifier, RegionConjunction):
        inside = all(c.holds(x) for c in classifier.constraints)
        return classifier.inside_label if inside else classifier.outside_label
    if isinstance(classifier, DecisionTree):
        node = classifier.root
        while not isinstance(node, Leaf):
            if isinstance(node, ThresholdSplit):
                value = x[node.feature - 1]
                node = node.left if value <= node.threshold else node.right
            else:
                value = x[node.feature - 1]
                for branch_value, child in node.branches:
                    if value == branch_value:
                        node = child
                        break
                else:
                    node = node.otherwise
        return node.label
    raise TypeError(f"unknown classifier {type(classifier).__name__}")


# ---------------------------------------------------------------------------
# Model document parsing and serialization
# ---------------------------------------------------------------------------

SCHEMA_VERSION = 1


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaViolation(f"{where}: missing field {key!r}")
    return doc[key]


def _parse_domain(entry: dict, index: int):
    where = f"domains[{index}]"
    if not isinstance(entry, dict):
        raise SchemaViolation(f"{where}: expected object")
    kind = _require(entry, "kind", where)
    try:
        if kind == "continuous":
            grid = entry.get("grid")
            return ContinuousOrdinal(
                lo=float(_require(entry, "lo", where)),
                hi=float(_require(entry, "hi", where)),
                grid=tuple(grid) if grid is not None else None,
            )
        if kind == "discrete":
            return DiscreteOrdinal(values=tuple(_require(entry, "values", where)))
        if kind == "categorical":
            return Categorical(values=tuple(_require(entry, "values", where)))
    except ValueError as exc:
        raise SchemaViolation(f"{where}: {exc}") from exc
    raise SchemaViolation(f"{where}: unknown domain kind {kind!r}")


def _parse_tree_node(node: dict, m: int, where: str):
    if not isinstance(node, dict):
        raise SchemaViolation(f"{where}: expected object")
    if "leaf" in node:
        return Leaf(node["leaf"])
    feature = _require(node, "feature", where)
    if not isinstance(feature, int) or not 1 <= feature <= m:
        raise SchemaViolation(f"{where}: feature index {feature!r} out of range 1..{m}")
    if "threshold" in node:
        return ThresholdSplit(
            feature=feature,
            threshold=float(node["threshold"]),
            left=_parse_tree_node(_require(node, "left", where), m, where + ".left"),
            right=_parse_tree_node(_require(node, "right", where), m, where + ".right"),
        )
    if "branches" in node:
        branches = tuple(
            (_coerce_branch_key(key), _parse_tree_node(child, m, f"{where}.branches[{key}]"))
            for key, child in node["branches"].items()
        )
        return CategoricalSplit(
            feature=feature,
            branches=branches,
            otherwise=_parse_tree_node(_require(node, "otherwise", where), m, where + ".otherwise"),
        )
    raise SchemaViolation(f"{where}: node needs leaf, threshold, or branches")


def _coerce_branch_key(key: str):
    # JSON object keys are strings; numeric-looking keys match numeric values.
    try:
        as_float = float(key)
    except ValueError:
        return key
    return int(as_float) if as_float.is_integer() else as_float


def _parse_classifier(entry: dict, m: int):
    where = "classifier"
    if not isinstance(entry, dict):
        raise SchemaViolation(f"{where}: expected object")
    kind = _require(entry, "kind", where)
    if kind == "lookup":
        entries = []
        for k, item in enumerate(_require(entry, "entries", where)):
            point = tuple(_require(item, "point", f"{where}.entries[{k}]"))
            if len(point) != m:
                raise SchemaViolation(f"{where}.entries[{k}]: point length {len(point)} != {m}")
            entries.append((point, _require(item, "label", f"{where}.entries[{k}]")))
        return LookupTable(entries=tuple(entries), default=_require(entry, "default", where))
    if kind == "linear":
        weights = tuple(_require(entry, "weights", where))
        if len(weights) != m:
            raise SchemaViolation(f"{where}: {len(weights)} weights for {m} features")
        return LinearThreshold(
            weights=weights,
            bias=float(_require(entry, "bias", where)),
            pos_label=_require(entry, "pos_label", where),
            neg_label=_require(entry, "neg_label", where),
        )
    if kind == "region":
        constraints = []
        for k, item in enumerate(_require(entry, "constraints", where)):
            coeffs = tuple(_require(item, "coeffs", f"{where}.constraints[{k}]"))
            if len(coeffs) != m:
                raise SchemaViolation(f"{where}.constraints[{k}]: {len(coeffs)} coeffs for {m} features")
            op = _require(item, "op", f"{where}.constraints[{k}]")
            if op not in ("<", "<=", ">=", ">"):
                raise SchemaViolation(f"{where}.constraints[{k}]: bad op {op!r}")
            constraints.append(
                LinearConstraint(coeffs=coeffs, op=op, bound=float(_require(item, "bound", f"{where}.constraints[{k}]")))
            )
        return RegionConjunction(
            constraints=tuple(constraints),
            inside_label=_require(entry, "inside_label", where),
            outside_label=_require(entry, "outside_label", where),
        )
    if kind == "tree":
        return DecisionTree(root=_parse_tree_node(_require(entry, "root", where), m, f"{where}.root"))
    raise SchemaViolation(f"{where}: unknown classifier kind {kind!r}")


def problem_from_document(doc) -> ClassificationProblem:
    """Build a ClassificationProblem from a parsed model document."""
    if not isinstance(doc, dict):
        raise SchemaViolation("model document must be a JSON object")
    schema = _require(doc, "schema", "document")
    if schema != SCHEMA_VERSION:
        raise SchemaViolation(f"unsupported schema version {schema!r}")
    raw_domains = _require(doc, "domains", "document")
    if not isinstance(raw_domains, list) or not raw_domains:
        raise SchemaViolation("domains: expected nonempty list")
    domains = tuple(_parse_domain(d, i) for i, d in enumerate(raw_domains))
    classes = tuple(_require(doc, "classes", "document"))
    if len(set(classes)) < 2:
        raise SchemaViolation("classes: need at least two distinct labels")
    classifier = _parse_classifier(_require(doc, "classifier", "document"), len(domains))
    try:
        problem = ClassificationProblem(domains=domains, classes=classes, classifier=classifier)
    except ValueError as exc:
        raise SchemaViolation(str(exc)) from exc
    if isinstance(classifier, LookupTable):
        for k, (point, label) in enumerate(classifier.entries):
            if not problem.point_in_domains(point):
                raise SchemaViolation(f"classifier.entries[{k}]: point outside the declared domains")
            if label not in classes:
                raise SchemaViolation(f"classifier.entries[{k}]: label {label!r} not among classes")
        if classifier.default not in classes:
            raise SchemaViolation(f"classifier.default: label {classifier.default!r} not among classes")
    return problem


def parse_model(text: str) -> ClassificationProblem:
    """Parse a model file's content."""
    if not text.strip():
        raise SchemaViolation("empty model document")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return problem_from_document(doc)


def _domain_to_document(domain) -> dict:
    if isinstance(domain, ContinuousOrdinal):
        out = {"kind": "continuous", "lo": domain.lo, "hi": domain.hi}
        if domain.grid is not None:
            out["grid"] = list(domain.grid)
        return out
    if isinstance(domain, DiscreteOrdinal):
        return {"kind": "discrete", "values": list(domain.values)}
    return {"kind": "categorical", "values": list(domain.values)}


def _tree_node_to_document(node) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.label}
    if isinstance(node, ThresholdSplit):
        return {
            "feature": node.feature,
            "threshold": node.threshold,
            "left": _tree_node_to_document(node.left),
            "right": _tree_node_to_document(node.right),
        }
    return {
        "feature": node.feature,
        "branches": {str(value): _tree_node_to_document(child) for value, child in node.branches},
        "otherwise": _tree_node_to_document(node.otherwise),
    }


def _classifier_to_document(classifier) -> dict:
    if isinstance(classifier, LookupTable):
        return {
            "kind": "lookup",
            "entries": [{"point": list(p), "label": label} for p, label in classifier.entries],
            "default": classifier.default,
        }
    if isinstance(classifier, LinearThreshold):
        return {
            "kind": "linear",
            "weights": list(classifier.weights),
            "bias": classifier.bias,
            "pos_label": classifier.pos_label,
            "neg_label": classifier.neg_label,
        }
    if isinstance(classifier, RegionConjunction):
        return {
            "kind": "region",
            "constraints": [
                {"coeffs": list(c.coeffs), "op": c.op, "bound": c.bound} for c in classifier.constraints
            ],
            "inside_label": classifier.inside_label,
            "outside_label": classifier.outside_label,
        }
    if isinstance(classifier, DecisionTree):
        return {"kind": "tree", "root": _tree_node_to_document(classifier.root)}
    raise TypeError(f"unknown classifier {type(classifier).__name__}")


def problem_to_document(problem: ClassificationProblem) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "domains": [_domain_to_document(d) for d in problem.domains],
        "classes": list(problem.classes),
        "classifier": _classifier_to_document(problem.classifier),
    }


def serialize_model(problem: ClassificationProblem) -> str:
    return json.dumps(problem_to_document(problem), indent=2, sort_keys=True)


def parse_instance(text: str, problem: ClassificationProblem) -> Instance:
    """Parse the inline instance form "v1,...,vm:c".

    Values are read as numbers when possible, else kept as strings
    (categorical labels); the label likewise.
    """
    if ":" not in text:
        raise SchemaViolation('instance must look like "v1,...,vm:c"')
    coords_part, _, label_part = text.rpartition(":")
    coords = tuple(_read_value(tok.strip()) for tok in coords_part.split(","))
    return Instance(point=coords, label=_read_value(label_part.strip()))


def _read_value(token: str):
    try:
        as_float = float(token)
    except ValueError:
        return token
    return int(as_float) if as_float.is_integer() else as_float


# ---------------------------------------------------------------------------
# Random problems for property tests
# ---------------------------------------------------------------------------

_VALUE_LATTICE = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5)


def random_problem(rng: random.Random, m_max: int = 6, domain_max: int = 4, exceptions_max: int = 8):
    """Seeded random LookupTable problem plus a valid explanation problem.

    Small by construction so brute-force enumeration over all points and
    all feature subsets stays tractable.
    """
    m = rng.randint(2, m_max)
    domains = []
    for _ in range(m):
        size = rng.randint(2, domain_max)
        values = tuple(sorted(rng.sample(_VALUE_LATTICE, size)))
        domains.append(DiscreteOrdinal(values=values))
    v = tuple(rng.choice(d.values) for d in domains)
    entries = []
    seen = set()
    for _ in range(rng.randint(1, exceptions_max)):
        point = tuple(rng.choice(d.values) for d in domains)
        if point in seen:
            continue
        seen.add(point)
        entries.append((point, rng.choice((0, 1))))
    classifier = LookupTable(entries=tuple(entries), default=1)
    problem = ClassificationProblem(domains=tuple(domains), classes=(0, 1), classifier=classifier)
    label = evaluate(classifier, v)
    return validate_explanation_problem(problem, Instance(point=v, label=label))
