"""Model document loading and prediction.

A model document is one JSON object: a "schema" version, a "domains"
list (continuous with an optional value grid, discrete, categorical),
the "classes" list, and a "classifier" tagged by kind:

    lookup  — explicit point -> label entries plus a default label
    linear  — pos_label iff weights . x + bias >= 0
    region  — inside_label iff every linear inequality holds
    tree    — threshold splits (tie goes left) and categorical branches
              keyed by str(value), with an "otherwise" arm

Nothing in this module knows about the wire protocol; it only turns a
parsed document into something with domains and a predict(point).
"""

from __future__ import annotations

from dataclasses import dataclass


class BadDocument(Exception):
    """The document does not follow the model schema."""


def _need(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise BadDocument(f"{where}: missing field {key!r}")
    return obj[key]


def _numbers(items, where):
    out = []
    for k, item in enumerate(items):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise BadDocument(f"{where}[{k}]: expected a number")
        out.append(item)
    return tuple(out)


@dataclass(frozen=True)
class Domain:
    """One feature's value set. values is None when the feature is
    continuous with no declared grid, i.e. not exhaustively searchable."""

    values: tuple | None
    categorical: bool

    def contains(self, value) -> bool:
        if self.values is None:
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        return any(value == known for known in self.values)


def _parse_domain(entry, where) -> Domain:
    kind = _need(entry, "kind", where)
    if kind == "continuous":
        lo = _need(entry, "lo", where)
        hi = _need(entry, "hi", where)
        if not isinstance(lo, (int, float)) or not isinstance(hi, (int, float)) or lo > hi:
            raise BadDocument(f"{where}: bad continuous bounds")
        grid = entry.get("grid")
        if grid is None:
            return Domain(values=None, categorical=False)
        values = _numbers(grid, where + ".grid")
        if any(not lo <= g <= hi for g in values):
            raise BadDocument(f"{where}: grid value outside [lo, hi]")
        return Domain(values=values, categorical=False)
    if kind == "discrete":
        return Domain(values=_numbers(_need(entry, "values", where), where + ".values"), categorical=False)
    if kind == "categorical":
        values = _need(entry, "values", where)
        if not isinstance(values, list) or not values:
            raise BadDocument(f"{where}: categorical values must be a non-empty list")
        return Domain(values=tuple(values), categorical=True)
    raise BadDocument(f"{where}: unknown domain kind {kind!r}")


class Lookup:
    def __init__(self, entries, default):
        self.table = {point: label for point, label in entries}
        self.default = default

    def predict(self, x):
        return self.table.get(tuple(x), self.default)


class Linear:
    def __init__(self, weights, bias, pos_label, neg_label):
        self.weights = weights
        self.bias = bias
        self.pos_label = pos_label
        self.neg_label = neg_label

    def predict(self, x):
        score = sum(w * xi for w, xi in zip(self.weights, x)) + self.bias
        return self.pos_label if score >= 0 else self.neg_label


_OPS = {
    "<": lambda lhs, b: lhs < b,
    "<=": lambda lhs, b: lhs <= b,
    ">=": lambda lhs, b: lhs >= b,
    ">": lambda lhs, b: lhs > b,
}


class Region:
    def __init__(self, constraints, inside_label, outside_label):
        self.constraints = constraints  # (coeffs, op, bound) triples
        self.inside_label = inside_label
        self.outside_label = outside_label

    def predict(self, x):
        for coeffs, op, bound in self.constraints:
            lhs = sum(a * xi for a, xi in zip(coeffs, x))
            if not _OPS[op](lhs, bound):
                return self.outside_label
        return self.inside_label


class Tree:
    def __init__(self, root):
        self.root = root

    def predict(self, x):
        node = self.root
        while "leaf" not in node:
            value = x[node["feature"] - 1]
            if "threshold" in node:
                node = node["left"] if value <= node["threshold"] else node["right"]
            else:
                node = node["branches"].get(str(value), node["otherwise"])
        return node["leaf"]


def _parse_tree_node(node, m, where):
    if not isinstance(node, dict):
        raise BadDocument(f"{where}: tree node must be an object")
    if "leaf" in node:
        return {"leaf": node["leaf"]}
    feature = _need(node, "feature", where)
    if not isinstance(feature, int) or not 1 <= feature <= m:
        raise BadDocument(f"{where}: feature must be in 1..{m}")
    if "threshold" in node:
        return {
            "feature": feature,
            "threshold": node["threshold"],
            "left": _parse_tree_node(_need(node, "left", where), m, where + ".left"),
            "right": _parse_tree_node(_need(node, "right", where), m, where + ".right"),
        }
    branches = _need(node, "branches", where)
    if not isinstance(branches, dict):
        raise BadDocument(f"{where}: branches must be an object")
    return {
        "feature": feature,
        "branches": {
            key: _parse_tree_node(child, m, f"{where}.branches[{key}]")
            for key, child in branches.items()
        },
        "otherwise": _parse_tree_node(_need(node, "otherwise", where), m, where + ".otherwise"),
    }


def _parse_classifier(entry, m, classes):
    kind = _need(entry, "kind", "classifier")
    if kind == "lookup":
        entries = []
        for k, item in enumerate(_need(entry, "entries", "classifier")):
            where = f"classifier.entries[{k}]"
            point = _need(item, "point", where)
            if not isinstance(point, list) or len(point) != m:
                raise BadDocument(f"{where}: point must list {m} values")
            label = _need(item, "label", where)
            if label not in classes:
                raise BadDocument(f"{where}: label {label!r} not among classes")
            entries.append((tuple(point), label))
        default = _need(entry, "default", "classifier")
        if default not in classes:
            raise BadDocument(f"classifier: default label {default!r} not among classes")
        return Lookup(entries, default)
    if kind == "linear":
        weights = _numbers(_need(entry, "weights", "classifier"), "classifier.weights")
        if len(weights) != m:
            raise BadDocument(f"classifier: expected {m} weights")
        bias = _need(entry, "bias", "classifier")
        return Linear(weights, bias, _need(entry, "pos_label", "classifier"), _need(entry, "neg_label", "classifier"))
    if kind == "region":
        constraints = []
        for k, item in enumerate(_need(entry, "constraints", "classifier")):
            where = f"classifier.constraints[{k}]"
            coeffs = _numbers(_need(item, "coeffs", where), where + ".coeffs")
            if len(coeffs) != m:
                raise BadDocument(f"{where}: expected {m} coefficients")
            op = _need(item, "op", where)
            if op not in _OPS:
                raise BadDocument(f"{where}: unknown comparison {op!r}")
            constraints.append((coeffs, op, _need(item, "bound", where)))
        return Region(tuple(constraints), _need(entry, "inside_label", "classifier"), _need(entry, "outside_label", "classifier"))
    if kind == "tree":
        return Tree(_parse_tree_node(_need(entry, "root", "classifier"), m, "classifier.root"))
    raise BadDocument(f"classifier: unknown kind {kind!r}")


@dataclass(frozen=True)
class Model:
    domains: tuple
    classes: tuple
    classifier: object

    @property
    def m(self) -> int:
        return len(self.domains)

    def predict(self, x):
        return self.classifier.predict(x)


def parse_document(doc) -> Model:
    """Build a Model from a decoded document, or raise BadDocument."""
    if not isinstance(doc, dict):
        raise BadDocument("model document must be an object")
    schema = _need(doc, "schema", "model")
    if schema != 1:
        raise BadDocument(f"unsupported schema version {schema!r}")
    raw_domains = _need(doc, "domains", "model")
    if not isinstance(raw_domains, list) or not raw_domains:
        raise BadDocument("model: domains must be a non-empty list")
    domains = tuple(_parse_domain(d, f"domains[{k}]") for k, d in enumerate(raw_domains))
    classes = _need(doc, "classes", "model")
    if not isinstance(classes, list) or len(classes) < 2:
        raise BadDocument("model: need at least two classes")
    classifier = _parse_classifier(_need(doc, "classifier", "model"), len(domains), tuple(classes))
    return Model(domains=domains, classes=tuple(classes), classifier=classifier)
