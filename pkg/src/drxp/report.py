"""Run reports: a canonical block and a stats block.

The canonical block holds everything that identifies the answer: the query
echo (epsilon, norm, kind, algorithm, ordering, seed, delta, disjunction
flag), the instance, the oracle identity and capability flags, the result
sets, and their verification statuses. It is byte-stable for a fixed seed,
ordering, and oracle, and deliberately excludes the processor count: the
narrowing layout may not depend on how many probes ran concurrently, so
equal canonical blocks across q values witness that determinism.

The stats block carries everything measurement-like: q, oracle calls,
parallel rounds, cancellations, wall time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

from .errors import SchemaViolation

REPORT_VERSION = 1


def norm_name(p) -> str:
    if p == math.inf:
        return "linf"
    return f"l{int(p)}"


def norm_from_name(name: str):
    table = {"l0": 0, "l1": 1, "l2": 2, "linf": math.inf}
    if name not in table:
        raise ValueError(f"unknown norm {name!r}; expected one of {sorted(table)}")
    return table[name]


@dataclass(frozen=True)
class RunReport:
    canonical: dict
    stats: dict

    def result_sets(self) -> list:
        return [frozenset(s) for s in self.canonical["results"]]


def build_report(
    *,
    kind: str,
    algorithm: str,
    epsilon: float,
    norm,
    ordering: tuple,
    seed: int,
    delta: float,
    fd_enabled: bool,
    instance_point: tuple,
    instance_label,
    oracle_name: str,
    witnesses_are_geometric: bool,
    results: list,
    verified: list,
    q: int,
    stats: Optional[dict] = None,
) -> RunReport:
    canonical = {
        "report": REPORT_VERSION,
        "kind": kind,
        "algorithm": algorithm,
        "epsilon": epsilon,
        "norm": norm_name(norm),
        "ordering": list(ordering),
        "seed": seed,
        "delta": delta,
        "fd_enabled": fd_enabled,
        "instance": {"point": list(instance_point), "label": instance_label},
        "oracle": {"name": oracle_name, "witnesses_are_geometric": witnesses_are_geometric},
        "results": [sorted(s) for s in results],
        "verified": list(verified),
    }
    return RunReport(canonical=canonical, stats=dict(stats or {}, q=q))


def report_to_json(report: RunReport) -> str:
    doc = {"canonical": report.canonical, "stats": report.stats}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def canonical_json(report: RunReport) -> str:
    return json.dumps(report.canonical, indent=2, sort_keys=True) + "\n"


def parse_report(text: str) -> RunReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid report JSON: {exc.msg}") from exc
    if not isinstance(doc, dict) or "canonical" not in doc or "stats" not in doc:
        raise SchemaViolation("report must hold canonical and stats blocks")
    return RunReport(canonical=doc["canonical"], stats=doc["stats"])
