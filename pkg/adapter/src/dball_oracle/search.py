"""Exhaustive search for a class-changing point inside a distance ball.

The candidate space is the cross product of the declared per-feature
value sets, with features named in the fixed set pinned to the reference
point. The scan is lazy, so very large products cost nothing until
visited, and it polls a cancellation flag as it goes.
"""

from __future__ import annotations

import itertools
import math
import threading

# Boundary points stay inside the ball despite float roundoff. The
# explainer's in-process oracle applies the same slack, which keeps the
# two implementations verdict-for-verdict compatible on exact radii.
BOUNDARY_SLACK = 1e-9

# How many candidates go by between looks at the cancel flag.
CANCEL_STRIDE = 128


class SearchUnsupported(Exception):
    """The query needs a value set the document does not declare."""


# Hook return value meaning the cancel flag ended the scan.
CANCELLED = object()


def distance(x, v, norm) -> float:
    """p-norm distance; norm is 0, 1, 2 or math.inf. The Hamming norm
    counts differing coordinates and is the only one defined for
    categorical values."""
    if norm == 0:
        return sum(1 for a, b in zip(x, v) if a != b)
    diffs = [abs(a - b) for a, b in zip(x, v)]
    if norm == math.inf:
        return max(diffs)
    if norm == 1:
        return sum(diffs)
    return math.sqrt(sum(d * d for d in diffs))


def within(x, v, norm, epsilon: float) -> bool:
    return distance(x, v, norm) <= epsilon + BOUNDARY_SLACK


def value_lists(model, point, fixed) -> list:
    lists = []
    for i, domain in enumerate(model.domains, start=1):
        if i in fixed:
            lists.append((point[i - 1],))
        elif domain.values is None:
            raise SearchUnsupported(f"feature {i} is continuous with no grid; cannot enumerate")
        else:
            lists.append(domain.values)
    return lists


def grid_search(session, fixed, epsilon: float, cancelled: threading.Event):
    """Default hook: first in-ball point the model labels differently,
    in lexicographic order over the declared value order. Returns the
    point, None when the ball is exhausted, or CANCELLED when the flag
    was raised mid-scan."""
    lists = value_lists(session.model, session.point, fixed)
    v, label, norm = session.point, session.label, session.norm
    for n, x in enumerate(itertools.product(*lists)):
        if n % CANCEL_STRIDE == 0 and cancelled.is_set():
            return CANCELLED
        if not within(x, v, norm, epsilon):
            continue
        if session.model.predict(x) != label:
            return x
    return None
