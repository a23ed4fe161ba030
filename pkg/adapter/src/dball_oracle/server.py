"""Line-delimited oracle server over stdin/stdout.

One JSON record per line. The first record must be an init carrying the
model document, the reference instance and the norm; the server answers
{"type": "ready"} and then serves check records until shutdown or end of
input. Each check runs on a pool worker, so answers may come back out of
order; a cancel record raises the matching check's flag and the worker
reports status "cancelled" promptly. Exactly one result is emitted per
request id. Any protocol violation is answered with an error record and
exit status 1.

A custom search hook (for example a wrapped network verifier) can stand
in for the exhaustive scan; see resolve_hook.
"""

from __future__ import annotations

import argparse
import importlib
import json
import math
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .model import BadDocument, Model, parse_document
from .search import CANCELLED, SearchUnsupported, grid_search, within

WIRE_NORMS = {0: 0, 1: 1, 2: 2, "inf": math.inf}

DEFAULT_WORKERS = 4


class ProtocolError(Exception):
    """The conversation left the protocol; the session must end."""


@dataclass(frozen=True)
class Session:
    """Everything a check needs: the model, the instance and the norm."""

    model: Model
    point: tuple
    label: object
    norm: float

    def validate_witness(self, x, fixed, epsilon) -> bool:
        """The constrained adversarial-example conditions: on-domain,
        fixed coordinates untouched, inside the ball, class changed."""
        if len(x) != self.model.m:
            return False
        if any(not d.contains(val) for d, val in zip(self.model.domains, x)):
            return False
        if any(x[i - 1] != self.point[i - 1] for i in fixed):
            return False
        if not within(x, self.point, self.norm, epsilon):
            return False
        return self.model.predict(x) != self.label


def build_session(record) -> Session:
    if record.get("protocol") != 1:
        raise ProtocolError(f"unsupported protocol {record.get('protocol')!r}")
    try:
        model = parse_document(record.get("model"))
    except BadDocument as exc:
        raise ProtocolError(f"bad model: {exc}") from exc
    instance = record.get("instance")
    if not isinstance(instance, dict) or "point" not in instance or "label" not in instance:
        raise ProtocolError("init needs an instance with point and label")
    point = instance["point"]
    if not isinstance(point, list) or len(point) != model.m:
        raise ProtocolError(f"instance point must list {model.m} values")
    point = tuple(point)
    label = instance["label"]
    if label not in model.classes:
        raise ProtocolError(f"instance label {label!r} not among classes")
    if any(not d.contains(val) for d, val in zip(model.domains, point)):
        raise ProtocolError("instance point is outside the declared domains")
    norm = record.get("norm")
    if norm not in WIRE_NORMS:
        raise ProtocolError(f"norm must be one of 0, 1, 2, \"inf\", not {norm!r}")
    norm = WIRE_NORMS[norm]
    if norm != 0 and any(d.categorical for d in model.domains):
        raise ProtocolError("categorical domains are only searchable under the Hamming norm")
    if model.predict(point) != label:
        raise ProtocolError("model does not predict the declared label at the instance")
    return Session(model=model, point=point, label=label, norm=norm)


class OracleServer:
    """serve() drives one whole session and returns the exit status."""

    def __init__(self, hook=None, workers: int = DEFAULT_WORKERS):
        self.hook = hook or grid_search
        self.workers = workers
        self.session = None
        self._out = None
        self._out_lock = threading.Lock()
        self._lock = threading.Lock()
        self._flags: dict = {}  # request id -> cancel event, while in flight
        self._fatal = threading.Event()
        self._fatal_msg = ""

    # -- emission ------------------------------------------------------

    def _emit(self, record) -> None:
        with self._out_lock:
            self._out.write(json.dumps(record) + "\n")
            self._out.flush()

    def _fail(self, msg: str) -> None:
        """Emit one error record, release every in-flight scan, and make
        the main loop exit with status 1. First failure wins."""
        with self._lock:
            if self._fatal.is_set():
                return
            self._fatal_msg = msg
            self._fatal.set()
            flags = list(self._flags.values())
            self._flags.clear()
        for flag in flags:
            flag.set()
        self._emit({"type": "error", "msg": msg})

    # -- per-request work ----------------------------------------------

    def _run_check(self, call_id: int, fixed: frozenset, epsilon: float, flag: threading.Event) -> None:
        try:
            found = self.hook(self.session, fixed, epsilon, flag)
        except SearchUnsupported as exc:
            self._fail(str(exc))
            return
        except Exception as exc:  # a broken hook must not hang the client
            self._fail(f"search hook failed: {exc}")
            return
        with self._lock:
            if call_id not in self._flags:
                return  # already answered; first result wins
            del self._flags[call_id]
        if found is CANCELLED:
            self._emit({"type": "result", "id": call_id, "status": "cancelled"})
        elif found is None:
            self._emit({"type": "result", "id": call_id, "status": "robust"})
        elif self.session.validate_witness(found, fixed, epsilon):
            self._emit({"type": "result", "id": call_id, "status": "adv", "witness": list(found)})
        else:
            self._fail(f"hook witness {found!r} violates the constrained-example conditions")

    def _start_check(self, record, pool) -> None:
        call_id = record.get("id")
        if isinstance(call_id, bool) or not isinstance(call_id, int):
            raise ProtocolError("check needs an integer id")
        fixed = record.get("fixed")
        if not isinstance(fixed, list) or any(
            not isinstance(i, int) or not 1 <= i <= self.session.model.m for i in fixed
        ):
            raise ProtocolError("fixed must list feature indices in 1..m")
        epsilon = record.get("epsilon")
        if isinstance(epsilon, bool) or not isinstance(epsilon, (int, float)) or epsilon <= 0:
            raise ProtocolError("epsilon must be a positive number")
        flag = threading.Event()
        with self._lock:
            if call_id in self._flags:
                raise ProtocolError(f"request id {call_id} is already in flight")
            self._flags[call_id] = flag
        pool.submit(self._run_check, call_id, frozenset(fixed), epsilon, flag)

    def _cancel(self, record) -> None:
        call_id = record.get("id")
        if isinstance(call_id, bool) or not isinstance(call_id, int):
            raise ProtocolError("cancel needs an integer id")
        # late cancels for finished ids are fine and do nothing
        with self._lock:
            flag = self._flags.get(call_id)
        if flag is not None:
            flag.set()

    # -- session loop ----------------------------------------------------

    def serve(self, stdin, stdout) -> int:
        self._out = stdout
        pool = ThreadPoolExecutor(max_workers=self.workers)
        try:
            for line in stdin:
                if self._fatal.is_set():
                    break
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    raise ProtocolError("record is not valid JSON")
                if not isinstance(record, dict):
                    raise ProtocolError("record must be an object")
                rtype = record.get("type")
                if self.session is None:
                    if rtype != "init":
                        raise ProtocolError(f"expected init, got {rtype!r}")
                    self.session = build_session(record)
                    self._emit({"type": "ready"})
                elif rtype == "check":
                    self._start_check(record, pool)
                elif rtype == "cancel":
                    self._cancel(record)
                elif rtype == "shutdown":
                    break
                elif rtype == "init":
                    raise ProtocolError("session is already initialized")
                else:
                    raise ProtocolError(f"unknown record type {rtype!r}")
            return 1 if self._fatal.is_set() else 0
        except ProtocolError as exc:
            self._fail(str(exc))
            return 1
        finally:
            # unblock any still-running scans, then let the pool drain
            with self._lock:
                flags = list(self._flags.values())
                self._flags.clear()
            for flag in flags:
                flag.set()
            pool.shutdown(wait=False)


def resolve_hook(spec: str):
    """Load "package.module:attribute" naming a search hook callable."""
    module_name, _, attr = spec.partition(":")
    if not module_name or not attr:
        raise ValueError("hook must be given as module:attribute")
    hook = getattr(importlib.import_module(module_name), attr)
    if not callable(hook):
        raise ValueError(f"{spec} is not callable")
    return hook


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dball-oracle",
        description="Serve adversarial-example checks over stdin/stdout.",
    )
    parser.add_argument("--workers", type=int, default=DEFAULT_WORKERS, help="concurrent check limit")
    parser.add_argument("--hook", help="module:attribute of a replacement search hook")
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        hook = resolve_hook(args.hook) if args.hook else None
    except (ImportError, AttributeError, ValueError) as exc:
        parser.error(f"cannot load hook: {exc}")
    return OracleServer(hook=hook, workers=args.workers).serve(sys.stdin, sys.stdout)
