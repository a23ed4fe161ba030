"""Client for an out-of-process robustness oracle.

The oracle runs as a child process speaking newline-delimited JSON over
its standard streams:

    -> {"type": "init", "protocol": 1, "model": <model document>,
        "instance": {"point": [...], "label": ...}, "norm": 0|1|2|"inf"}
    <- {"type": "ready"}  or  {"type": "error", "msg": ...}

    -> {"type": "check", "id": N, "fixed": [...1-based...], "epsilon": E}
    <- {"type": "result", "id": N, "status": "adv", "witness": [...]}
       | {"type": "result", "id": N, "status": "robust"}
       | {"type": "result", "id": N, "status": "cancelled"}

    -> {"type": "cancel", "id": N}    (a cancelled result may follow a
       normal one; the first result for an id wins, duplicates are ignored)
    -> {"type": "shutdown"}           then stream close.

Requests are multiplexed by id, so concurrent find_adv_ex calls share one
session. Adversarial witnesses are re-verified locally and rejected with
OracleFailure when invalid; the child is never trusted on geometry.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
from typing import Optional, Union

from .errors import OracleFailure
from .models import problem_to_document
from .oracle import AdvFound, Cancelled, Oracle, OracleQuery, Robust, verify_witness
from .problem import ExplanationProblem

DEFAULT_TIMEOUT = 300.0


def wire_norm(p):
    return "inf" if p == math.inf else int(p)


class _PendingCall:
    __slots__ = ("event", "record")

    def __init__(self):
        self.event = threading.Event()
        self.record = None  # first result record wins


class ExternalOracle(Oracle):
    """Session with one child oracle process."""

    def __init__(
        self,
        cmd: Union[str, list],
        problem: ExplanationProblem,
        norm,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        self.problem = problem
        self.norm = norm
        self.timeout = timeout
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
            )
        except OSError as exc:
            raise OracleFailure(f"cannot launch oracle {argv!r}: {exc}") from exc
        self._write_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._pending: dict = {}
        self._next_id = 0
        self._ready = threading.Event()
        self._dead = None  # failure message once the session is unusable
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._send(
            {
                "type": "init",
                "protocol": 1,
                "model": problem_to_document(problem.problem),
                "instance": {"point": list(problem.v), "label": problem.label},
                "norm": wire_norm(norm),
            }
        )
        if not self._ready.wait(timeout=self.timeout):
            self._kill()
            raise OracleFailure("oracle did not become ready in time" if self._dead is None else self._dead)
        if self._dead is not None:
            self._kill()
            raise OracleFailure(self._dead)

    # -- wire plumbing ------------------------------------------------

    def _send(self, record: dict) -> None:
        line = json.dumps(record)
        with self._write_lock:
            stdin = self._proc.stdin
            if stdin is None or stdin.closed:
                raise OracleFailure("oracle session is closed")
            try:
                stdin.write(line + "\n")
                stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise OracleFailure(f"oracle process went away: {exc}") from exc

    def _read_loop(self) -> None:
        stream = self._proc.stdout
        try:
            for line in stream:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    self._fail_session(f"malformed oracle output: {line[:200]!r}")
                    return
                self._dispatch(record)
        except (ValueError, OSError):
            pass
        self._fail_session("oracle closed its output stream")

    def _dispatch(self, record: dict) -> None:
        rtype = record.get("type")
        if rtype == "ready":
            self._ready.set()
            return
        if rtype == "error":
            self._fail_session(f"oracle error: {record.get('msg')!r}")
            return
        if rtype == "result":
            with self._state_lock:
                call = self._pending.get(record.get("id"))
            if call is not None and call.record is None:
                call.record = record
                call.event.set()
            return
        self._fail_session(f"unexpected oracle record type {rtype!r}")

    def _fail_session(self, msg: str) -> None:
        with self._state_lock:
            if self._dead is None:
                self._dead = msg
            pending = list(self._pending.values())
        self._ready.set()
        for call in pending:
            call.event.set()

    # -- oracle interface ---------------------------------------------

    def find_adv_ex(self, query: OracleQuery, cancel: Optional[threading.Event] = None):
        with self._state_lock:
            if self._dead is not None:
                raise OracleFailure(self._dead)
            self._next_id += 1
            call_id = self._next_id
            call = _PendingCall()
            self._pending[call_id] = call
        try:
            self._send(
                {
                    "type": "check",
                    "id": call_id,
                    "fixed": sorted(query.fixed),
                    "epsilon": query.epsilon,
                }
            )
            waited = 0.0
            cancel_sent = False
            while not call.event.wait(timeout=0.01):
                waited += 0.01
                if self._dead is not None:
                    raise OracleFailure(self._dead)
                if cancel is not None and cancel.is_set() and not cancel_sent:
                    self._send({"type": "cancel", "id": call_id})
                    cancel_sent = True
                if waited >= self.timeout:
                    raise OracleFailure(f"oracle call {call_id} timed out after {self.timeout}s")
            if self._dead is not None and call.record is None:
                raise OracleFailure(self._dead)
            return self._verdict(call.record, query)
        finally:
            with self._state_lock:
                self._pending.pop(call_id, None)

    def _verdict(self, record: dict, query: OracleQuery):
        status = record.get("status")
        if status == "robust":
            return Robust()
        if status == "cancelled":
            return Cancelled()
        if status == "adv":
            witness = record.get("witness")
            if not isinstance(witness, list):
                raise OracleFailure("adv result carries no witness")
            point = tuple(witness)
            try:
                valid = verify_witness(self.problem, point, query)
            except Exception as exc:
                raise OracleFailure(f"witness rejected: {exc}") from exc
            if not valid:
                raise OracleFailure(f"witness {point!r} fails local verification")
            return AdvFound(witness=point)
        raise OracleFailure(f"unknown result status {status!r}")

    # -- lifecycle ----------------------------------------------------

    def shutdown(self) -> None:
        try:
            self._send({"type": "shutdown"})
        except OracleFailure:
            pass
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._kill()

    def _kill(self) -> None:
        try:
            self._proc.kill()
            self._proc.wait(timeout=5)
        except Exception:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.shutdown()
        return False
