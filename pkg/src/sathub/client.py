"""Client access to a remote SAT memory: a local replica kept in sync by the hub.

``connect`` opens the direct socket named by a memory's ``directUrl``,
applies the initial snapshot, and then mirrors every synchronization
message. Locally originated additions are applied to the replica once at
send time; the hub never echoes them back. Clause sends are
fire-and-forget; variable operations await their indexed responses.
"""

from __future__ import annotations

import queue
import socket
import threading

from . import wire
from .cnf import ClauseRangeError, CnfStore, canonical_clause


class MirrorProtocolError(ConnectionError):
    """The server sent something the mirror cannot reconcile."""


class LockTimeout(Exception):
    """The variable lock was denied or force-released mid-sequence."""


def parse_direct_url(url: str) -> tuple[str, int]:
    if not url.startswith("tcp://"):
        raise ValueError(f"expected tcp:// direct URL, got {url!r}")
    host, _, port = url[len("tcp://"):].partition(":")
    if not host or not port.isdigit():
        raise ValueError(f"malformed direct URL: {url!r}")
    return host, int(port)


def connect(direct_url: str, timeout: float = 5.0) -> "MemoryMirror":
    """Open a mirror of the memory at ``direct_url`` (snapshot applied)."""
    host, port = parse_direct_url(direct_url)
    sock = socket.create_connection((host, port), timeout=timeout)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    sock.settimeout(None)
    return MemoryMirror(sock, direct_url)


class MemoryMirror:
    """Local replica of a remote SAT memory plus its direct-protocol channel."""

    def __init__(self, sock: socket.socket, direct_url: str, request_timeout: float = 30.0) -> None:
        self.direct_url = direct_url
        self.request_timeout = request_timeout
        self.alive = True
        self.pending_lock = False
        self._sock = sock
        self._stream = sock.makefile("rb")
        self._send_lock = threading.Lock()
        self._request_lock = threading.Lock()
        self._responses: queue.Queue = queue.Queue()

        opcode, payload = wire.read_message(self._stream)
        if opcode != wire.SNAPSHOT:
            raise MirrorProtocolError(f"expected snapshot on connect, got opcode {opcode}")
        var_count, clauses = payload
        self.store = CnfStore(var_count)
        for clause in clauses:
            self.store.add_clause(clause)

        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    # -- replica views -------------------------------------------------------

    @property
    def var_count(self) -> int:
        return self.store.var_count

    @property
    def version(self) -> int:
        return self.store.version

    def clauses(self) -> list[list[int]]:
        return self.store.clauses()

    def clause_tuples(self) -> list[tuple[int, ...]]:
        return self.store.clause_tuples()

    def evaluate(self, assignment) -> bool:
        return self.store.evaluate(assignment)

    # -- channel ---------------------------------------------------------------

    def _read_loop(self) -> None:
        try:
            while True:
                opcode, payload = wire.read_message(self._stream)
                if opcode == wire.ADD_CLAUSE:
                    self.store.add_clause(payload)
                elif opcode == wire.ADD_VARS:
                    self.store.add_variables(payload)
                else:
                    self._responses.put((opcode, payload))
        except (wire.ConnectionClosed, wire.MalformedFrame, OSError, ValueError):
            pass
        finally:
            self.alive = False
            self._responses.put(None)

    def _send(self, data: bytes) -> None:
        if not self.alive:
            raise ConnectionError("mirror connection lost")
        with self._send_lock:
            try:
                self._sock.sendall(data)
            except OSError as exc:
                self.alive = False
                raise ConnectionError(f"mirror send failed: {exc}") from exc

    def _request(self, data: bytes, expected: int):
        with self._request_lock:
            self._send(data)
            try:
                item = self._responses.get(timeout=self.request_timeout)
            except queue.Empty:
                raise TimeoutError("no response from memory service") from None
            if item is None:
                raise ConnectionError("mirror connection lost")
            opcode, payload = item
            if opcode == expected:
                return payload
            if opcode == wire.ERROR:
                code, message = payload
                if code == wire.ERR_LOCKED:
                    raise LockTimeout(message)
                if code == wire.ERR_OUT_OF_RANGE:
                    raise ClauseRangeError(message)
                raise MirrorProtocolError(message)
            raise MirrorProtocolError(f"unexpected response opcode {opcode}")

    # -- operations --------------------------------------------------------------

    def add_clause_direct(self, literals) -> bool:
        """Validate locally, apply to the replica, and send (no acknowledgement)."""
        clause = canonical_clause(literals)
        for lit in clause:
            if abs(lit) > self.store.var_count:
                raise ClauseRangeError(
                    f"literal {lit} out of range (var count {self.store.var_count})"
                )
        added = self.store.add_clause(clause)
        self._send(wire.encode_add_clause(list(clause)))
        return added

    def add_variable(self) -> int:
        index = self._request(wire.encode_add_variable(), wire.VAR_INDEX)
        self._sync_var_count(index, 1)
        return index

    def reserve_variables(self, n: int) -> int:
        """Lock, add ``n`` variables, unlock; returns the first new index."""
        if n < 1:
            raise ValueError(f"variable count must be >= 1, got {n}")
        if self.pending_lock:
            raise LockTimeout("a lock sequence is already pending on this mirror")
        self.pending_lock = True
        try:
            self._request(wire.encode_lock_vars(), wire.LOCK_GRANTED)
            try:
                first = self._request(wire.encode_add_vars(n), wire.FIRST_INDEX)
            finally:
                self._send(wire.encode_unlock_vars())
            self._sync_var_count(first, n)
            return first
        finally:
            self.pending_lock = False

    def request_snapshot(self) -> tuple[int, list[list[int]]]:
        """Fetch a fresh full snapshot (replica is already converged; returns raw data)."""
        return self._request(wire.encode_snapshot_request(), wire.SNAPSHOT)

    def _sync_var_count(self, first: int, n: int) -> None:
        with self.store.family_lock:
            if first != self.store.var_count + 1:
                self.alive = False
                raise MirrorProtocolError(
                    f"index {first} does not follow replica var count {self.store.var_count}"
                )
            self.store.add_variables(n)

    def close(self) -> None:
        self.alive = False
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
