"""Network-facing SAT memory: web-call dispatch plus the binary direct-access hub.

Each memory object (origin store or fork) gets its own TCP listener; its
``directUrl`` is the address of that socket. A new connection receives a
full snapshot first, then every state change exactly once. Clause and
variable additions from one peer are applied to the store and rebroadcast
to all other peers of every view that newly sees them; the originator is
never echoed. Mutations and broadcast enqueues happen under one family
lock per instance, so all peers observe updates in a single global order.

The variable lock guards variable-count changes only: variable additions
from other connections queue FIFO behind the holder and are applied after
the unlock (or after the configurable force-release timeout).
"""

from __future__ import annotations

import queue
import socket
import threading
import uuid
from collections import deque
from typing import Optional

from . import wire
from .cnf import ClauseRangeError, CnfStore, canonical_clause


class _Connection:
    """One direct-protocol peer: socket plus an ordered outbound queue."""

    def __init__(self, sock: socket.socket) -> None:
        self.sock = sock
        self._out: queue.SimpleQueue = queue.SimpleQueue()
        self.dead = False
        self._writer = threading.Thread(target=self._write_loop, daemon=True)
        self._writer.start()

    def send(self, data: bytes) -> None:
        if not self.dead:
            self._out.put(data)

    def close(self) -> None:
        self._out.put(None)

    def _write_loop(self) -> None:
        while True:
            item = self._out.get()
            if item is None:
                break
            try:
                self.sock.sendall(item)
            except OSError:
                self.dead = True
                break
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class LockManager:
    """FIFO variable lock for one variable-counter owner."""

    def __init__(self, timeout: float = 10.0) -> None:
        self.timeout = timeout
        self._cv = threading.Condition()
        self._holder = None
        self._tickets: deque = deque()
        self._timer: Optional[threading.Timer] = None

    def held_by(self, token) -> bool:
        with self._cv:
            return self._holder is token

    def acquire(self, token) -> bool:
        """Block FIFO until the lock is free; False if token already holds it."""
        with self._cv:
            if self._holder is token:
                return False
            if self._holder is None and not self._tickets:
                self._holder = token
                return True
            ticket = object()
            self._tickets.append(ticket)
            while not (self._holder is None and self._tickets[0] is ticket):
                self._cv.wait()
            self._tickets.popleft()
            self._holder = token
            self._cv.notify_all()
            return True

    def release(self, token) -> bool:
        with self._cv:
            if self._holder is not token:
                return False
            self._holder = None
            self._cancel_timer()
            self._cv.notify_all()
            return True

    def arm_force_release(self, token, on_expire) -> None:
        """Schedule force-release of an explicit lock after the hold timeout."""
        def fire() -> None:
            with self._cv:
                if self._holder is not token:
                    return
                self._holder = None
                self._cv.notify_all()
            on_expire()

        with self._cv:
            self._cancel_timer()
            self._timer = threading.Timer(self.timeout, fire)
            self._timer.daemon = True
            self._timer.start()

    def _cancel_timer(self) -> None:
        if self._timer is not None:
            self._timer.cancel()
            self._timer = None


class MemoryObject:
    """One addressable SAT memory view: an origin store or a fork."""

    def __init__(self, service: "MemoryService", view, parent: Optional["MemoryObject"], attached: bool) -> None:
        self.service = service
        self.view = view
        self.object_id = uuid.uuid4().hex
        self.children: list[tuple[MemoryObject, bool]] = []
        self.peers: list[_Connection] = []
        self.closed = False
        if parent is not None and attached:
            self.var_owner = parent.var_owner
            self.lock_mgr = parent.lock_mgr
        else:
            self.var_owner = self
            self.lock_mgr = LockManager(service.lock_timeout)
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((service.host, 0))
        self._listener.listen(16)
        self.direct_url = f"tcp://{service.host}:{self._listener.getsockname()[1]}"
        threading.Thread(target=self._accept_loop, daemon=True).start()

    # -- hub ---------------------------------------------------------------

    def _accept_loop(self) -> None:
        while True:
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            threading.Thread(
                target=self._serve_connection, args=(_Connection(sock),), daemon=True
            ).start()

    def _serve_connection(self, conn: _Connection) -> None:
        with self.view.family_lock:
            conn.send(
                wire.encode_snapshot(
                    self.view.var_count, [list(c) for c in self.view.iter_clauses()]
                )
            )
            self.peers.append(conn)
        stream = conn.sock.makefile("rb")
        try:
            while True:
                try:
                    opcode, payload = wire.read_message(stream)
                except wire.ConnectionClosed:
                    return
                except (wire.MalformedFrame, OSError) as exc:
                    conn.send(wire.encode_error(wire.ERR_MALFORMED, str(exc)))
                    return
                if not self._dispatch(conn, opcode, payload):
                    return
        finally:
            with self.view.family_lock:
                if conn in self.peers:
                    self.peers.remove(conn)
            self.lock_mgr.release(conn)
            conn.close()

    def _dispatch(self, conn: _Connection, opcode: int, payload) -> bool:
        """Handle one frame; False closes the connection."""
        if opcode == wire.ADD_CLAUSE:
            try:
                clause = canonical_clause(payload)
            except ValueError as exc:
                conn.send(wire.encode_error(wire.ERR_MALFORMED, str(exc)))
                return True
            with self.view.family_lock:
                try:
                    added = self.view.add_clause(clause)
                except ClauseRangeError as exc:
                    conn.send(wire.encode_error(wire.ERR_OUT_OF_RANGE, str(exc)))
                    return True
                if added:
                    self._broadcast_clause(clause, exclude=conn)
            return True

        if opcode in (wire.ADD_VARIABLE, wire.ADD_VARS):
            n = 1 if opcode == wire.ADD_VARIABLE else payload
            if n < 1:
                conn.send(wire.encode_error(wire.ERR_OUT_OF_RANGE, f"bad variable count {n}"))
                return True
            held = self.lock_mgr.held_by(conn)
            if not held:
                self.lock_mgr.acquire(conn)
            try:
                with self.view.family_lock:
                    first = self.view.add_variables(n)
                    if opcode == wire.ADD_VARIABLE:
                        conn.send(wire.encode_var_index(first))
                    else:
                        conn.send(wire.encode_first_index(first))
                    self.var_owner._broadcast_vars(n, exclude=conn)
            finally:
                if not held:
                    self.lock_mgr.release(conn)
            return True

        if opcode == wire.LOCK_VARS:
            if not self.lock_mgr.acquire(conn):
                conn.send(wire.encode_error(wire.ERR_LOCKED, "lock already held"))
                return True
            self.lock_mgr.arm_force_release(
                conn,
                lambda: conn.send(
                    wire.encode_error(wire.ERR_LOCKED, "lock force-released after timeout")
                ),
            )
            conn.send(wire.encode_lock_granted())
            return True

        if opcode == wire.UNLOCK_VARS:
            if not self.lock_mgr.release(conn):
                conn.send(wire.encode_error(wire.ERR_LOCKED, "not the lock holder"))
            return True

        if opcode == wire.SNAPSHOT_REQUEST:
            with self.view.family_lock:
                conn.send(
                    wire.encode_snapshot(
                        self.view.var_count, [list(c) for c in self.view.iter_clauses()]
                    )
                )
            return True

        conn.send(wire.encode_error(wire.ERR_MALFORMED, f"unexpected opcode {opcode}"))
        return False

    def _broadcast_clause(self, clause: tuple, exclude: Optional[_Connection]) -> None:
        """Send a newly visible clause down the attached-view tree; caller holds the lock."""
        data = wire.encode_add_clause(list(clause))
        for peer in self.peers:
            if peer is not exclude:
                peer.send(data)
        for child, attached in self.children:
            if attached and not child.view._locally_stored(clause):
                child._broadcast_clause(clause, exclude)

    def _broadcast_vars(self, n: int, exclude: Optional[_Connection]) -> None:
        data = wire.encode_add_vars(n)
        for peer in self.peers:
            if peer is not exclude:
                peer.send(data)
        for child, attached in self.children:
            if attached:
                child._broadcast_vars(n, exclude)

    # -- lifecycle -----------------------------------------------------------

    def close(self) -> None:
        self.closed = True
        try:
            self._listener.close()
        except OSError:
            pass
        with self.view.family_lock:
            peers, self.peers = self.peers, []
        for peer in peers:
            peer.close()


class MemoryService:
    """Registry of live SAT memory instances and their web-call dispatch."""

    def __init__(self, host: str = "127.0.0.1", lock_timeout: float = 10.0) -> None:
        self.host = host
        self.lock_timeout = lock_timeout
        self._objects: dict[str, MemoryObject] = {}
        self._lock = threading.Lock()

    def create_memory(self, initial_variable_count: int = 0) -> MemoryObject:
        obj = MemoryObject(self, CnfStore(initial_variable_count), parent=None, attached=True)
        with self._lock:
            self._objects[obj.object_id] = obj
        return obj

    def get(self, object_id: str) -> Optional[MemoryObject]:
        with self._lock:
            return self._objects.get(object_id)

    def fork_memory(self, obj: MemoryObject, detach: bool) -> MemoryObject:
        child = MemoryObject(self, obj.view.fork(detach=detach), parent=obj, attached=not detach)
        with obj.view.family_lock:
            obj.children.append((child, not detach))
        with self._lock:
            self._objects[child.object_id] = child
        return child

    def delete_memory(self, object_id: str) -> bool:
        with self._lock:
            obj = self._objects.pop(object_id, None)
        if obj is None:
            return False
        obj.close()
        return True

    def shutdown(self) -> None:
        with self._lock:
            objects = list(self._objects.values())
            self._objects.clear()
        for obj in objects:
            obj.close()

    # -- web calls -----------------------------------------------------------

    def handle_web_call(self, envelope: dict) -> dict:
        """Dispatch one SatCnf web call; application failures land in "error"."""
        try:
            method = envelope.get("method", "")
            argument = envelope.get("argument") or {}
            if method == "SatCnf.create":
                count = int(argument.get("initialVariableCount", 0))
                obj = self.create_memory(count)
                return {"objectRef": obj.object_id, "directUrl": obj.direct_url}
            if not method.startswith("SatCnf."):
                return {"error": "NO_SUCH_METHOD"}
            obj = self.get(envelope.get("objectRef") or "")
            if obj is None:
                return {"error": "NO_SUCH_OBJECT"}
            if method == "SatCnf.addVariable":
                token = object()
                obj.lock_mgr.acquire(token)
                try:
                    with obj.view.family_lock:
                        index = obj.view.add_variable()
                        obj.var_owner._broadcast_vars(1, exclude=None)
                finally:
                    obj.lock_mgr.release(token)
                return {"index": index}
            if method == "SatCnf.addClause":
                clause = canonical_clause(argument.get("clause") or [])
                with obj.view.family_lock:
                    added = obj.view.add_clause(clause)
                    if added:
                        obj._broadcast_clause(clause, exclude=None)
                return {"added": added}
            if method == "SatCnf.clauses":
                return {"clauses": obj.view.clauses()}
            if method == "SatCnf.fork":
                child = self.fork_memory(obj, bool(argument.get("detach", False)))
                return {"forkId": child.object_id, "directUrl": child.direct_url}
            if method == "SatCnf.delete":
                self.delete_memory(obj.object_id)
                return {}
            return {"error": "NO_SUCH_METHOD"}
        except Exception as exc:
            return {"error": str(exc)}
