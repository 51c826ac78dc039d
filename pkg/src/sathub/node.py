"""One serve node: HTTP web-call endpoint in front of the memory service,
the solver registry, and a pool of reference solver workers."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .service import MemoryService
from .solving import (
    DiversificationSettings,
    NoSolverAvailable,
    SolveCall,
    SolverBusy,
    SolverRegistry,
    SolverStateError,
    SolverWorker,
    WebPidMismatch,
    parallelize,
)


class ServerNode:
    """Long-running service: SAT memories, solver workers, one /webcall endpoint."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        workers: int = 1,
        lock_timeout: float = 10.0,
    ) -> None:
        if workers < 1:
            raise ValueError(f"need at least one solver worker, got {workers}")
        self.memory = MemoryService(host=host, lock_timeout=lock_timeout)
        self.registry = SolverRegistry()

        node = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802 (http.server API)
                if self.path != "/webcall":
                    self.send_error(404)
                    return
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length)
                try:
                    envelope = json.loads(body)
                    if not isinstance(envelope, dict):
                        raise ValueError("envelope must be a JSON object")
                except ValueError as exc:
                    result = {"error": f"MALFORMED_ENVELOPE: {exc}"}
                else:
                    result = node.handle_web_call(envelope)
                data = json.dumps(result).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, fmt, *args) -> None:
                pass

        self._httpd = ThreadingHTTPServer((host, port), Handler)
        self._httpd.daemon_threads = True
        self.endpoint = f"http://{host}:{self._httpd.server_address[1]}"
        self.workers = [
            SolverWorker(self.registry, endpoint=self.endpoint) for _ in range(workers)
        ]
        self._thread: Optional[threading.Thread] = None

    def start(self) -> "ServerNode":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self.memory.shutdown()

    def handle_web_call(self, envelope: dict) -> dict:
        """Route one envelope to the memory service, a solver, or the kernel."""
        try:
            method = envelope.get("method") or ""
            web_pid = envelope.get("webPid") or ""
            argument = envelope.get("argument") or {}
            if method.startswith("SatCnf."):
                return self.memory.handle_web_call(envelope)
            if method.startswith("SatSolver."):
                return self._solver_call(method, envelope, web_pid, argument)
            if method == "Kernel.parallelize":
                calls = [
                    SolveCall(
                        memory=item.get("satMemoryUrl"),
                        solver_id=item.get("solverId"),
                        timeout=float(item.get("timeout", 0.0)),
                        diversification=DiversificationSettings.from_json(
                            item.get("diversification")
                        ),
                    )
                    for item in (argument.get("calls") or [])
                ]
                results = parallelize(
                    self.registry,
                    calls,
                    first_sat_cancels=bool(argument.get("firstSatCancels", False)),
                    web_pid=web_pid,
                )
                return {"results": [r.as_json() for r in results]}
            if method == "Kernel.listSolvers":
                return {"solvers": [r.as_json() for r in self.registry.list_solvers()]}
            if method == "Kernel.findAvailable":
                try:
                    worker = self.registry.find_available(float(argument.get("timeout", 0.0)))
                except NoSolverAvailable:
                    return {"error": "NONE_AVAILABLE"}
                return {"solverId": worker.record.solver_id}
            return {"error": "NO_SUCH_METHOD"}
        except Exception as exc:
            return {"error": str(exc)}

    def _solver_call(self, method: str, envelope: dict, web_pid: str, argument: dict) -> dict:
        worker = self.registry.get(envelope.get("objectRef") or "")
        if worker is None:
            return {"error": "NO_SUCH_OBJECT"}
        if method == "SatSolver.solve":
            try:
                outcome = worker.solve(
                    argument.get("satMemoryUrl") or "",
                    timeout=float(argument.get("timeout", 0.0)),
                    diversification=DiversificationSettings.from_json(
                        argument.get("diversification")
                    ),
                    web_pid=web_pid,
                )
            except SolverBusy:
                return {"error": "BUSY"}
            return outcome.as_json()
        if method in ("SatSolver.pause", "SatSolver.resume", "SatSolver.cancel"):
            try:
                getattr(worker, method.removeprefix("SatSolver."))(web_pid=web_pid)
            except (SolverStateError, WebPidMismatch) as exc:
                return {"error": str(exc)}
            return {}
        return {"error": "NO_SUCH_METHOD"}
