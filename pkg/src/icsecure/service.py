"""HTTP/JSON recommendation service.

Endpoints:
  GET  /health     -> {"status": "ok", "bundle": <fingerprint>}; 503 until a
                      bundle is attached
  GET  /modules    -> candidate listing (EOP included, START excluded) in
                      bundle manifest order
  POST /recommend  -> top-k recommendations for (alert keys, partial
                      playbook, current node); unknown alert keys are
                      dropped with a warning; structural problems get a
                      machine-readable 400; bodies over 1 MiB get 413

The service is stateless: the partial playbook travels in every request,
and the model bundle is shared read-only across handler threads. Floats
are serialized with 9 significant digits.
"""

from __future__ import annotations

import json
import signal
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

import numpy as np

from .model import (
    EOP_MODULE,
    AlertRule,
    Playbook,
    START_MODULE,
    playbook_violations,
)
from .recommender import Recommender, rank_candidates

MAX_BODY_BYTES = 1 << 20
DEFAULT_K = 5


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dumps(obj: Any) -> bytes:
    return (json.dumps(_round_floats(obj)) + "\n").encode("utf-8")


class RequestError(Exception):
    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def _parse_playbook(obj: Any) -> Playbook:
    if not isinstance(obj, dict) or not {"start", "nodes", "edges"} <= set(obj):
        raise RequestError("invalid_playbook", "playbook needs start, nodes and edges")
    nodes = {}
    for entry in obj["nodes"]:
        if not isinstance(entry, dict) or "id" not in entry or "module" not in entry:
            raise RequestError("invalid_playbook", "each node needs id and module")
        if entry["id"] in nodes:
            raise RequestError("invalid_playbook", f"duplicate node id {entry['id']!r}")
        nodes[entry["id"]] = entry["module"]
    try:
        edges = frozenset((a, b) for a, b in obj["edges"])
    except (TypeError, ValueError):
        raise RequestError("invalid_playbook", "edges must be [from, to] pairs") from None
    pb = Playbook(id="request", nodes=nodes, edges=edges, start=obj["start"])
    problems = playbook_violations(pb)
    if problems:
        raise RequestError(
            "invalid_playbook", "; ".join(f"{v.kind}: {v.detail}" for v in problems)
        )
    return pb


class RecommendationService:
    """Request handling logic, independent of the HTTP plumbing."""

    def __init__(self, recommender: Recommender | None = None, fingerprint: str = ""):
        self.recommender = recommender
        self.fingerprint = fingerprint

    def attach(self, recommender: Recommender, fingerprint: str) -> None:
        self.recommender = recommender
        self.fingerprint = fingerprint

    @property
    def ready(self) -> bool:
        return self.recommender is not None

    def health(self) -> tuple[int, dict]:
        if not self.ready:
            return 503, {"status": "loading", "bundle": None}
        return 200, {"status": "ok", "bundle": self.fingerprint}

    def modules(self) -> tuple[int, dict]:
        if not self.ready:
            return 503, {"error": {"code": "not_ready", "message": "bundle not loaded"}}
        rec = self.recommender
        return 200, {
            "modules": [
                {"id": c, "name": c, "is_eop": c == EOP_MODULE}
                for c in rec.ncf.candidates
            ]
        }

    def recommend(self, payload: Any) -> tuple[int, dict]:
        if not self.ready:
            return 503, {"error": {"code": "not_ready", "message": "bundle not loaded"}}
        try:
            body = self._recommend(payload)
            return 200, body
        except RequestError as err:
            return err.status, {"error": {"code": err.code, "message": err.message}}

    def _recommend(self, payload: Any) -> dict:
        if not isinstance(payload, dict):
            raise RequestError("invalid_request", "body must be a JSON object")
        keys = payload.get("alert_keys")
        if not isinstance(keys, list) or not keys or not all(isinstance(k, str) for k in keys):
            raise RequestError("invalid_alert_keys", "alert_keys must be a non-empty string list")
        k = payload.get("k", DEFAULT_K)
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise RequestError("invalid_k", "k must be an integer >= 1")
        playbook = _parse_playbook(payload.get("playbook"))
        current = payload.get("current_node")
        if current not in playbook.nodes:
            raise RequestError("unknown_current_node", f"current node {current!r} not in playbook")

        rec = self.recommender
        unknown_modules = sorted(
            {m for m in playbook.nodes.values() if m != START_MODULE}
            - set(rec.ncf.candidates)
        )
        if unknown_modules:
            raise RequestError(
                "unknown_module", f"modules not in this bundle: {', '.join(unknown_modules)}"
            )

        warnings = []
        ignored = sorted(set(keys) - set(rec.registry.keys))
        if ignored:
            warnings.append(f"ignored {len(ignored)} unknown alert keys: {', '.join(ignored)}")
        alert = AlertRule(id="request", present_keys=frozenset(keys))

        scores = rec.score_all(alert, playbook, current, ignore_unknown_keys=True)
        candidates = rec.ncf.candidates
        order = rank_candidates(candidates, scores)
        top = order[: min(k, len(order))]
        eop_idx = candidates.index(EOP_MODULE)
        return {
            "recommendations": [
                {"candidate": candidates[i], "score": float(scores[i]), "rank": rank}
                for rank, i in enumerate(top, start=1)
            ],
            "eop_rank": order.index(eop_idx) + 1,
            "eop_score": float(scores[eop_idx]),
            "warnings": warnings,
        }


def make_handler(service: RecommendationService, cors_origin: str | None = None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, body: dict) -> None:
            raw = dumps(body)
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(raw)))
            if cors_origin:
                self.send_header("Access-Control-Allow-Origin", cors_origin)
            self.end_headers()
            self.wfile.write(raw)

        def do_OPTIONS(self):
            self.send_response(204)
            if cors_origin:
                self.send_header("Access-Control-Allow-Origin", cors_origin)
                self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            if self.path == "/health":
                self._send(*service.health())
            elif self.path == "/modules":
                self._send(*service.modules())
            else:
                self._send(404, {"error": {"code": "not_found", "message": self.path}})

        def do_POST(self):
            if self.path != "/recommend":
                self._send(404, {"error": {"code": "not_found", "message": self.path}})
                return
            length = int(self.headers.get("Content-Length", 0))
            if length > MAX_BODY_BYTES:
                # drain bounded bodies so the client can read the response,
                # then drop the connection
                if length <= 64 * MAX_BODY_BYTES:
                    remaining = length
                    while remaining > 0:
                        remaining -= len(self.rfile.read(min(remaining, 1 << 16)))
                self.close_connection = True
                self._send(
                    413,
                    {"error": {"code": "payload_too_large", "message": "body exceeds 1 MiB"}},
                )
                return
            raw = self.rfile.read(length)
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                self._send(400, {"error": {"code": "invalid_json", "message": "body is not valid JSON"}})
                return
            try:
                self._send(*service.recommend(payload))
            except Exception as exc:  # contract: internal faults surface as 500
                self._send(500, {"error": {"code": "internal", "message": str(exc)}})

    return Handler


def make_server(
    service: RecommendationService,
    port: int = 8080,
    host: str = "127.0.0.1",
    cors_origin: str | None = None,
) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), make_handler(service, cors_origin))


def serve_until_signal(server: ThreadingHTTPServer) -> None:
    """Run the server on a worker thread until SIGTERM/SIGINT."""
    stop = threading.Event()
    for sig in (signal.SIGTERM, signal.SIGINT):
        signal.signal(sig, lambda *_: stop.set())
    worker = threading.Thread(target=server.serve_forever, daemon=True)
    worker.start()
    stop.wait()
    server.shutdown()
    worker.join()
