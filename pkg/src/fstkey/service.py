"""HTTP facade exposing decoding sessions as a small JSON protocol.

Routes (all bodies and responses are JSON objects):

=======  =================================  ==========================
method   path                               body -> response
=======  =================================  ==========================
POST     /v1/session                        {"layout_id"?} -> {"session_id", "layout_id"}
GET      /v1/layout                         -> board geometry
GET      /v1/session/{id}                   -> {"committed_text", "words", "predictions"}
POST     /v1/session/{id}/tap               {"x", "y", "t"?} -> update | commit
POST     /v1/session/{id}/gesture           {"points": [{"x","y","t"}, ...]} -> update
POST     /v1/session/{id}/separator         {"t"?} -> commit
POST     /v1/session/{id}/select            {"text", "t"?} -> commit
POST     /v1/session/{id}/backspace         {} -> update
DELETE   /v1/session/{id}                   -> {"closed": true}
=======  =================================  ==========================

An *update* is ``{"kind": "update", "candidates": [{"text", "cost"}...],
"literal": {"text", "cost"} | null, "completions": [...],
"committed_text"}``.  A *commit* is ``{"kind": "commit", "committed",
"autocorrected", "post_correction": {"position", "old", "new", "gain"} |
null, "predictions": [...], "committed_text"}``.

A tap inside the separator bar acts as a separator press and returns a
commit; letter taps return updates.  Unknown sessions give 404, bad
input 400.  Each session is serialized by its own lock, so concurrent
clients are safe; different sessions never share mutable state.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Mapping, Optional, Union

from .bundle import KeyboardBundle
from .config import EngineConfig
from .decoder import CommitResult, DecodeUpdate, DecoderError, Session
from .features import completions as word_completions
from .features import predict_next

log = logging.getLogger(__name__)

SUGGESTIONS = 5


class ServiceError(Exception):
    """A request the service refuses; carries the HTTP status to send."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class _Box:
    """One live session plus the lock that serializes access to it."""

    def __init__(self, session: Session, layout_id: str):
        self.session = session
        self.layout_id = layout_id
        self.lock = threading.Lock()


def _pair(item: Optional[tuple[str, float]]) -> Optional[dict]:
    if item is None:
        return None
    text, cost = item
    return {"text": text, "cost": cost}


def _pairs(items) -> list[dict]:
    return [{"text": t, "cost": c} for t, c in items]


class KeyboardService:
    """Session store and request dispatcher, independent of any transport."""

    def __init__(self,
                 bundles: Union[KeyboardBundle,
                                Mapping[str, KeyboardBundle]],
                 config: EngineConfig = EngineConfig()):
        if isinstance(bundles, KeyboardBundle):
            bundles = {bundles.layout.name: bundles}
        if not bundles:
            raise ServiceError(500, "service needs at least one bundle")
        self.bundles = dict(bundles)
        self.config = config
        self._touch = {lid: b.touch_model(config.spatial)
                       for lid, b in self.bundles.items()}
        self._sessions: dict[str, _Box] = {}
        self._table_lock = threading.Lock()

    # -- session store -----------------------------------------------------

    def create_session(self, layout_id: Optional[str] = None) -> str:
        if layout_id is None:
            if len(self.bundles) != 1:
                raise ServiceError(400, "layout_id required: service hosts "
                                        f"{sorted(self.bundles)}")
            layout_id = next(iter(self.bundles))
        bundle = self.bundles.get(layout_id)
        if bundle is None:
            raise ServiceError(400, f"unknown layout {layout_id!r}")
        session = Session(bundle.new_graph(), self.config,
                          self._touch[layout_id])
        sid = uuid.uuid4().hex
        with self._table_lock:
            self._sessions[sid] = _Box(session, layout_id)
        return sid

    def close_session(self, sid: str) -> bool:
        with self._table_lock:
            return self._sessions.pop(sid, None) is not None

    def _box(self, sid: str) -> _Box:
        with self._table_lock:
            box = self._sessions.get(sid)
        if box is None:
            raise ServiceError(404, f"no session {sid!r}")
        return box

    @property
    def session_count(self) -> int:
        with self._table_lock:
            return len(self._sessions)

    # -- payload shaping ---------------------------------------------------

    def _update_payload(self, session: Session,
                        update: DecodeUpdate) -> dict:
        extra = ()
        if session.mode == "tap":
            try:
                extra = word_completions(session, SUGGESTIONS)
            except DecoderError:
                pass
        return {
            "kind": "update",
            "candidates": _pairs(update.candidates),
            "literal": _pair(update.literal),
            "completions": _pairs(extra),
            "committed_text": session.committed_text(),
        }

    def _commit_payload(self, session: Session,
                        result: CommitResult) -> dict:
        pc = result.post_correction
        return {
            "kind": "commit",
            "committed": result.committed,
            "autocorrected": result.autocorrected,
            "post_correction": None if pc is None else {
                "position": pc.position, "old": pc.old,
                "new": pc.new, "gain": pc.gain,
            },
            "predictions": _pairs(result.predictions),
            "committed_text": session.committed_text(),
        }

    # -- request handlers --------------------------------------------------

    def tap(self, sid: str, body: dict) -> dict:
        box = self._box(sid)
        x = _number(body, "x")
        y = _number(body, "y")
        t = _number(body, "t", default=time.time() * 1000.0)
        with box.lock:
            session = box.session
            layout = self.bundles[box.layout_id].layout
            if layout.key_at(*layout.clamp(x, y)).code == " ":
                return self._commit_payload(session,
                                            session.commit(timestamp=t))
            return self._update_payload(session, session.tap(x, y, t))

    def gesture(self, sid: str, body: dict) -> dict:
        box = self._box(sid)
        raw = body.get("points")
        if not isinstance(raw, list) or len(raw) < 2:
            raise ServiceError(400, "gesture needs a list of at least "
                                    "two points")
        points = [(_number(p, "x"), _number(p, "y"), _number(p, "t"))
                  for p in raw]
        with box.lock:
            return self._update_payload(box.session,
                                        box.session.gesture(points))

    def separator(self, sid: str, body: dict) -> dict:
        box = self._box(sid)
        t = _number(body, "t", default=time.time() * 1000.0)
        with box.lock:
            return self._commit_payload(box.session,
                                        box.session.commit(timestamp=t))

    def select(self, sid: str, body: dict) -> dict:
        box = self._box(sid)
        text = body.get("text")
        if not isinstance(text, str) or not text:
            raise ServiceError(400, "select needs a nonempty text")
        t = _number(body, "t", default=time.time() * 1000.0)
        with box.lock:
            return self._commit_payload(box.session,
                                        box.session.select(text,
                                                           timestamp=t))

    def backspace(self, sid: str, body: dict) -> dict:
        box = self._box(sid)
        with box.lock:
            return self._update_payload(box.session,
                                        box.session.backspace())

    def state(self, sid: str) -> dict:
        box = self._box(sid)
        with box.lock:
            session = box.session
            return {
                "layout_id": box.layout_id,
                "committed_text": session.committed_text(),
                "words": [{"text": e.text,
                           "autocorrected": e.autocorrected,
                           "source": e.source}
                          for e in session.history],
                "pending": self._update_payload(
                    session, session.n_best(SUGGESTIONS)),
                "predictions": _pairs(predict_next(session, SUGGESTIONS)),
            }

    def layout_json(self, layout_id: Optional[str] = None) -> dict:
        if layout_id is None and len(self.bundles) == 1:
            layout_id = next(iter(self.bundles))
        bundle = self.bundles.get(layout_id or "")
        if bundle is None:
            raise ServiceError(404, f"unknown layout {layout_id!r}")
        return json.loads(bundle.layout.to_json())

    # -- routing -----------------------------------------------------------

    def dispatch(self, method: str, path: str,
                 body: Optional[dict]) -> tuple[int, dict]:
        """Route one request; returns (HTTP status, response payload)."""
        try:
            return 200, self._route(method, path, body or {})
        except ServiceError as exc:
            return exc.status, {"error": str(exc)}
        except DecoderError as exc:
            return 400, {"error": str(exc)}

    def _route(self, method: str, path: str, body: dict) -> dict:
        parts = [p for p in path.split("/") if p]
        if len(parts) >= 1 and parts[0] != "v1":
            raise ServiceError(404, f"unknown path {path!r}")
        if parts == ["v1", "session"]:
            if method != "POST":
                raise ServiceError(405, "session collection takes POST")
            layout_id = body.get("layout_id")
            if layout_id is not None and not isinstance(layout_id, str):
                raise ServiceError(400, "layout_id must be a string")
            sid = self.create_session(layout_id)
            return {"session_id": sid,
                    "layout_id": self._box(sid).layout_id}
        if parts == ["v1", "layout"]:
            if method != "GET":
                raise ServiceError(405, "layout takes GET")
            return self.layout_json()
        if len(parts) == 3 and parts[:2] == ["v1", "session"]:
            sid = parts[2]
            if method == "GET":
                return self.state(sid)
            if method == "DELETE":
                if not self.close_session(sid):
                    raise ServiceError(404, f"no session {sid!r}")
                return {"closed": True}
            raise ServiceError(405, "session takes GET or DELETE")
        if len(parts) == 4 and parts[:2] == ["v1", "session"]:
            if method != "POST":
                raise ServiceError(405, "session actions take POST")
            sid, verb = parts[2], parts[3]
            handler = {"tap": self.tap, "gesture": self.gesture,
                       "separator": self.separator, "select": self.select,
                       "backspace": self.backspace}.get(verb)
            if handler is None:
                raise ServiceError(404, f"unknown action {verb!r}")
            return handler(sid, body)
        raise ServiceError(404, f"unknown path {path!r}")


def _number(body: dict, field: str,
            default: Optional[float] = None) -> float:
    value = body.get(field, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ServiceError(400, f"field {field!r} must be a number")
    return float(value)


# -- plain http.server transport --------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    service: KeyboardService   # filled in by make_server

    protocol_version = "HTTP/1.1"

    def _reply(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _body(self) -> Optional[dict]:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            parsed = json.loads(raw)
        except json.JSONDecodeError:
            return None
        return parsed if isinstance(parsed, dict) else None

    def _handle(self, method: str) -> None:
        body = self._body()
        if body is None:
            self._reply(400, {"error": "body must be a JSON object"})
            return
        status, payload = self.service.dispatch(method, self.path, body)
        self._reply(status, payload)

    def do_POST(self) -> None:
        self._handle("POST")

    def do_GET(self) -> None:
        self._handle("GET")

    def do_DELETE(self) -> None:
        self._handle("DELETE")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods",
                         "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s %s", self.address_string(), fmt % args)


def make_server(service: KeyboardService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    """A ready ThreadingHTTPServer; port 0 picks a free port."""
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve(service: KeyboardService, host: str = "127.0.0.1",
          port: int = 8900) -> None:
    """Run the HTTP server until interrupted."""
    server = make_server(service, host, port)
    log.info("serving on http://%s:%d", *server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()
