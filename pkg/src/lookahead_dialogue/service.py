"""HTTP chat service hosting live sessions against a loaded checkpoint.

Endpoints (JSON bodies):
    POST /session {"goals": bits|null}        -> 201 {"id", "goals", "human_goals"}
    POST /session/{id}/message {"text": ...}  -> 200 {"reply", "done_prob", "status"}
    POST /session/{id}/end                    -> 200 {"status": "ended"}
    GET  /session/{id}                        -> full transcript + status
    GET  /model/info                          -> model dims + goal-label manifest
    GET  /healthz                             -> 200

The human plays the customer; the agent answers with server-side goals (the
``goals`` field of POST /session; sampled from the server pool when absent).
Model parameters are shared read-only across sessions; each session's state
is mutated under its own lock.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import __version__
from .corpus import DialogueSession, GoalVector, Utterance, tokenize
from .datagen import CUSTOMER_POOL, FAREWELL_TOKEN, SERVER_POOL, goal_labels
from .evaluation import AgentBundle

__all__ = ["ChatSession", "DialogueService", "make_server", "serve"]

MAX_SESSION_TURNS = 40


@dataclass
class ChatSession:
    id: str
    goals: GoalVector          # agent (server) side
    human_goals: GoalVector    # shown to the human as their checklist
    turns: list = field(default_factory=list)  # {"speaker", "text"} dicts
    status: str = "open"
    lock: threading.Lock = field(default_factory=threading.Lock)

    def view(self) -> dict:
        return {
            "id": self.id,
            "goals": list(self.goals.bits),
            "human_goals": list(self.human_goals.bits),
            "turns": list(self.turns),
            "status": self.status,
        }


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _is_farewell(text: str) -> bool:
    return FAREWELL_TOKEN in tokenize(text)


class DialogueService:
    """Session store plus the shared inference engine."""

    def __init__(self, bundle: AgentBundle, seed: int = 0):
        self.bundle = bundle
        self.sessions = {}
        self._registry_lock = threading.Lock()
        self._rng = np.random.default_rng(seed)

    def model_info(self) -> dict:
        cfg = self.bundle.config
        return {
            "k": cfg.lookahead_k,
            "dims": {
                "embedding": cfg.d_embed,
                "goal_hidden": cfg.d_goal,
                "hidden": cfg.d_hidden,
            },
            "vocab_size": cfg.vocab_size,
            "version": __version__,
            "goal_labels": goal_labels(),
        }

    def create_session(self, goals_bits=None, human_bits=None) -> ChatSession:
        with self._registry_lock:
            if goals_bits is None:
                goals = SERVER_POOL[int(self._rng.integers(len(SERVER_POOL)))]
            else:
                goals = _parse_goals(goals_bits)
            if human_bits is None:
                human = CUSTOMER_POOL[int(self._rng.integers(len(CUSTOMER_POOL)))]
            else:
                human = _parse_goals(human_bits)
            session = ChatSession(id=uuid.uuid4().hex, goals=goals, human_goals=human)
            self.sessions[session.id] = session
        return session

    def get_session(self, session_id: str) -> ChatSession:
        with self._registry_lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id}")
        return session

    def post_message(self, session_id: str, text: str) -> dict:
        if not isinstance(text, str) or not text.strip():
            raise ServiceError(400, "message text must be a nonempty string")
        session = self.get_session(session_id)
        with session.lock:
            if session.status != "open":
                raise ServiceError(409, "session already ended")
            session.turns.append({"speaker": "A", "text": text})
            texts = [t["text"] for t in session.turns]
            reply, done = self.bundle.reply(session.goals, texts)
            session.turns.append({"speaker": "B", "text": reply})
            ended = (
                _is_farewell(text)
                or (_is_farewell(reply) and done > 0.5)
                or len(session.turns) >= MAX_SESSION_TURNS
            )
            if ended:
                session.status = "ended"
            return {"reply": reply, "done_prob": done, "status": session.status}

    def end_session(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            session.status = "ended"
            return {"status": "ended"}

    def session_record(self, session: ChatSession, outcome: int) -> DialogueSession:
        turns = tuple(Utterance(t["speaker"], t["text"]) for t in session.turns)
        return DialogueSession(session.human_goals, session.goals, turns, outcome)


def _parse_goals(bits) -> GoalVector:
    try:
        return GoalVector(tuple(int(b) for b in bits))
    except (TypeError, ValueError) as exc:
        raise ServiceError(400, f"bad goal bits: {exc}") from exc


class _Handler(BaseHTTPRequestHandler):
    service: DialogueService = None

    # quiet the default stderr-per-request logging
    def log_message(self, fmt, *args):
        pass

    def _send(self, status: int, payload: dict) -> None:
        blob = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(blob)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            parsed = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ServiceError(400, f"malformed body: {exc}") from exc
        if not isinstance(parsed, dict):
            raise ServiceError(400, "body must be a JSON object")
        return parsed

    def do_OPTIONS(self):
        self._send(204, {})

    def do_GET(self):
        try:
            parts = [p for p in self.path.split("/") if p]
            if self.path == "/healthz":
                self._send(200, {"status": "ok"})
            elif self.path == "/model/info":
                self._send(200, self.service.model_info())
            elif len(parts) == 2 and parts[0] == "session":
                self._send(200, self.service.get_session(parts[1]).view())
            else:
                self._send(404, {"error": "no such resource"})
        except ServiceError as exc:
            self._send(exc.status, {"error": exc.message})

    def do_POST(self):
        try:
            parts = [p for p in self.path.split("/") if p]
            body = self._body()
            if parts == ["session"]:
                session = self.service.create_session(
                    body.get("goals"), body.get("human_goals")
                )
                self._send(201, {
                    "id": session.id,
                    "goals": list(session.goals.bits),
                    "human_goals": list(session.human_goals.bits),
                })
            elif len(parts) == 3 and parts[0] == "session" and parts[2] == "message":
                self._send(200, self.service.post_message(parts[1], body.get("text")))
            elif len(parts) == 3 and parts[0] == "session" and parts[2] == "end":
                self._send(200, self.service.end_session(parts[1]))
            else:
                self._send(404, {"error": "no such resource"})
        except ServiceError as exc:
            self._send(exc.status, {"error": exc.message})


def make_server(bundle: AgentBundle, host: str = "127.0.0.1", port: int = 8000, seed: int = 0):
    """Build (but do not start) the threading HTTP server; port 0 picks a free one."""
    service = DialogueService(bundle, seed=seed)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    return server, service


def serve(bundle: AgentBundle, host: str = "127.0.0.1", port: int = 8000, seed: int = 0) -> None:
    server, _ = make_server(bundle, host, port, seed)
    print(f"serving on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
