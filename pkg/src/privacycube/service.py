"""Long-running notice service: registry management, event ingestion, state
queries, focus control, and a server-sent-events push stream.

All mutations funnel through one lock into a single engine value; the
append-only event log is written inside that critical section, before the
mutation is acknowledged or broadcast, so a replay of the log always
reconstructs the live state.
"""

from __future__ import annotations

import json
import logging
import queue
import signal
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .engine import (
    CollectionEvent,
    CubeState,
    EngineState,
    EventType,
    apply_event,
    compute_cube_state,
    cube_state_to_json,
    delta_to_json,
    diff_states,
    initial_state,
    register_device,
    set_focus,
    unregister_device,
)
from .errors import (
    CorruptEntry,
    MalformedDocument,
    MissingField,
    PrivacyCubeError,
    SequenceGap,
    UnknownDevice,
)
from .profiles import Registry, parse_profile, profile_to_dict, registry_to_dict
from .taxonomy import parse_taxonomy_term

logger = logging.getLogger("privacycube.service")

_SUBSCRIBER_QUEUE_LIMIT = 256


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 7907
    profile_dir: Path | None = None
    event_log_path: Path = Path("privacycube.events.jsonl")
    keepalive_s: float = 15.0

    def validate(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port must be in [1, 65535], got {self.port}")
        if self.profile_dir is not None and not Path(self.profile_dir).is_dir():
            raise ValueError(f"profile directory not readable: {self.profile_dir}")
        parent = Path(self.event_log_path).resolve().parent
        if not parent.is_dir():
            raise ValueError(f"event-log directory does not exist: {parent}")


def parse_collection_event(obj: dict, now_ms: int) -> CollectionEvent:
    """Validate a posted event body; absent timestamps get the wall clock."""
    if not isinstance(obj, dict):
        raise MalformedDocument("/", "expected a JSON object")
    if "type" not in obj:
        raise MissingField("type")
    if obj["type"] not in ("start", "stop"):
        raise MalformedDocument("/type", "expected \"start\" or \"stop\"")
    if "device_id" not in obj:
        raise MissingField("device_id")
    if not isinstance(obj["device_id"], str):
        raise MalformedDocument("/device_id", "expected a string")
    timestamp = obj.get("timestamp_ms", now_ms)
    if not isinstance(timestamp, int) or timestamp < 0:
        raise MalformedDocument("/timestamp_ms", "expected a non-negative integer")
    categories = None
    if "categories" in obj and obj["categories"] is not None:
        if obj["type"] != "start":
            raise MalformedDocument("/categories", "only start events take categories")
        raw = obj["categories"]
        if not isinstance(raw, list) or not raw:
            raise MalformedDocument("/categories", "expected a non-empty array")
        categories = frozenset(parse_taxonomy_term("category", c) for c in raw)
    extra = set(obj) - {"type", "device_id", "timestamp_ms", "categories"}
    if extra:
        raise MalformedDocument(f"/{sorted(extra)[0]}", "unknown field")
    variant = EventType.START if obj["type"] == "start" else EventType.STOP
    return CollectionEvent(variant, obj["device_id"], timestamp, categories)


def _event_mutation(event: CollectionEvent) -> dict:
    payload: dict = {
        "kind": "event",
        "type": event.variant.value,
        "device_id": event.device_id,
        "timestamp_ms": event.timestamp_ms,
    }
    if event.categories is not None:
        payload["categories"] = sorted(c.value for c in event.categories)
    return payload


def _apply_mutation(state: EngineState, mutation: dict) -> EngineState:
    kind = mutation.get("kind")
    if kind == "register":
        profile = parse_profile(json.dumps(mutation["profile"]))
        return register_device(state, profile, mutation["timestamp_ms"])
    if kind == "unregister":
        return unregister_device(state, mutation["device_id"], mutation["timestamp_ms"])
    if kind == "event":
        categories = mutation.get("categories")
        event = CollectionEvent(
            EventType(mutation["type"]),
            mutation["device_id"],
            mutation["timestamp_ms"],
            None if categories is None else frozenset(
                parse_taxonomy_term("category", c) for c in categories
            ),
        )
        return apply_event(state, event)
    if kind == "focus":
        return set_focus(state, mutation["device_id"], mutation["timestamp_ms"])
    raise ValueError(f"unknown mutation kind: {kind!r}")


def replay_event_log(path: str | Path, profiles: Registry) -> EngineState:
    """Re-apply a recorded mutation sequence on top of the base registry."""
    state = initial_state(profiles)
    path = Path(path)
    if not path.exists():
        return state
    with path.open("r", encoding="utf-8") as handle:
        expected_seq = 0
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                seq = entry["seq"]
                mutation = entry["mutation"]
                recorded_version = entry["version"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorruptEntry(line_number, str(exc))
            if seq != expected_seq:
                raise SequenceGap(expected_seq, seq)
            expected_seq += 1
            try:
                state = _apply_mutation(state, mutation)
            except (PrivacyCubeError, ValueError, KeyError) as exc:
                raise CorruptEntry(line_number, f"mutation failed: {exc}")
            if state.version != recorded_version:
                raise CorruptEntry(
                    line_number,
                    f"version mismatch: log says {recorded_version}, replay got {state.version}",
                )
    return state


@dataclass
class _Subscriber:
    events: queue.Queue = field(default_factory=lambda: queue.Queue(_SUBSCRIBER_QUEUE_LIMIT))


class PrivacyCubeService:
    """Owns the engine value, the event log, and the subscriber set."""

    def __init__(self, config: ServiceConfig, registry: Registry):
        self.config = config
        self._lock = threading.Lock()
        self._state = replay_event_log(config.event_log_path, registry)
        self._cube = compute_cube_state(self._state)
        self._seq = _count_entries(config.event_log_path)
        self._log_handle = open(config.event_log_path, "a", encoding="utf-8")
        self._subscribers: list[_Subscriber] = []
        self._stopping = threading.Event()
        self._httpd: ThreadingHTTPServer | None = None

    # -- mutation path ------------------------------------------------------

    def _mutate(self, mutation: dict) -> CubeState:
        with self._lock:
            new_state = _apply_mutation(self._state, mutation)
            new_cube = compute_cube_state(new_state)
            delta = diff_states(self._cube, new_cube)
            record = {
                "seq": self._seq,
                "wall_ms": int(time.time() * 1000),
                "mutation": mutation,
                "version": new_state.version,
            }
            self._log_handle.write(json.dumps(record, separators=(",", ":")) + "\n")
            self._log_handle.flush()
            self._seq += 1
            self._state = new_state
            self._cube = new_cube
            payload = delta_to_json(delta)
            for subscriber in self._subscribers:
                try:
                    subscriber.events.put_nowait(payload)
                except queue.Full:
                    # Slow client: it will notice the version gap and re-snapshot.
                    pass
            return new_cube

    def register_profile(self, document: bytes, now_ms: int) -> dict:
        profile = parse_profile(document)
        self._mutate(
            {
                "kind": "register",
                "profile": profile_to_dict(profile),
                "timestamp_ms": now_ms,
            }
        )
        entry = self.registry().get(profile.device_id)
        return {
            "device_id": profile.device_id,
            "registration_index": entry.index,
            "colour": entry.colour.hex,
        }

    def unregister_profile(self, device_id: str, now_ms: int) -> None:
        self._mutate(
            {"kind": "unregister", "device_id": device_id, "timestamp_ms": now_ms}
        )

    def ingest_event(self, event: CollectionEvent) -> CubeState:
        return self._mutate(_event_mutation(event))

    def change_focus(self, device_id: str | None, now_ms: int) -> CubeState:
        return self._mutate(
            {"kind": "focus", "device_id": device_id, "timestamp_ms": now_ms}
        )

    # -- read path ----------------------------------------------------------

    def cube_state(self) -> CubeState:
        with self._lock:
            return self._cube

    def registry(self) -> Registry:
        with self._lock:
            return self._state.registry

    def subscribe(self) -> tuple[str, _Subscriber]:
        """Atomically snapshot the cube and join the delta stream."""
        with self._lock:
            subscriber = _Subscriber()
            self._subscribers.append(subscriber)
            return cube_state_to_json(self._cube), subscriber

    def unsubscribe(self, subscriber: _Subscriber) -> None:
        with self._lock:
            if subscriber in self._subscribers:
                self._subscribers.remove(subscriber)

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> int:
        """Bind and serve on a background thread; returns the bound port."""
        handler = _make_handler(self)
        self._httpd = ThreadingHTTPServer((self.config.host, self.config.port), handler)
        self._httpd.daemon_threads = True
        thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        thread.start()
        port = self._httpd.server_address[1]
        logger.info("listening on %s:%d", self.config.host, port)
        return port

    def stop(self) -> None:
        self._stopping.set()
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        self._log_handle.close()

    @property
    def stopping(self) -> threading.Event:
        return self._stopping


def _count_entries(path: Path) -> int:
    if not Path(path).exists():
        return 0
    with open(path, "r", encoding="utf-8") as handle:
        return sum(1 for line in handle if line.strip())


def _make_handler(service: PrivacyCubeService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        # -- plumbing --------------------------------------------------------

        def log_message(self, format, *args):  # noqa: A002 - stdlib signature
            logger.debug("%s %s", self.address_string(), format % args)

        def _send_json(self, status: int, payload: str) -> None:
            body = payload.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, status: int, code: str, message: str) -> None:
            self._send_json(
                status, json.dumps({"error": code, "detail": message})
            )

        def _read_body(self) -> bytes:
            length = int(self.headers.get("Content-Length", 0))
            return self.rfile.read(length) if length else b""

        def _now_ms(self) -> int:
            return int(time.time() * 1000)

        # -- routes -----------------------------------------------------------

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            if self.path == "/api/state":
                self._send_json(200, cube_state_to_json(service.cube_state()))
            elif self.path == "/api/devices":
                payload = json.dumps(registry_to_dict(service.registry()), separators=(",", ":"))
                self._send_json(200, payload)
            elif self.path == "/api/stream":
                self._stream()
            else:
                self._send_error_json(404, "not_found", f"no route {self.path}")

        def do_POST(self):
            try:
                if self.path == "/api/devices":
                    result = service.register_profile(self._read_body(), self._now_ms())
                    self._send_json(200, json.dumps(result))
                elif self.path == "/api/events":
                    obj = self._parse_body_json()
                    event = parse_collection_event(obj, self._now_ms())
                    cube = service.ingest_event(event)
                    self._send_json(200, json.dumps({"version": cube.version}))
                elif self.path == "/api/focus":
                    obj = self._parse_body_json()
                    if not isinstance(obj, dict) or "device_id" not in obj:
                        raise MissingField("device_id")
                    target = obj["device_id"]
                    if target is not None and not isinstance(target, str):
                        raise MalformedDocument("/device_id", "expected a string or null")
                    cube = service.change_focus(target, self._now_ms())
                    self._send_json(
                        200, json.dumps({"version": cube.version, "focus": cube.focus})
                    )
                else:
                    self._send_error_json(404, "not_found", f"no route {self.path}")
            except PrivacyCubeError as exc:
                self._send_error_json(400, exc.code, str(exc))

        def do_DELETE(self):
            if self.path.startswith("/api/devices/"):
                device_id = self.path[len("/api/devices/"):]
                try:
                    service.unregister_profile(device_id, self._now_ms())
                except UnknownDevice as exc:
                    self._send_error_json(404, exc.code, str(exc))
                    return
                except PrivacyCubeError as exc:
                    self._send_error_json(400, exc.code, str(exc))
                    return
                self._send_json(200, json.dumps({"removed": device_id}))
            else:
                self._send_error_json(404, "not_found", f"no route {self.path}")

        def _parse_body_json(self):
            body = self._read_body()
            try:
                return json.loads(body) if body else {}
            except json.JSONDecodeError as exc:
                raise MalformedDocument(f"line {exc.lineno} column {exc.colno}", exc.msg)

        # -- SSE ---------------------------------------------------------------

        def _stream(self) -> None:
            snapshot, subscriber = service.subscribe()
            try:
                self.send_response(200)
                self.send_header("Content-Type", "text/event-stream")
                self.send_header("Cache-Control", "no-cache")
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Connection", "close")
                self.end_headers()
                self.wfile.write(f"event: snapshot\ndata: {snapshot}\n\n".encode())
                self.wfile.flush()
                while not service.stopping.is_set():
                    try:
                        payload = subscriber.events.get(timeout=service.config.keepalive_s)
                    except queue.Empty:
                        self.wfile.write(b": keep-alive\n\n")
                        self.wfile.flush()
                        continue
                    self.wfile.write(f"event: delta\ndata: {payload}\n\n".encode())
                    self.wfile.flush()
            except (OSError, ValueError):
                # Client went away or the server socket closed under us.
                pass
            finally:
                service.unsubscribe(subscriber)

    return Handler


def serve(config: ServiceConfig, registry: Registry) -> None:
    """Run until SIGINT/SIGTERM. Startup failures raise before serving."""
    config.validate()
    service = PrivacyCubeService(config, registry)
    port = service.start()

    done = threading.Event()

    def _handle_signal(signum, frame):
        logger.info("received signal %d, shutting down", signum)
        done.set()

    signal.signal(signal.SIGINT, _handle_signal)
    signal.signal(signal.SIGTERM, _handle_signal)
    logger.info("privacycube service ready on port %d", port)
    done.wait()
    service.stop()
