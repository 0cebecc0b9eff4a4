"""A scriptable local chat-completions endpoint for client tests."""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class StubEndpoint:
    """Serves /chat/completions from a directive queue.

    Directives, consumed one per request:
      ("reply", text)   200 with the given assistant text
      ("echo",)         200 echoing the last user message's text back
      ("status", code)  the given status with a small plain body
      ("sleep", s)      sleep s seconds, then 200 "1.Stop"
    An empty queue behaves like ("reply", "1.Stop").
    """

    def __init__(self):
        self.directives: list[tuple] = []
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        self.in_flight = 0
        self.max_in_flight_seen = 0
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                with outer._lock:
                    outer.requests.append(payload)
                    outer.in_flight += 1
                    outer.max_in_flight_seen = max(
                        outer.max_in_flight_seen, outer.in_flight
                    )
                    directive = (
                        outer.directives.pop(0) if outer.directives else ("reply", "1.Stop")
                    )
                try:
                    self._respond(payload, directive)
                finally:
                    with outer._lock:
                        outer.in_flight -= 1

            def _respond(self, payload, directive):
                kind = directive[0]
                if kind == "status":
                    self.send_response(directive[1])
                    body = b"scripted error"
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                    return
                if kind == "sleep":
                    time.sleep(directive[1])
                    text = "1.Stop"
                elif kind == "echo":
                    text = _last_user_text(payload)
                else:
                    text = directive[1]
                body = json.dumps(
                    {"choices": [{"message": {"role": "assistant", "content": text}}]}
                ).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)


def _last_user_text(payload: dict) -> str:
    for message in reversed(payload.get("messages", [])):
        if message.get("role") == "user":
            content = message["content"]
            if isinstance(content, str):
                return content
            for part in content:
                if part.get("type") == "text":
                    return part["text"]
    return ""
