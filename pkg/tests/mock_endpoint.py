"""Test doubles for HTTP: a scripted chat-completions endpoint and an
in-thread uvicorn runner for serving real ASGI apps during tests."""
from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def completion_payload(content: str, usage: dict | None = None) -> dict:
    payload = {"choices": [{"message": {"role": "assistant", "content": content}}]}
    if usage:
        payload["usage"] = usage
    return payload


class MockEndpoint:
    """Scripted OpenAI-compatible endpoint.

    `script(body) -> (status, payload)`; a str payload becomes the
    completion content of a 200-shaped chat response, bytes are sent raw.
    Records request bodies/headers and the concurrency high-water mark.
    """

    def __init__(self, script=None, delay: float = 0.0, models_status: int = 200):
        self.script = script or (lambda body: (200, "<think>\n\n</think>\nneutral"))
        self.delay = delay
        self.models_status = models_status
        self.requests: list[dict] = []
        self.max_in_flight_seen = 0
        self._in_flight = 0
        self._lock = threading.Lock()
        mock = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, status: int, data: bytes, content_type="application/json"):
                self.send_response(status)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                if self.path == "/v1/models":
                    self._send(mock.models_status, json.dumps({"data": []}).encode())
                else:
                    self._send(404, b'{"error": "not found"}')

            def do_POST(self):
                if self.path != "/v1/chat/completions":
                    self._send(404, b'{"error": "not found"}')
                    return
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with mock._lock:
                    mock.requests.append({"body": body, "headers": dict(self.headers)})
                    mock._in_flight += 1
                    mock.max_in_flight_seen = max(mock.max_in_flight_seen, mock._in_flight)
                try:
                    if mock.delay:
                        time.sleep(mock.delay)
                    status, payload = mock.script(body)
                finally:
                    with mock._lock:
                        mock._in_flight -= 1
                if isinstance(payload, str):
                    payload = completion_payload(payload)
                if isinstance(payload, bytes):
                    self._send(status, payload)
                else:
                    self._send(status, json.dumps(payload).encode())

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()


class ServedApp:
    """Run an ASGI app under real uvicorn on an ephemeral port."""

    def __init__(self, app):
        import uvicorn

        self._config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error", lifespan="off")
        self._server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self.base_url = ""

    def __enter__(self):
        self._thread.start()
        deadline = time.time() + 10
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("uvicorn did not start within 10s")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{port}"
        return self

    def __exit__(self, *exc):
        self._server.should_exit = True
        self._thread.join(timeout=5)
