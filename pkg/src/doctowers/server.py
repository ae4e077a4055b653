"""Local HTTP server for the browser viewer.

Serves the embedded viewer assets at /, the selected scene at
/scene.json, and PDFs from an optional directory at /pdf/. Read-only
data, so concurrent requests are safe.
"""

from __future__ import annotations

import logging
import mimetypes
import posixpath
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

DEFAULT_PORT = 8080
PORT_ENV_VAR = "DOCTOWERS_PORT"


def _asset_bytes(name: str) -> Optional[bytes]:
    ref = resources.files("doctowers").joinpath("viewer_assets").joinpath(name)
    try:
        return ref.read_bytes()
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError):
        return None


def _safe_name(raw: str) -> Optional[str]:
    """Normalize a URL path component; None when it tries to escape."""
    name = posixpath.normpath(raw)
    if name.startswith(("/", "..")) or "/.." in name or name == ".":
        return None
    return name


def make_handler(scene_bytes: bytes, pdf_dir: Optional[Path]):
    class ViewerHandler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # one line per request
            logger.info("%s %s", self.address_string(), fmt % args)

        def _send(self, status: int, body: bytes, content_type: str):
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _not_found(self):
            self._send(404, b"not found\n", "text/plain; charset=utf-8")

        def do_GET(self):
            path = self.path.split("?", 1)[0].split("#", 1)[0]
            if path in ("/", "/index.html"):
                body = _asset_bytes("index.html")
                if body is None:
                    self._send(500, b"viewer assets missing\n",
                               "text/plain; charset=utf-8")
                    return
                self._send(200, body, "text/html; charset=utf-8")
            elif path == "/scene.json":
                self._send(200, scene_bytes, "application/json")
            elif path.startswith("/assets/"):
                name = _safe_name(path[len("/assets/"):])
                body = _asset_bytes(name) if name else None
                if body is None:
                    self._not_found()
                    return
                ctype = mimetypes.guess_type(name)[0] or "application/octet-stream"
                self._send(200, body, ctype)
            elif path.startswith("/pdf/") and pdf_dir is not None:
                name = _safe_name(path[len("/pdf/"):])
                if not name:
                    self._not_found()
                    return
                target = pdf_dir / name
                if not target.is_file():
                    self._not_found()
                    return
                self._send(200, target.read_bytes(), "application/pdf")
            else:
                self._not_found()

    return ViewerHandler


def make_server(scene_bytes: bytes, pdf_dir: Optional[Path],
                port: int, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    """Bind the server; raises OSError when the port is busy."""
    handler = make_handler(scene_bytes, pdf_dir)
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(server: ThreadingHTTPServer):
    host, port = server.server_address[:2]
    logger.info("serving viewer on http://%s:%d/", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("interrupted, shutting down")
    finally:
        server.server_close()
