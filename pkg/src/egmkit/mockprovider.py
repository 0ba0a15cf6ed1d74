"""A tiny local provider for demos and end-to-end tests.

Serves a JSONL corpus over HTTP with the same page/pageSize contract the
real clients use. It deliberately ignores the query string and returns
everything: providers interpret queries inconsistently, and the pipeline's
local re-filtering is the semantics that counts.

Run standalone:  python -m egmkit.mockprovider --corpus records.jsonl --port 8800
"""

from __future__ import annotations

import argparse
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from urllib.parse import parse_qs, urlparse

from .providers import Paging, ProviderConfig


def load_corpus(path: str | None = None) -> list[dict]:
    if path is None:
        text = resources.files("egmkit.data").joinpath("mock_corpus.jsonl").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class _Handler(BaseHTTPRequestHandler):
    corpus: list[dict] = []
    require_key: str | None = None

    def log_message(self, *args):  # keep test output quiet
        pass

    def do_GET(self):
        parsed = urlparse(self.path)
        if parsed.path != "/search":
            self._send(404, {"error": "not found"})
            return
        if self.require_key and self.headers.get("X-Api-Key") != self.require_key:
            self._send(401, {"error": "missing or bad API key"})
            return
        qs = parse_qs(parsed.query)
        page = int(qs.get("page", ["1"])[0])
        size = int(qs.get("pageSize", ["20"])[0])
        start = (page - 1) * size
        items = self.corpus[start:start + size]
        self._send(200, {"items": items, "total": len(self.corpus)})

    def _send(self, status: int, payload: dict):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class MockProviderServer:
    """Threaded HTTP server over a record corpus; use as a context manager."""

    def __init__(self, corpus: list[dict], port: int = 0, require_key: str | None = None):
        handler = type("Handler", (_Handler,), {"corpus": corpus, "require_key": require_key})
        self._server = ThreadingHTTPServer(("127.0.0.1", port), handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}/search"

    def provider_config(self, name: str = "mock", rate_limit: float = 1000.0,
                        page_size: int = 20, **overrides) -> ProviderConfig:
        return ProviderConfig(
            name=name,
            base_url=self.base_url,
            query_param="q",
            paging=Paging(page_param="page", size_param="pageSize",
                          page_size=page_size, style="page"),
            rate_limit=rate_limit,
            total_path="total",
            field_map={
                "items": "items", "title": "title", "abstract": "abstract",
                "doi": "doi", "year": "year", "authors": "authors",
                "venue": "venue", "url": "url",
            },
            **overrides,
        )

    def __enter__(self) -> "MockProviderServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", default=None, help="JSONL corpus (default: bundled demo corpus)")
    parser.add_argument("--port", type=int, default=8800)
    parser.add_argument("--write-config", default=None,
                        help="write a matching provider config file and exit after starting")
    args = parser.parse_args(argv)

    corpus = load_corpus(args.corpus)
    server = MockProviderServer(corpus, port=args.port)
    with server:
        if args.write_config:
            cfg = server.provider_config()
            doc = {
                "name": cfg.name, "base_url": cfg.base_url, "query_param": cfg.query_param,
                "paging": {"page_param": "page", "size_param": "pageSize",
                           "page_size": cfg.paging.page_size, "style": "page"},
                "rate_limit": cfg.rate_limit, "total_path": "total",
                "field_map": cfg.field_map,
            }
            with open(args.write_config, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
        print(f"mock provider serving {len(corpus)} records at {server.base_url}")
        try:
            threading.Event().wait()
        except KeyboardInterrupt:
            pass


if __name__ == "__main__":
    main()
