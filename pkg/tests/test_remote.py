from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bioforge.agent import AgentConfig, run_graph
from bioforge.remote import (ENDPOINT_ENV, AdapterConfig, AdapterError,
                             call_remote_generator, extract_script)

SCRIPT = "design r {\n  helical {\n    plies 8\n  }\n}\n"


class Handler(BaseHTTPRequestHandler):
    requests: list = []
    reply: object = {"text": "```bgs\n" + SCRIPT + "```"}

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).requests.append(body)
        data = json.dumps(type(self).reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def server(monkeypatch):
    monkeypatch.delenv(ENDPOINT_ENV, raising=False)
    Handler.requests = []
    Handler.reply = {"text": "```bgs\n" + SCRIPT + "```"}
    httpd = HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_port}/"
    httpd.shutdown()
    httpd.server_close()


def test_request_body(server):
    cfg = AdapterConfig(endpoint=server)
    text = call_remote_generator("make a helix", ["a", "b"], cfg)
    assert SCRIPT in text
    body = Handler.requests[0]
    assert body == {"prompt": "make a helix", "context": ["a", "b"], "temperature": 0.1}


def test_agent_sends_k_context_entries(server):
    cfg = AgentConfig(generator="remote", adapter=AdapterConfig(endpoint=server))
    state = run_graph("helical structure with 8 plies", cfg)
    assert len(Handler.requests[0]["context"]) == 2
    assert state.program_text == SCRIPT
    assert state.terminal == "Accepted" and not state.warnings


def test_bad_reply_raises(server):
    Handler.reply = {"nope": 1}
    with pytest.raises(AdapterError):
        call_remote_generator("x", [], AdapterConfig(endpoint=server))


def test_env_overrides_endpoint(server, monkeypatch):
    monkeypatch.setenv(ENDPOINT_ENV, server)
    assert AdapterConfig(endpoint="http://invalid.invalid/").resolved_endpoint() == server


def test_unreachable_falls_back_to_builtin(monkeypatch, caplog):
    monkeypatch.delenv(ENDPOINT_ENV, raising=False)
    adapter = AdapterConfig(endpoint="http://127.0.0.1:9/", max_retries=0, timeout=1)
    state = run_graph("voronoi foam", AgentConfig(generator="remote", adapter=adapter))
    assert any("RemoteFallback" in w for w in state.warnings)
    assert state.terminal == "Accepted"


def test_missing_endpoint(monkeypatch):
    monkeypatch.delenv(ENDPOINT_ENV, raising=False)
    with pytest.raises(AdapterError):
        call_remote_generator("x", [], AdapterConfig())


def test_adapter_config_validation():
    with pytest.raises(ValueError):
        AdapterConfig(temperature=-1)
    with pytest.raises(ValueError):
        AdapterConfig(max_retries=-1)


@pytest.mark.parametrize("raw, expected", [
    ("Here you go:\n```bgs\n" + SCRIPT + "```\nEnjoy", SCRIPT),
    ("```\n" + SCRIPT + "```", SCRIPT),
    ("Sure.\n" + SCRIPT, SCRIPT),
    (SCRIPT, SCRIPT),
    ("no program here", "no program here"),
])
def test_extract_script(raw, expected):
    assert extract_script(raw) == expected


@given(st.text(alphabet=st.characters(blacklist_characters="`"), max_size=80))
def test_extract_script_idempotent(noise):
    raw = noise + "\n```bgs\n" + SCRIPT + "```\n" + noise
    once = extract_script(raw)
    assert once == SCRIPT
    assert extract_script(once) == once
