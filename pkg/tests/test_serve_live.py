"""End-to-end check over a real TCP socket rather than the test client."""

import socket
import threading
import time

import pytest
import requests
import uvicorn

from crowdwalk.gallery import SolutionStore, record_to_dict
from crowdwalk.service import create_app

from test_gallery import make_record


def free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture
def live_server(tmp_path):
    store = SolutionStore(tmp_path / "store")
    port = free_port()
    config = uvicorn.Config(create_app(store), host="127.0.0.1", port=port,
                            log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            if requests.get(f"{base}/healthz", timeout=1).status_code == 200:
                break
        except requests.ConnectionError:
            time.sleep(0.05)
    else:
        pytest.fail("server did not come up")
    yield store, base
    server.should_exit = True
    thread.join(timeout=5)


def test_full_cycle_over_tcp(live_server):
    store, base = live_server
    record = make_record("live-1")
    assert requests.post(f"{base}/api/solutions",
                         json=record_to_dict(record), timeout=10).status_code == 201

    listing = requests.get(f"{base}/api/solutions", timeout=10).json()
    assert [item["id"] for item in listing["items"]] == ["live-1"]

    trace = requests.get(f"{base}/api/solutions/live-1/trace", timeout=10)
    assert trace.content == store.trace_bytes("live-1")

    score = requests.post(f"{base}/api/solutions/live-1/ratings",
                          json={"value": 1.0, "rater_token": "tcp"}, timeout=10).json()
    assert score == {"mean": 1.0, "count": 1, "class": "good"}

    assert requests.post(f"{base}/api/solutions/live-1/ratings",
                         json={"value": 2.0, "rater_token": "tcp"},
                         timeout=10).status_code == 422
    assert requests.get(f"{base}/api/solutions/ghost", timeout=10).status_code == 404


def test_cors_headers_present(live_server):
    _store, base = live_server
    response = requests.get(f"{base}/api/solutions", timeout=10,
                            headers={"Origin": "http://elsewhere.example"})
    assert response.headers.get("access-control-allow-origin") == "*"
