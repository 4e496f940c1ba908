import threading
import time

import pytest
import uvicorn

from mlm_service.config import ServiceConfig
from mlm_service.scorer import CandidateNote

# Canned single-piece probabilities for the deterministic stand-in model.
FAKE_TABLE = {
    "many": 3.76e-05, "extra": 0.01442, "full": 0.00021, "total": 5.21e-05,
    "good": 0.02, "fantastic": 0.004, "nice": 0.009,
}


class FakeMaskedLM:
    """Deterministic in-process model implementing the scorer protocol.

    Single-piece candidates read from a canned table; a candidate containing
    hyphens simulates tokenizer splitting (probability is the product of its
    piece scores, with a note), matching the real backend's shape.
    """

    model_name = "fake-masked-lm"

    def __init__(self, ready: bool = True, oov_policy: str = "subtokens"):
        self._ready = ready
        self.oov_policy = oov_policy

    def ready(self) -> bool:
        return self._ready

    def load(self) -> None:
        self._ready = True

    def score(self, tokens, mask_index, candidates):
        probs, notes = [], []
        for candidate in candidates:
            pieces = candidate.split("-")
            if len(pieces) == 1:
                probs.append(FAKE_TABLE.get(candidate, 1e-6))
                continue
            if self.oov_policy == "zero":
                probs.append(0.0)
                notes.append(CandidateNote(candidate, "zero", len(pieces)))
                continue
            prob = 1.0
            for piece in pieces:
                prob *= FAKE_TABLE.get(piece, 1e-6)
            probs.append(prob)
            notes.append(CandidateNote(candidate, "subtokens", len(pieces)))
        return probs, notes


@pytest.fixture()
def config():
    return ServiceConfig(model_name="fake-masked-lm", max_length=64)


def start_live_server(app):
    """Run the app in a background uvicorn server on an ephemeral port."""
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0,
                                           log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("uvicorn did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    return server, thread, f"http://127.0.0.1:{port}"


def stop_live_server(server, thread):
    server.should_exit = True
    thread.join(timeout=5)


@pytest.fixture()
def live_service(config):
    from mlm_service.app import create_app

    app = create_app(config, scorer=FakeMaskedLM())
    server, thread, url = start_live_server(app)
    yield url
    stop_live_server(server, thread)
