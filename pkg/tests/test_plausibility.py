"""Plausibility backends: bigram closed forms, stub filtering, remote client."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, settings, strategies as st

from semattack.errors import ScorerProtocolError, ScorerTransportError
from semattack.plausibility import (
    BigramScorer, MaskQuery, RemoteScorer, StubScorer, filter_candidates,
    fit_bigram, score,
)

# Probabilities for the masked audio sentence, as used by the acceptance stub.
MASKED_SENTENCE = ("i", "bought", "these", "to", "have", "[MASK]", "sound", "outside")
STUB_TABLE = {"many": 3.76e-05, "extra": 0.01442, "full": 0.00021, "total": 5.21e-05}


def stub_query():
    return MaskQuery(tokens=MASKED_SENTENCE, mask_index=5,
                     candidates=("many", "extra", "full", "total"))


def test_stub_scorer_returns_table_values():
    probs = score(stub_query(), StubScorer(STUB_TABLE))
    assert probs == [3.76e-05, 0.01442, 0.00021, 5.21e-05]


def test_filter_candidates_selects_extra_only():
    survivors = filter_candidates(stub_query(), 1e-3, StubScorer(STUB_TABLE))
    assert survivors == ["extra"]


def test_filter_threshold_zero_keeps_nonzero():
    survivors = filter_candidates(stub_query(), 0.0, StubScorer(STUB_TABLE))
    assert survivors == ["many", "extra", "full", "total"]


def test_filter_threshold_one_empty():
    assert filter_candidates(stub_query(), 1.0, StubScorer(STUB_TABLE)) == []


@settings(max_examples=40, derandomize=True)
@given(st.floats(0, 1), st.floats(0, 1))
def test_filter_monotone_in_threshold(t1, t2):
    lo, hi = min(t1, t2), max(t1, t2)
    scorer = StubScorer(STUB_TABLE)
    survivors_hi = set(filter_candidates(stub_query(), hi, scorer))
    survivors_lo = set(filter_candidates(stub_query(), lo, scorer))
    assert survivors_hi <= survivors_lo


def test_mask_query_validation():
    with pytest.raises(ValueError):
        MaskQuery(tokens=("a",), mask_index=1, candidates=("b",))
    with pytest.raises(ValueError):
        MaskQuery(tokens=("a",), mask_index=0, candidates=())


# -- bigram backend ----------------------------------------------------------


def test_bigram_hand_counts():
    model = fit_bigram(["a", "b", "a", "b"])
    # count(a->b)=2, count(a as context)=2, |V|=2
    assert model.conditional("b", "a") == pytest.approx((2 + 0.01) / (2 + 0.02))


def test_bigram_unseen_floor():
    model = fit_bigram(["a", "b", "a", "b"])
    assert model.conditional("a", "a") == pytest.approx(0.01 / (2 + 0.02))
    q = MaskQuery(tokens=("a", "x"), mask_index=1, candidates=("a",))
    assert score(q, model) == [pytest.approx(0.01 / (2 + 0.02))]


def test_bigram_conditionals_sum_to_one():
    stream = list("abracadabra")
    model = fit_bigram(stream)
    vocab = sorted(set(stream))
    for context in vocab + ["unseen"]:
        total = sum(model.conditional(w, context) for w in vocab)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_bigram_attested_beats_unattested():
    stream = "the sound is great and the sound is clear".split()
    model = fit_bigram(stream)
    q = MaskQuery(tokens=("the", "sound"), mask_index=1, candidates=("sound", "great"))
    p_sound, p_great = score(q, model)
    assert p_sound > p_great


def test_bigram_start_of_sequence_uses_unigram():
    model = fit_bigram(["a", "b", "a"])
    q = MaskQuery(tokens=("a", "b"), mask_index=0, candidates=("a", "b"))
    pa, pb = score(q, model)
    assert pa == pytest.approx((2 + 0.01) / (3 + 0.02))
    assert pb == pytest.approx((1 + 0.01) / (3 + 0.02))


def test_fit_bigram_empty_rejected():
    with pytest.raises(ValueError):
        fit_bigram([])


# -- remote client ------------------------------------------------------------


class _ScorerHandler(BaseHTTPRequestHandler):
    """Minimal wire-protocol server used to exercise the client."""

    mode = "ok"

    def do_POST(self):
        if self.path != "/v1/score":
            self.send_error(404)
            return
        raw = self.rfile.read(int(self.headers.get("Content-Length", 0)))
        body = json.loads(raw)
        mode = type(self).mode
        if mode == "ok":
            probs = [STUB_TABLE.get(c, 0.0) for c in body["candidates"]]
            payload = {"probabilities": probs}
            status = 200
        elif mode == "bad-request":
            payload = {"error": "malformed body"}
            status = 400
        elif mode == "misaligned":
            payload = {"probabilities": [0.5]}
            status = 200
        elif mode == "garbage":
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(b"not json")
            return
        else:
            payload = {"error": "boom"}
            status = 500
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def wire_server():
    server = HTTPServer(("127.0.0.1", 0), _ScorerHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    thread.join()


def test_remote_scorer_happy_path(wire_server):
    _ScorerHandler.mode = "ok"
    client = RemoteScorer(wire_server)
    try:
        assert filter_candidates(stub_query(), 1e-3, client) == ["extra"]
    finally:
        client.close()


def test_remote_scorer_transport_error_unreachable():
    client = RemoteScorer("http://127.0.0.1:1", timeout=0.5)
    try:
        with pytest.raises(ScorerTransportError):
            score(stub_query(), client)
    finally:
        client.close()


def test_remote_scorer_500_is_transport_error(wire_server):
    _ScorerHandler.mode = "server-error"
    client = RemoteScorer(wire_server)
    try:
        with pytest.raises(ScorerTransportError, match="500"):
            score(stub_query(), client)
    finally:
        client.close()


def test_remote_scorer_400_is_protocol_error(wire_server):
    _ScorerHandler.mode = "bad-request"
    client = RemoteScorer(wire_server)
    try:
        with pytest.raises(ScorerProtocolError, match="malformed body"):
            score(stub_query(), client)
    finally:
        client.close()


def test_remote_scorer_misaligned_response(wire_server):
    _ScorerHandler.mode = "misaligned"
    client = RemoteScorer(wire_server)
    try:
        with pytest.raises(ScorerProtocolError):
            score(stub_query(), client)
    finally:
        client.close()


def test_remote_scorer_garbage_response(wire_server):
    _ScorerHandler.mode = "garbage"
    client = RemoteScorer(wire_server)
    try:
        with pytest.raises(ScorerProtocolError):
            score(stub_query(), client)
    finally:
        client.close()


def test_backends_interchangeable(wire_server):
    _ScorerHandler.mode = "ok"
    remote = RemoteScorer(wire_server)
    stub = StubScorer(STUB_TABLE)
    try:
        assert score(stub_query(), remote) == score(stub_query(), stub)
    finally:
        remote.close()
