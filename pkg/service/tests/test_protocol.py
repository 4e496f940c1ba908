"""Wire-protocol behavior of the HTTP layer (deterministic backend)."""

from concurrent.futures import ThreadPoolExecutor

from fastapi.testclient import TestClient

from mlm_service.app import create_app

from conftest import FakeMaskedLM

SENTENCE = ["i", "bought", "these", "to", "have", "[MASK]", "sound", "outside"]


def _client(config, scorer=None):
    return TestClient(create_app(config, scorer=scorer or FakeMaskedLM()))


def _body(**overrides):
    body = {"tokens": SENTENCE, "mask_index": 5,
            "candidates": ["many", "extra", "full", "total"]}
    body.update(overrides)
    return body


def test_score_happy_path(config):
    with _client(config) as client:
        response = client.post("/v1/score", json=_body())
    assert response.status_code == 200
    payload = response.json()
    assert payload["probabilities"] == [3.76e-05, 0.01442, 0.00021, 5.21e-05]
    assert payload["model"] == "fake-masked-lm"


def test_score_alignment_and_range(config):
    with _client(config) as client:
        response = client.post("/v1/score", json=_body(
            candidates=["good", "unknownword", "extra"]))
    probs = response.json()["probabilities"]
    assert len(probs) == 3
    assert all(0.0 <= p <= 1.0 for p in probs)


def test_score_deterministic(config):
    with _client(config) as client:
        first = client.post("/v1/score", json=_body()).json()
        second = client.post("/v1/score", json=_body()).json()
    assert first == second


def test_empty_candidates_is_400(config):
    with _client(config) as client:
        response = client.post("/v1/score", json=_body(candidates=[]))
    assert response.status_code == 400
    assert "error" in response.json()


def test_malformed_bodies_are_400(config):
    cases = [
        {},
        {"tokens": "not-a-list", "mask_index": 0, "candidates": ["a"]},
        {"tokens": ["a"], "candidates": ["b"]},
        {"tokens": ["a"], "mask_index": "0", "candidates": ["b"]},
        {"tokens": [], "mask_index": 0, "candidates": ["b"]},
    ]
    with _client(config) as client:
        for body in cases:
            response = client.post("/v1/score", json=body)
            assert response.status_code == 400, body
            assert "error" in response.json()
        raw = client.post("/v1/score", content=b"not json",
                          headers={"Content-Type": "application/json"})
        assert raw.status_code == 400


def test_mask_index_out_of_range_is_422(config):
    with _client(config) as client:
        for bad in (-1, len(SENTENCE), 99):
            response = client.post("/v1/score", json=_body(mask_index=bad))
            assert response.status_code == 422, bad


def test_query_longer_than_max_length_is_400(config):
    with _client(config) as client:
        response = client.post("/v1/score", json=_body(
            tokens=["w"] * (config.max_length + 1), mask_index=0))
    assert response.status_code == 400


def test_not_loaded_is_503_then_recovers(config):
    scorer = FakeMaskedLM(ready=False)
    with TestClient(create_app(config, scorer=scorer, load_eagerly=False)) as client:
        assert client.get("/v1/health").json() == {"model": "fake-masked-lm",
                                                   "ready": False}
        assert client.post("/v1/score", json=_body()).status_code == 503
        scorer.load()
        assert client.get("/v1/health").json()["ready"] is True
        assert client.post("/v1/score", json=_body()).status_code == 200


def test_health_after_load(config):
    with _client(config) as client:
        payload = client.get("/v1/health").json()
    assert payload == {"model": "fake-masked-lm", "ready": True}


def test_unknown_route_is_404(config):
    with _client(config) as client:
        assert client.get("/v1/nope").status_code == 404


def test_subtoken_handling_is_flagged(config):
    with _client(config) as client:
        response = client.post("/v1/score", json=_body(
            candidates=["extra", "extra-good"]))
    payload = response.json()
    assert payload["probabilities"][1] == 0.01442 * 0.02
    assert payload["notes"] == [{"candidate": "extra-good",
                                 "handling": "subtokens", "pieces": 2}]


def test_zero_policy_is_flagged(config):
    scorer = FakeMaskedLM(oov_policy="zero")
    with _client(config, scorer=scorer) as client:
        response = client.post("/v1/score", json=_body(
            candidates=["extra-good", "extra"]))
    payload = response.json()
    assert payload["probabilities"][0] == 0.0
    assert payload["notes"][0]["handling"] == "zero"


def test_parallel_requests(live_service):
    import httpx

    def one(_):
        response = httpx.post(f"{live_service}/v1/score", json=_body(), timeout=10)
        return response.status_code, tuple(response.json()["probabilities"])

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(one, range(24)))
    assert all(status == 200 for status, _ in results)
    assert len({probs for _, probs in results}) == 1
