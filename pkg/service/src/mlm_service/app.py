"""HTTP layer implementing wire protocol v1.

POST /v1/score  {"tokens": [...], "mask_index": int, "candidates": [...]}
  200 {"probabilities": [...], "model": name[, "notes": [...]]}
  400 {"error": ...} malformed body          422 mask_index out of range
  503 model not loaded
GET /v1/health  {"model": name, "ready": bool}

The service is stateless per request; inference may serialize on a lock,
but the HTTP layer accepts parallel connections.
"""

import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import ServiceConfig
from .scorer import HuggingFaceMaskedLM, MaskedLMScorer


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": message})


def _validate(body) -> str | None:
    if not isinstance(body, dict):
        return "body must be a JSON object"
    tokens = body.get("tokens")
    if not isinstance(tokens, list) or not tokens \
            or not all(isinstance(t, str) for t in tokens):
        return "'tokens' must be a non-empty list of strings"
    if not isinstance(body.get("mask_index"), int) \
            or isinstance(body.get("mask_index"), bool):
        return "'mask_index' must be an integer"
    candidates = body.get("candidates")
    if not isinstance(candidates, list) or not candidates \
            or not all(isinstance(c, str) for c in candidates):
        return "'candidates' must be a non-empty list of strings"
    return None


def create_app(config: ServiceConfig,
               scorer: MaskedLMScorer | None = None,
               load_eagerly: bool = True) -> FastAPI:
    """Build the service; ``scorer`` defaults to the pretrained backend."""
    if scorer is None:
        scorer = HuggingFaceMaskedLM(config.model_name, config.max_length,
                                     config.oov_policy)

    @asynccontextmanager
    async def lifespan(_app):
        loader = getattr(scorer, "load", None)
        if load_eagerly and loader is not None and not scorer.ready():
            try:
                loader()
            except Exception:
                # stay up and report not-ready: /v1/score answers 503
                pass
        yield

    app = FastAPI(title="mlm-service", version="1.0", lifespan=lifespan)
    inference_lock = threading.Lock()

    @app.get("/v1/health")
    def health():
        return {"model": scorer.model_name, "ready": scorer.ready()}

    @app.post("/v1/score")
    async def score(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _bad_request("body is not valid JSON")
        problem = _validate(body)
        if problem is not None:
            return _bad_request(problem)
        tokens = body["tokens"]
        mask_index = body["mask_index"]
        if len(tokens) > config.max_length:
            return _bad_request(
                f"query has {len(tokens)} tokens, limit is {config.max_length}")
        if not 0 <= mask_index < len(tokens):
            return JSONResponse(status_code=422,
                                content={"error": "mask_index out of range"})
        if not scorer.ready():
            return JSONResponse(status_code=503,
                                content={"error": "model not loaded"})
        with inference_lock:
            probs, notes = scorer.score(tokens, mask_index, body["candidates"])
        payload = {"probabilities": probs, "model": scorer.model_name}
        if notes:
            payload["notes"] = [n.to_dict() for n in notes]
        return payload

    return app
