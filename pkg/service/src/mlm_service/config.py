"""Service configuration: one JSON file, environment overrides on top."""

import json
import os
from dataclasses import dataclass

ENV_PREFIX = "MLM_SERVICE_"


@dataclass(frozen=True)
class ServiceConfig:
    model_name: str = "distilbert-base-uncased"
    host: str = "127.0.0.1"
    port: int = 8763
    max_length: int = 128
    request_timeout: float = 10.0
    # how to score a candidate the tokenizer splits into several pieces:
    # "subtokens" multiplies the per-piece fill probabilities, "zero" scores 0
    oov_policy: str = "subtokens"

    def __post_init__(self):
        if self.max_length < 8:
            raise ValueError("max_length must cover the longest expected query")
        if self.oov_policy not in ("subtokens", "zero"):
            raise ValueError("oov_policy must be 'subtokens' or 'zero'")


def load_config(path: str | None = None, env: dict | None = None) -> ServiceConfig:
    """Read the JSON config file (optional), then apply env overrides."""
    env = os.environ if env is None else env
    values: dict = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(json.load(fh))
    casts = {"model_name": str, "host": str, "port": int, "max_length": int,
             "request_timeout": float, "oov_policy": str}
    for key, cast in casts.items():
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = cast(raw)
    unknown = set(values) - set(casts)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ServiceConfig(**values)
